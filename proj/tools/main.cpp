#include "sphrelax/io/cli.hpp"

int main(int argc, char **argv) { return sphrelax::io::cli_main(argc, argv); }
