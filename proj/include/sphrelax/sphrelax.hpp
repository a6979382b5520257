#pragma once

#include "sphrelax/common.hpp"
#include "sphrelax/diagnostics.hpp"
#include "sphrelax/kernel.hpp"
#include "sphrelax/level_set.hpp"
#include "sphrelax/particles.hpp"
#include "sphrelax/polygon.hpp"
#include "sphrelax/relaxation.hpp"
#include "sphrelax/shape.hpp"
#include "sphrelax/system.hpp"
#include "sphrelax/trimesh.hpp"
#include "sphrelax/version.hpp"
#include "sphrelax/io/config.hpp"
#include "sphrelax/io/particles_io.hpp"
#include "sphrelax/io/polygon_csv.hpp"
#include "sphrelax/io/stl.hpp"
