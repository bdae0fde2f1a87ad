#pragma once

#include "affordsim/bvh.hpp"
#include "affordsim/config.hpp"
#include "affordsim/containability.hpp"
#include "affordsim/error.hpp"
#include "affordsim/evaluation.hpp"
#include "affordsim/frame_export.hpp"
#include "affordsim/geometry.hpp"
#include "affordsim/json_io.hpp"
#include "affordsim/mesh_io.hpp"
#include "affordsim/parallel.hpp"
#include "affordsim/physics.hpp"
#include "affordsim/pouring.hpp"
#include "affordsim/shapes.hpp"
