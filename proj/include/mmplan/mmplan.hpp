#pragma once

#include "mmplan/geometry.hpp"
#include "mmplan/kinematics.hpp"
#include "mmplan/scene.hpp"
#include "mmplan/distance_field.hpp"
#include "mmplan/query_points.hpp"
#include "mmplan/costs.hpp"
#include "mmplan/anneal.hpp"
#include "mmplan/planner.hpp"
#include "mmplan/scenario.hpp"
#include "mmplan/scenario_io.hpp"
#include "mmplan/bench.hpp"
