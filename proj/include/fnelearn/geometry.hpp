#pragma once

#include "fnelearn/geometry/delaunay.hpp"
#include "fnelearn/geometry/hull.hpp"
#include "fnelearn/geometry/node_set.hpp"
#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/geometry/refine.hpp"
#include "fnelearn/geometry/validate.hpp"
