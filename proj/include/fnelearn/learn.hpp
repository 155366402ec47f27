#pragma once

#include "fnelearn/learn/admm.hpp"
#include "fnelearn/learn/constraint_maps.hpp"
#include "fnelearn/learn/risk.hpp"
#include "fnelearn/learn/sololip.hpp"
#include "fnelearn/learn/spectral_ball.hpp"
#include "fnelearn/learn/training_set.hpp"
