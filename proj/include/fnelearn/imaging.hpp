#pragma once

// PNG reading needs libpng at link time (target fnelearn_io).

#include "fnelearn/imaging/denoise.hpp"
#include "fnelearn/imaging/gradient.hpp"
#include "fnelearn/imaging/image.hpp"
#include "fnelearn/imaging/metrics.hpp"
#include "fnelearn/imaging/noise.hpp"
#include "fnelearn/imaging/pgm.hpp"
#include "fnelearn/imaging/png.hpp"
#include "fnelearn/imaging/prox.hpp"
#include "fnelearn/imaging/test_images.hpp"
#include "fnelearn/imaging/trainset.hpp"
