#pragma once

// File formats and run manifests. Needs libcrypto (manifest hashes).
#include "fnelearn/io/csv.hpp"
#include "fnelearn/io/json_io.hpp"
#include "fnelearn/io/manifest.hpp"
