// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

// Umbrella header for the censtereo library: a software implementation of a
// Census-based stereo depth pipeline with confidence filtering, camera
// geometry, error models, sensor-noise synthesis, synthetic test scenes,
// evaluation metrics, and disparity post-processing.

#include "censtereo/camera.hpp"
#include "censtereo/census.hpp"
#include "censtereo/cost_volume.hpp"
#include "censtereo/image.hpp"
#include "censtereo/image_io.hpp"
#include "censtereo/interest.hpp"
#include "censtereo/matcher.hpp"
#include "censtereo/metrics.hpp"
#include "censtereo/noise.hpp"
#include "censtereo/perf_model.hpp"
#include "censtereo/pipeline.hpp"
#include "censtereo/postproc.hpp"
#include "censtereo/rng.hpp"
#include "censtereo/synth.hpp"
