/*
 * Umbrella header for the full library.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include "ganbench/bench.hpp"
#include "ganbench/cnn.hpp"
#include "ganbench/degrade.hpp"
#include "ganbench/errors.hpp"
#include "ganbench/features.hpp"
#include "ganbench/fft.hpp"
#include "ganbench/gemm.hpp"
#include "ganbench/image.hpp"
#include "ganbench/jpeg.hpp"
#include "ganbench/linear.hpp"
#include "ganbench/manifest.hpp"
#include "ganbench/metrics.hpp"
#include "ganbench/model_io.hpp"
#include "ganbench/parallel.hpp"
#include "ganbench/residual.hpp"
#include "ganbench/rng.hpp"
#include "ganbench/spectral.hpp"
#include "ganbench/synthgen.hpp"
#include "ganbench/trainconfig.hpp"
