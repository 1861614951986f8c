#ifndef SCGAN_SCGAN_HPP
#define SCGAN_SCGAN_HPP

// Umbrella header: the full unpaired image-translation engine.

#include "scgan/adam.hpp"
#include "scgan/augment.hpp"
#include "scgan/blas.hpp"
#include "scgan/checkpoint.hpp"
#include "scgan/common.hpp"
#include "scgan/conv.hpp"
#include "scgan/dataset.hpp"
#include "scgan/features.hpp"
#include "scgan/losses.hpp"
#include "scgan/metrics.hpp"
#include "scgan/nn.hpp"
#include "scgan/ops.hpp"
#include "scgan/png_io.hpp"
#include "scgan/pool.hpp"
#include "scgan/resize.hpp"
#include "scgan/rng.hpp"
#include "scgan/synthetic.hpp"
#include "scgan/tape.hpp"
#include "scgan/tensor.hpp"
#include "scgan/trainer.hpp"
#include "scgan/translate.hpp"
#include "scgan/winograd.hpp"

#endif
