#pragma once

#include "hyperconv/adam.hpp"
#include "hyperconv/bench.hpp"
#include "hyperconv/datasets.hpp"
#include "hyperconv/dense.hpp"
#include "hyperconv/errors.hpp"
#include "hyperconv/hypergraph.hpp"
#include "hyperconv/layers.hpp"
#include "hyperconv/rng.hpp"
#include "hyperconv/sparse.hpp"
#include "hyperconv/synthetic.hpp"
#include "hyperconv/tensor.hpp"
#include "hyperconv/trainer.hpp"
#include "hyperconv/transition.hpp"
#include "hyperconv/verify.hpp"
#include "hyperconv/version.hpp"
