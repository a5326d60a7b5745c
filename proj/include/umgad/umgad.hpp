#pragma once

#include "autodiff.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "detect.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "inject.hpp"
#include "io.hpp"
#include "masking.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "rng.hpp"
#include "synthetic.hpp"
#include "training.hpp"
