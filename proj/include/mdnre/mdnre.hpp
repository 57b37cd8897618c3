#pragma once

#include "mdnre/common.hpp"
#include "mdnre/core.hpp"
#include "mdnre/reference_frames.hpp"
#include "mdnre/training.hpp"
#include "mdnre/rng.hpp"
#include "mdnre/synthgen.hpp"
#include "mdnre/baselines.hpp"
#include "mdnre/io.hpp"
#include "mdnre/eval.hpp"
