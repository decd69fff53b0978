#pragma once

// Umbrella header: one-pass discounted least-squares estimators for drifting
// streams, their closed-form and error-bound oracles, synthetic drift-stream
// generators, and the evaluation harness.

#include "dfop/errors.hpp"
#include "dfop/rng.hpp"
#include "dfop/linalg.hpp"
#include "dfop/estimators.hpp"
#include "dfop/streams.hpp"
#include "dfop/oracle.hpp"
#include "dfop/eval.hpp"
