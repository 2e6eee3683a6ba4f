#pragma once

// Everything except the acceptance suite and the experiment runner.

#include "qsa/error.hpp"
#include "qsa/random.hpp"
#include "qsa/stats.hpp"
#include "qsa/ledger.hpp"
#include "qsa/qcore.hpp"
#include "qsa/phase.hpp"
#include "qsa/amplitude.hpp"
#include "qsa/mean.hpp"
#include "qsa/gibbs.hpp"
#include "qsa/pipeline.hpp"
