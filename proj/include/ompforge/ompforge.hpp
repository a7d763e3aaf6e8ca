#pragma once

// Umbrella header: the whole toolchain-validation harness.

#include "ompforge/bench.hpp"
#include "ompforge/clock.hpp"
#include "ompforge/config.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/greenlist.hpp"
#include "ompforge/mock.hpp"
#include "ompforge/pipeline.hpp"
#include "ompforge/report.hpp"
#include "ompforge/runner.hpp"
#include "ompforge/subprocess.hpp"
#include "ompforge/suite.hpp"
