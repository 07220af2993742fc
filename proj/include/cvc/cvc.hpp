#pragma once

#include "cvc/core.hpp"
#include "cvc/csv.hpp"
#include "cvc/engine.hpp"
#include "cvc/error.hpp"
#include "cvc/models.hpp"
#include "cvc/parallel.hpp"
#include "cvc/report.hpp"
#include "cvc/rng.hpp"
#include "cvc/simulate.hpp"
#include "cvc/testing.hpp"
