#pragma once

#include "hsm/basis.hpp"
#include "hsm/controller.hpp"
#include "hsm/errors.hpp"
#include "hsm/indicators.hpp"
#include "hsm/integrator.hpp"
#include "hsm/ledger.hpp"
#include "hsm/operators.hpp"
#include "hsm/problems.hpp"
#include "hsm/runner.hpp"
