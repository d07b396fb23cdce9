#pragma once

#include "qqr/albrekht.hpp"
#include "qqr/errors.hpp"
#include "qqr/kronecker.hpp"
#include "qqr/kronsum_solver.hpp"
#include "qqr/problems.hpp"
#include "qqr/riccati.hpp"
#include "qqr/simulate.hpp"
#include "qqr/system_io.hpp"
