#ifndef PROLATES_PROLATES_HPP
#define PROLATES_PROLATES_HPP

#include "prolates/chebyshev.hpp"
#include "prolates/legendre.hpp"
#include "prolates/monotonicity.hpp"
#include "prolates/ode_solver.hpp"
#include "prolates/oxr.hpp"
#include "prolates/phase.hpp"
#include "prolates/serialization.hpp"

#endif
