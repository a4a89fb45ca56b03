#pragma once

#include "identikit/model.hpp"

namespace identikit {

struct OdeSolution {
    Eigen::VectorXd outputs;       // n
    Eigen::MatrixXd sensitivities; // n × p, empty unless requested
};

// Integrates the system to each time point (all ≥ system.t0) with an adaptive
// Dormand–Prince 5(4) scheme. With sensitivities, the augmented system
// s' = (∂g/∂x) s + ∂g/∂θ, s(t0) = ∂x0/∂θ is integrated jointly with the state.
OdeSolution solve_ode(const OdeSystem& system, std::span<const double> times,
                      const ParameterVector& theta, bool with_sensitivities);

} // namespace identikit
