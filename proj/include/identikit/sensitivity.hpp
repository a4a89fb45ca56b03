#pragma once

#include "identikit/model.hpp"

#include <string>
#include <vector>

namespace identikit {

enum class SensitivityMethod { finite_difference, forward_ode, analytic };

std::string to_string(SensitivityMethod method);

struct SensitivityMatrix {
    Eigen::MatrixXd entries; // n × p
    ParameterVector theta;
    SensitivityMethod method = SensitivityMethod::finite_difference;
    // Columns that fell back to a one-sided difference because θ ± h left Θ.
    std::vector<int> one_sided_columns;
};

struct StepRule {
    // h_j = relative · max(|θ_j|, 1); default is cbrt(machine epsilon).
    double relative = 6.0554544523933395e-06;
};

SensitivityMatrix fd_jacobian(const Model& model, const Design& design, const ParameterVector& theta,
                              StepRule rule = {});

SensitivityMatrix forward_ode_jacobian(const Model& model, const Design& design,
                                       const ParameterVector& theta);

// Analytic Jacobian when registered, forward ODE sensitivities for ODE models,
// central differences otherwise.
SensitivityMatrix sensitivity(const Model& model, const Design& design, const ParameterVector& theta);

// max|A − B| / (max|B| + 1e-12)
double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& reference);

} // namespace identikit
