#pragma once

#include "identikit/estimation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace identikit {

enum class ProfileClass { identifiable, practically_unidentifiable, structurally_unidentifiable_flat };

std::string to_string(ProfileClass c);

struct ProfileInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_bounded = false;
    bool upper_bounded = false;
};

struct ProfileOptions {
    double level = 0.95;
    double flatness = 1e-6;      // total variation of p_i below this → flat
    int grid_points = 41;
    double width_sd = 5.0;       // default grid spans θ̂_i ± width_sd·sd
    std::optional<std::vector<double>> grid;
    bool extend_to_bounds = true; // keep sweeping toward Θ when no crossing is found
    int max_extension = 30;
    bool use_estimated_sigma = false;
    FitOptions fit;
    std::size_t threads = 1;
};

struct ProfileCurve {
    int index = 0;
    std::vector<double> grid;
    std::vector<double> loglik;              // NaN where the refit failed
    std::vector<bool> converged;
    std::vector<ParameterVector> optima;     // full θ at each grid point
    double theta_hat = 0.0;
    double max_loglik = 0.0;                 // ℓ(θ̂) from the supplied fit
    double sigma = 1.0;
    std::string sigma_source = "design";
    double lower_limit = 0.0;                // Θ slice
    double upper_limit = 0.0;
    bool truncated = false;
    double level = 0.95;
    double total_variation = 0.0;
    ProfileInterval interval;
    ProfileClass classification = ProfileClass::identifiable;
};

// ℓ(θ) = −S(θ)/σ².
inline double log_likelihood(double objective, double sigma) { return -objective / (sigma * sigma); }

// p_i(θ_i) = max ℓ over the other parameters, swept outward from θ̂_i with
// warm starts from the neighbouring grid point.
ProfileCurve profile_parameter(const Model& model, const Dataset& data, const EstimateResult& fit_result,
                               int index, const ProfileOptions& options = {});

struct ProfileVerdict {
    ProfileClass classification = ProfileClass::identifiable;
    ProfileInterval interval;
    double total_variation = 0.0;
};

// Likelihood-ratio interval {θ_i : max p − p_i(θ_i) ≤ χ²₁(level)/2}, linearly
// interpolated between grid points. Flat when the total variation is below
// `flatness`; practically unidentifiable when the interval is open on a side.
ProfileVerdict classify_profile(const ProfileCurve& curve, double level = 0.95, double flatness = 1e-6);

} // namespace identikit
