#pragma once

#include "identikit/model.hpp"
#include "identikit/sensitivity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace identikit {

enum class Classification { identifiable, rank_deficient };

std::string to_string(Classification c);

struct SloppinessStats {
    double spread_decades = 0.0; // log10 λ_max − log10 λ_min
    double slope = 0.0;          // fitted log10 λ per index
    double intercept = 0.0;
    double r_squared = 1.0;
    double residual_rms = 0.0;
    bool sloppy = false;
};

struct FimReport {
    Eigen::MatrixXd fim;
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::MatrixXd eigenvectors; // column k pairs with eigenvalues[k]
    int rank = 0;
    Classification classification = Classification::identifiable;
    double rank_tolerance = 1e-10;
    double sigma = 1.0;
    int replicates = 1;
    std::optional<SloppinessStats> sloppiness; // absent when a zero eigenvalue is present

    int dimension() const { return static_cast<int>(fim.rows()); }
};

// I = replicates · σ⁻² VᵀV with its symmetric eigen-decomposition.
FimReport assemble_fim(const Eigen::MatrixXd& V, double sigma, int replicates = 1,
                       double rank_tolerance = 1e-10);

inline FimReport assemble_fim(const SensitivityMatrix& V, const Design& design,
                              double rank_tolerance = 1e-10) {
    return assemble_fim(V.entries, design.noise_sd, design.replicates, rank_tolerance);
}

struct LocalIdentifiability {
    Classification classification = Classification::identifiable;
    int rank = 0;
    std::vector<Eigen::VectorXd> null_directions;
};

// Rank-deficient iff λ_max = 0 or λ_min / λ_max < tolerance.
LocalIdentifiability classify_local_identifiability(const FimReport& report, double tolerance = 1e-10);

// Least-squares line through (i, log10 λ_i). Sloppy when the spread is at
// least min_decades and R² ≥ min_r_squared. Throws PreconditionError when an
// eigenvalue is not strictly positive.
SloppinessStats detect_sloppiness(const FimReport& report, double min_decades = 3.0,
                                  double min_r_squared = 0.9);
SloppinessStats detect_sloppiness(const Eigen::VectorXd& eigenvalues, double min_decades = 3.0,
                                  double min_r_squared = 0.9);

struct CombinationVariance {
    enum class Status { exact, pseudo_inverse, unbounded };
    double variance = 0.0;
    Status status = Status::exact;
};

// aᵀ I⁻¹ a. For a rank-deficient I, returns the pseudo-inverse value when a
// lies in the row space and +∞ (status unbounded) otherwise.
CombinationVariance combination_variance(const FimReport& report, const Eigen::VectorXd& a);

struct ConfidenceEllipsoid {
    ParameterVector center;
    Eigen::MatrixXd axes;          // unit axes as columns, paired with semi_axes
    Eigen::VectorXd semi_axes;     // sqrt(χ²_p(level) / λ_i)
    double level = 0.95;
    double chi_square_quantile = 0.0;
};

ConfidenceEllipsoid confidence_ellipsoid(const FimReport& report, const ParameterVector& center,
                                         double level);

double chi_square_quantile(double level, int dof);

enum class DesignCriterion { D, A, E };

std::string to_string(DesignCriterion c);
DesignCriterion parse_design_criterion(const std::string& text);

// D: det I (higher better). A: trace I⁻¹ (lower better, +∞ when singular).
// E: λ_min (higher better).
double design_score(const FimReport& report, DesignCriterion criterion);
double design_score(const Model& model, const Design& design, const ParameterVector& theta,
                    DesignCriterion criterion);

// Eigen-value floor used for pseudo-inverse and unbounded-variance decisions.
double null_threshold(const FimReport& report);

} // namespace identikit
