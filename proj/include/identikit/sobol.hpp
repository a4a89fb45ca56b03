#pragma once

#include "identikit/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace identikit {

struct PriorComponent {
    enum class Kind { uniform, log_uniform };
    Kind kind = Kind::uniform;
    double lo = 0.0;
    double hi = 1.0;

    // Maps u ∈ (0, 1) to a draw.
    double transform(double u) const;
};

class Prior {
public:
    Prior() = default;
    explicit Prior(std::vector<PriorComponent> components);
    static Prior uniform_over(const ParameterSpace& space);

    int dimension() const { return static_cast<int>(components_.size()); }
    const PriorComponent& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
    const std::vector<PriorComponent>& components() const { return components_; }

    // Every component's support must lie inside the matching Θ interval.
    void validate(const ParameterSpace& space) const;

private:
    std::vector<PriorComponent> components_;
};

enum class Aggregation { variance_weighted, mean };

struct SobolIndices {
    std::vector<double> first;
    std::vector<double> first_se;
    std::vector<double> total;
    std::vector<double> total_se;
};

struct SobolReport {
    SobolIndices aggregate;
    std::vector<SobolIndices> per_time; // one entry per design time
    std::vector<double> variance;       // Var f(t_i) per time
    double aggregate_variance = 0.0;    // mean of per-time variances
    int samples = 0;                    // N
    int bootstrap = 0;
    int rejected = 0;                   // sample rows redrawn after evaluation failures
    bool degenerate = false;
    Aggregation aggregation = Aggregation::variance_weighted;
    std::uint64_t seed = 0;
};

struct SobolOptions {
    int samples = 1 << 14;
    int bootstrap = 200;
    std::uint64_t seed = 0;
    Aggregation aggregation = Aggregation::variance_weighted;
    std::size_t threads = 1;
    int max_redraws = 1000;
};

// Pick-freeze estimates on the noiseless output: first order
// ⟨f(B)(f(A_B^i) − f(A))⟩/Var, total order (Jansen) ⟨(f(A) − f(A_B^i))²⟩/(2 Var).
SobolReport sobol_indices(const Model& model, const Design& design, const Prior& prior,
                          const SobolOptions& options = {});

// Parameters whose first- and total-order aggregate indices are both ≤ threshold.
// Necessary, not sufficient: nonzero indices do not establish identifiability.
std::vector<int> screen_unidentifiable(const SobolReport& report, double threshold = 0.01);

// Summation by recursive halving; the result depends only on the input order.
double pairwise_sum(const double* values, std::size_t count);

} // namespace identikit
