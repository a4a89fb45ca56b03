#include "identikit/profile.hpp"

#include "identikit/fim.hpp"
#include "identikit/parallel.hpp"
#include "identikit/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace identikit {

std::string to_string(ProfileClass c) {
    switch (c) {
    case ProfileClass::identifiable: return "identifiable";
    case ProfileClass::practically_unidentifiable: return "practically-unidentifiable";
    case ProfileClass::structurally_unidentifiable_flat: return "structurally-unidentifiable-flat";
    }
    return "unknown";
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct GridPoint {
    double value;
    double loglik;
    bool converged;
    ParameterVector theta;
};

std::vector<double> default_grid(const Model& model, const Dataset& data, const ParameterVector& theta_hat,
                                 int index, const ProfileOptions& options) {
    const auto& space = model.space();
    const double lo = space.lower(index), hi = space.upper(index);
    const double center = theta_hat[index];
    const int half = std::max(1, options.grid_points / 2);

    double sd = nan;
    try {
        const auto report = assemble_fim(sensitivity(model, data.design, theta_hat), data.design);
        if (report.classification == Classification::identifiable) {
            const auto v = combination_variance(report, Eigen::VectorXd::Unit(model.dimension(), index));
            sd = std::sqrt(v.variance);
        }
    } catch (const Error&) {
    }

    std::vector<double> grid;
    if (std::isfinite(sd) && sd > 0) {
        const double step = options.width_sd * sd / half;
        bool cut_low = false, cut_high = false;
        for (int k = -half; k <= half; ++k) {
            const double v = k == 0 ? center : center + k * step;
            if (v < lo) cut_low = true;
            else if (v > hi) cut_high = true;
            else grid.push_back(v);
        }
        if (cut_low) grid.insert(grid.begin(), lo);
        if (cut_high) grid.push_back(hi);
        // Barely informative curvature: the window swallows Θ, so use the whole slice.
        if (static_cast<int>(grid.size()) < half + 1) {
            grid.clear();
        }
    }
    if (grid.empty()) {
        for (int k = 0; k < 2 * half + 1; ++k) grid.push_back(lo + (hi - lo) * k / (2.0 * half));
        grid.push_back(center);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    return grid;
}

} // namespace

ProfileCurve profile_parameter(const Model& model, const Dataset& data, const EstimateResult& fit_result,
                               int index, const ProfileOptions& options) {
    const auto& space = model.space();
    if (index < 0 || index >= model.dimension()) throw PreconditionError("profile index out of range");
    if (!fit_result.converged || fit_result.failed)
        throw PreconditionError("profiling needs a converged fit");

    ProfileCurve curve;
    curve.index = index;
    curve.theta_hat = fit_result.theta[index];
    curve.lower_limit = space.lower(index);
    curve.upper_limit = space.upper(index);
    curve.level = options.level;
    if (options.use_estimated_sigma && std::isfinite(fit_result.sigma2_hat) && fit_result.sigma2_hat > 0) {
        curve.sigma = std::sqrt(fit_result.sigma2_hat);
        curve.sigma_source = "estimated";
    } else {
        curve.sigma = data.design.noise_sd;
        curve.sigma_source = "design";
    }
    curve.max_loglik = log_likelihood(fit_result.objective, curve.sigma);

    std::vector<double> grid;
    if (options.grid) {
        grid = *options.grid;
        for (double v : grid) {
            if (!(v >= curve.lower_limit && v <= curve.upper_limit))
                throw OutOfBoundsError("profile.grid value outside the parameter's range in Θ");
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    } else {
        grid = default_grid(model, data, fit_result.theta, index, options);
    }
    if (grid.empty()) throw PreconditionError("profile grid is empty");

    const auto nearest = std::min_element(grid.begin(), grid.end(), [&](double a, double b) {
        return std::abs(a - curve.theta_hat) < std::abs(b - curve.theta_hat);
    });
    const auto center = static_cast<std::size_t>(nearest - grid.begin());

    FitOptions fit_options = options.fit;
    const double threshold = chi_square_quantile(options.level, 1) / 2.0;

    auto refit = [&](double value, const ParameterVector& warm) {
        GridPoint gp{value, nan, false, warm};
        ParameterVector start = warm;
        start[index] = value;
        start = space.clamp(start);
        if (!space.contains(start)) {
            start = fit_result.theta;
            start[index] = value;
            if (!space.contains(start)) return gp;
        }
        ParameterMask mask = fit_options.mask.dimension() ? fit_options.mask : ParameterMask(model.dimension());
        mask.fix(index, value);
        FitOptions o = fit_options;
        o.mask = mask;
        const EstimateResult r = fit(model, data, start, o);
        if (r.failed) return gp;
        gp.loglik = log_likelihood(r.objective, curve.sigma);
        gp.converged = r.converged;
        gp.theta = r.theta;
        return gp;
    };

    // Sweep 0 walks up from the centre (inclusive), sweep 1 walks down.
    std::vector<GridPoint> sweeps[2];
    bool truncated[2] = {false, false};
    parallel_for(2, options.threads, [&](std::size_t dir) {
        auto& out = sweeps[dir];
        ParameterVector warm = fit_result.theta;
        double best = curve.max_loglik;
        auto visit = [&](double value) {
            GridPoint gp = refit(value, warm);
            if (std::isnan(gp.loglik)) {
                truncated[dir] = true;
                return false;
            }
            warm = gp.theta;
            best = std::max(best, gp.loglik);
            out.push_back(std::move(gp));
            return true;
        };
        if (dir == 0) {
            for (std::size_t k = center; k < grid.size(); ++k)
                if (!visit(grid[k])) return;
        } else {
            for (std::size_t k = center; k-- > 0;)
                if (!visit(grid[k])) return;
        }
        if (!options.extend_to_bounds || options.grid || out.empty()) return;

        const double limit = dir == 0 ? curve.upper_limit : curve.lower_limit;
        double step = grid.size() > 1 ? (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1)
                                      : std::abs(limit - curve.theta_hat) / 10.0;
        for (int e = 0; e < options.max_extension; ++e) {
            const double last = out.back().value;
            if (best - out.back().loglik > threshold || last == limit) break;
            step *= 2.0;
            const double next = dir == 0 ? std::min(last + step, limit) : std::max(last - step, limit);
            if (!visit(next)) return;
        }
    });

    std::vector<GridPoint> points;
    for (auto it = sweeps[1].rbegin(); it != sweeps[1].rend(); ++it) points.push_back(*it);
    points.insert(points.end(), sweeps[0].begin(), sweeps[0].end());
    curve.truncated = truncated[0] || truncated[1];

    // Bisect coarse brackets around the threshold so the interpolated interval is accurate.
    if (!options.grid) {
        for (int pass = 0; pass < 12; ++pass) {
            double peak = curve.max_loglik;
            for (const auto& gp : points) peak = std::max(peak, gp.loglik);
            bool inserted = false;
            for (std::size_t k = 0; k + 1 < points.size(); ++k) {
                const double a = peak - points[k].loglik, b = peak - points[k + 1].loglik;
                const bool brackets = (a > threshold) != (b > threshold);
                if (!brackets || std::abs(a - b) <= 0.25 * threshold) continue;
                const std::size_t inner = a > threshold ? k + 1 : k;
                GridPoint gp = refit(0.5 * (points[k].value + points[k + 1].value), points[inner].theta);
                if (std::isnan(gp.loglik)) continue;
                points.insert(points.begin() + static_cast<std::ptrdiff_t>(k + 1), std::move(gp));
                inserted = true;
                ++k;
            }
            if (!inserted) break;
        }
    }
    for (auto& gp : points) {
        curve.grid.push_back(gp.value);
        curve.loglik.push_back(gp.loglik);
        curve.converged.push_back(gp.converged);
        curve.optima.push_back(std::move(gp.theta));
    }

    const auto verdict = classify_profile(curve, options.level, options.flatness);
    curve.classification = verdict.classification;
    curve.interval = verdict.interval;
    curve.total_variation = verdict.total_variation;
    return curve;
}

ProfileVerdict classify_profile(const ProfileCurve& curve, double level, double flatness) {
    ProfileVerdict v;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < curve.grid.size(); ++k) {
        if (std::isfinite(curve.loglik[k])) {
            x.push_back(curve.grid[k]);
            y.push_back(curve.loglik[k]);
        }
    }
    if (x.empty()) {
        v.classification = ProfileClass::practically_unidentifiable;
        return v;
    }
    for (std::size_t k = 1; k < y.size(); ++k) v.total_variation += std::abs(y[k] - y[k - 1]);

    v.interval.lower = x.front();
    v.interval.upper = x.back();
    if (v.total_variation < flatness) {
        v.classification = ProfileClass::structurally_unidentifiable_flat;
        return v;
    }

    const double threshold = chi_square_quantile(level, 1) / 2.0;
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double top = std::max(y[peak], std::isfinite(curve.max_loglik) ? curve.max_loglik : y[peak]);

    // A run of at least three grid points within `flatness` of the peak is a
    // flat region around the maximum even if the curve falls off further out.
    std::size_t plateau_lo = peak, plateau_hi = peak;
    while (plateau_lo > 0 && top - y[plateau_lo - 1] <= flatness) --plateau_lo;
    while (plateau_hi + 1 < y.size() && top - y[plateau_hi + 1] <= flatness) ++plateau_hi;
    const bool plateau = plateau_hi - plateau_lo >= 2;
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double d0 = top - y[inside], d1 = top - y[outside];
        const double w = (threshold - d0) / (d1 - d0);
        return x[inside] + w * (x[outside] - x[inside]);
    };

    for (std::size_t k = peak + 1; k < y.size(); ++k) {
        if (top - y[k] > threshold) {
            v.interval.upper = crossing(k - 1, k);
            v.interval.upper_bounded = true;
            break;
        }
    }
    for (std::size_t k = peak; k-- > 0;) {
        if (top - y[k] > threshold) {
            v.interval.lower = crossing(k + 1, k);
            v.interval.lower_bounded = true;
            break;
        }
    }
    if (plateau) {
        v.classification = ProfileClass::structurally_unidentifiable_flat;
    } else {
        v.classification = v.interval.lower_bounded && v.interval.upper_bounded
                               ? ProfileClass::identifiable
                               : ProfileClass::practically_unidentifiable;
    }
    return v;
}

} // namespace identikit
