#include "identikit/sobol.hpp"

#include "identikit/parallel.hpp"
#include "identikit/rng.hpp"

#include <cmath>

namespace identikit {

double PriorComponent::transform(double u) const {
    if (kind == Kind::uniform) return lo + (hi - lo) * u;
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * u);
}

Prior::Prior(std::vector<PriorComponent> components) : components_(std::move(components)) {
    for (const auto& c : components_) {
        if (!(c.lo < c.hi)) throw PreconditionError("prior lower bound must be below upper bound");
        if (c.kind == PriorComponent::Kind::log_uniform && !(c.lo > 0))
            throw PreconditionError("log-uniform prior needs a positive lower bound");
    }
}

Prior Prior::uniform_over(const ParameterSpace& space) {
    std::vector<PriorComponent> c;
    for (int i = 0; i < space.dimension(); ++i)
        c.push_back({PriorComponent::Kind::uniform, space.lower(i), space.upper(i)});
    return Prior(std::move(c));
}

void Prior::validate(const ParameterSpace& space) const {
    if (dimension() != space.dimension()) throw PreconditionError("prior dimension differs from Θ");
    for (int i = 0; i < dimension(); ++i) {
        if (components_[i].lo < space.lower(i) || components_[i].hi > space.upper(i))
            throw OutOfBoundsError("prior support for " + space.names()[i] + " leaves Θ");
    }
}

double pairwise_sum(const double* values, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += values[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

namespace {

struct TimeMoments {
    double variance;
    std::vector<double> first;
    std::vector<double> total;
};

// Indices for one output time from the selected sample rows.
TimeMoments estimate(const std::vector<int>& rows, const Eigen::MatrixXd& fa, const Eigen::MatrixXd& fb,
                     const std::vector<Eigen::MatrixXd>& fab, Eigen::Index t, std::vector<double>& scratch) {
    const std::size_t n = rows.size();
    const int p = static_cast<int>(fab.size());
    TimeMoments m;

    scratch.resize(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        scratch[k] = fa(rows[k], t);
        scratch[n + k] = fb(rows[k], t);
    }
    const double mean = pairwise_sum(scratch.data(), 2 * n) / static_cast<double>(2 * n);
    for (auto& v : scratch) v = (v - mean) * (v - mean);
    m.variance = pairwise_sum(scratch.data(), 2 * n) / static_cast<double>(2 * n - 1);

    m.first.assign(static_cast<std::size_t>(p), 0.0);
    m.total.assign(static_cast<std::size_t>(p), 0.0);
    if (!(m.variance > 0.0)) return m;

    std::vector<double> tot(n);
    scratch.resize(n);
    for (int i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const int r = rows[k];
            const double diff = fab[static_cast<std::size_t>(i)](r, t) - fa(r, t);
            scratch[k] = (fb(r, t) - mean) * diff;
            tot[k] = diff * diff;
        }
        m.first[static_cast<std::size_t>(i)] =
            pairwise_sum(scratch.data(), n) / static_cast<double>(n) / m.variance;
        m.total[static_cast<std::size_t>(i)] =
            pairwise_sum(tot.data(), n) / static_cast<double>(2 * n) / m.variance;
    }
    return m;
}

struct Aggregated {
    std::vector<double> first, total;
    bool degenerate;
};

Aggregated aggregate(const std::vector<TimeMoments>& per_time, Aggregation mode, int p) {
    Aggregated a{std::vector<double>(static_cast<std::size_t>(p), 0.0),
                 std::vector<double>(static_cast<std::size_t>(p), 0.0), true};
    double weight_sum = 0.0;
    for (const auto& m : per_time) {
        if (!(m.variance > 0.0)) continue;
        const double w = mode == Aggregation::variance_weighted ? m.variance : 1.0;
        weight_sum += w;
        for (int i = 0; i < p; ++i) {
            a.first[static_cast<std::size_t>(i)] += w * m.first[static_cast<std::size_t>(i)];
            a.total[static_cast<std::size_t>(i)] += w * m.total[static_cast<std::size_t>(i)];
        }
    }
    if (weight_sum > 0.0) {
        a.degenerate = false;
        for (int i = 0; i < p; ++i) {
            a.first[static_cast<std::size_t>(i)] /= weight_sum;
            a.total[static_cast<std::size_t>(i)] /= weight_sum;
        }
    }
    return a;
}

double standard_error(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    if (xs.size() < 2) return 0.0;
    const double mean = pairwise_sum(xs.data(), xs.size()) / n;
    std::vector<double> sq(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) sq[k] = (xs[k] - mean) * (xs[k] - mean);
    return std::sqrt(pairwise_sum(sq.data(), sq.size()) / (n - 1.0));
}

} // namespace

SobolReport sobol_indices(const Model& model, const Design& design, const Prior& prior,
                          const SobolOptions& options) {
    design.validate();
    prior.validate(model.space());
    const int N = options.samples;
    if (N < (1 << 10) || (N & (N - 1)) != 0)
        throw PreconditionError("sobol.N must be a power of two no smaller than 1024");
    if (options.bootstrap < 0) throw PreconditionError("sobol.bootstrap must be non-negative");

    const int p = model.dimension();
    const Eigen::Index n = design.size();
    Eigen::MatrixXd fa(N, n), fb(N, n);
    std::vector<Eigen::MatrixXd> fab(static_cast<std::size_t>(p), Eigen::MatrixXd(N, n));
    std::vector<int> redraws(static_cast<std::size_t>(N), 0);

    const CounterRng base(options.seed, 0x50b01);
    auto finite_eval = [&](const ParameterVector& theta, Eigen::VectorXd& out) {
        if (!model.space().contains(theta)) return false;
        try {
            out = model.raw(design.times, theta);
        } catch (const EvaluationError&) {
            return false;
        } catch (const IntegratorError&) {
            return false;
        }
        return out.size() == n && out.allFinite();
    };

    parallel_for(static_cast<std::size_t>(N), options.threads, [&](std::size_t row) {
        Eigen::VectorXd ya, yb, yab;
        std::vector<Eigen::VectorXd> cross(static_cast<std::size_t>(p));
        for (int attempt = 0;; ++attempt) {
            if (attempt > options.max_redraws)
                throw EvaluationError("model evaluation keeps failing while sampling the prior");
            const CounterRng rng = base.split(row).split(static_cast<std::uint64_t>(attempt));
            ParameterVector a(p), b(p);
            for (int i = 0; i < p; ++i) {
                a[i] = prior[i].transform(rng.uniform(static_cast<std::uint64_t>(i)));
                b[i] = prior[i].transform(rng.uniform(static_cast<std::uint64_t>(p + i)));
            }
            bool ok = finite_eval(a, ya) && finite_eval(b, yb);
            for (int i = 0; ok && i < p; ++i) {
                ParameterVector ab = a;
                ab[i] = b[i];
                ok = finite_eval(ab, cross[static_cast<std::size_t>(i)]);
            }
            if (!ok) {
                ++redraws[row];
                continue;
            }
            const auto r = static_cast<Eigen::Index>(row);
            fa.row(r) = ya.transpose();
            fb.row(r) = yb.transpose();
            for (int i = 0; i < p; ++i)
                fab[static_cast<std::size_t>(i)].row(r) = cross[static_cast<std::size_t>(i)].transpose();
            return;
        }
    });

    SobolReport report;
    report.samples = N;
    report.bootstrap = options.bootstrap;
    report.aggregation = options.aggregation;
    report.seed = options.seed;
    for (int c : redraws) report.rejected += c;

    std::vector<int> all(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) all[static_cast<std::size_t>(k)] = k;

    std::vector<TimeMoments> moments(static_cast<std::size_t>(n));
    {
        std::vector<double> scratch;
        for (Eigen::Index t = 0; t < n; ++t)
            moments[static_cast<std::size_t>(t)] = estimate(all, fa, fb, fab, t, scratch);
    }
    const Aggregated point = aggregate(moments, options.aggregation, p);
    report.degenerate = point.degenerate;

    // Bootstrap replicates: index [b][time] → per-parameter indices.
    const auto B = static_cast<std::size_t>(options.bootstrap);
    std::vector<std::vector<TimeMoments>> boot(B);
    const CounterRng boot_rng(options.seed, 0xb007);
    parallel_for(B, options.threads, [&](std::size_t b) {
        RngStream rng(boot_rng.split(b));
        std::vector<int> rows(static_cast<std::size_t>(N));
        for (auto& r : rows) r = static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
        std::vector<double> scratch;
        boot[b].resize(static_cast<std::size_t>(n));
        for (Eigen::Index t = 0; t < n; ++t)
            boot[b][static_cast<std::size_t>(t)] = estimate(rows, fa, fb, fab, t, scratch);
    });

    auto se_of = [&](auto&& pick) {
        std::vector<double> out(static_cast<std::size_t>(p), 0.0);
        std::vector<double> xs(B);
        for (int i = 0; i < p; ++i) {
            for (std::size_t b = 0; b < B; ++b) xs[b] = pick(b, i);
            out[static_cast<std::size_t>(i)] = standard_error(xs);
        }
        return out;
    };

    std::vector<Aggregated> boot_agg;
    boot_agg.reserve(B);
    for (const auto& bm : boot) boot_agg.push_back(aggregate(bm, options.aggregation, p));

    report.aggregate.first = point.first;
    report.aggregate.total = point.total;
    report.aggregate.first_se =
        se_of([&](std::size_t b, int i) { return boot_agg[b].first[static_cast<std::size_t>(i)]; });
    report.aggregate.total_se =
        se_of([&](std::size_t b, int i) { return boot_agg[b].total[static_cast<std::size_t>(i)]; });

    double var_sum = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& m = moments[static_cast<std::size_t>(t)];
        report.variance.push_back(m.variance);
        var_sum += m.variance;
        SobolIndices s;
        s.first = m.first;
        s.total = m.total;
        s.first_se = se_of([&](std::size_t b, int i) {
            return boot[b][static_cast<std::size_t>(t)].first[static_cast<std::size_t>(i)];
        });
        s.total_se = se_of([&](std::size_t b, int i) {
            return boot[b][static_cast<std::size_t>(t)].total[static_cast<std::size_t>(i)];
        });
        report.per_time.push_back(std::move(s));
    }
    report.aggregate_variance = var_sum / static_cast<double>(n);
    return report;
}

std::vector<int> screen_unidentifiable(const SobolReport& report, double threshold) {
    std::vector<int> out;
    const auto& a = report.aggregate;
    for (std::size_t i = 0; i < a.first.size(); ++i) {
        if (a.first[i] <= threshold && a.total[i] <= threshold) out.push_back(static_cast<int>(i));
    }
    return out;
}

} // namespace identikit
