#include "identikit/builtins.hpp"
#include "identikit/estimation.hpp"
#include "identikit/sensitivity.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace identikit;

namespace {

Dataset noiseless(const Model& m, const Design& d, const ParameterVector& th) {
    return generate_data(m, d.with_noise(1e-12), th, 0);
}

const Design biexp_design({0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0}, 0.05);

} // namespace

TEST_CASE("linear least squares") {
    SUBCASE("identity design") {
        const auto r = linear_least_squares(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(3, 4));
        CHECK(r.theta[0] == doctest::Approx(3.0));
        CHECK(r.theta[1] == doctest::Approx(4.0));
        CHECK(std::isnan(r.sigma2_hat));
    }
    SUBCASE("identical columns are unidentifiable") {
        Eigen::MatrixXd X(4, 2);
        X << 1, 1, 2, 2, 3, 3, 4, 4;
        try {
            linear_least_squares(X, Eigen::Vector4d(1, 2, 3, 4));
            FAIL("expected an unidentifiable-design error");
        } catch (const UnidentifiableDesignError& e) {
            CHECK((X * e.null_direction).norm() < 1e-12);
            CHECK(e.null_direction.norm() == doctest::Approx(1.0));
        }
    }
    SUBCASE("noiseless recovery") {
        std::mt19937_64 gen(5);
        Eigen::MatrixXd X(5, 2);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = std::normal_distribution<double>()(gen);
        const auto r = linear_least_squares(X, X * Eigen::Vector2d(1, 2));
        CHECK(std::abs(r.theta[0] - 1) < 1e-10);
        CHECK(std::abs(r.theta[1] - 2) < 1e-10);
    }
}

TEST_CASE("Levenberg–Marquardt fits") {
    SUBCASE("reciprocal noiseless recovery") {
        const auto m = make_reciprocal();
        const auto data = noiseless(m, Design({0, 1, 2, 3, 4}, 0.1), ParameterVector::Constant(1, 0.5));
        const auto r = fit(m, data, ParameterVector::Constant(1, 2.0));
        CHECK(r.converged);
        CHECK(std::abs(r.theta[0] - 0.5) < 1e-6);
        CHECK(r.objective <= 0.5 * 5 * 1e-12 * 10);
    }
    SUBCASE("biexponential converges to the swapped optimum from a nearby start") {
        const auto m = make_biexponential();
        const auto data = noiseless(m, biexp_design, Eigen::Vector2d(2, 1));
        const auto r = fit(m, data, Eigen::Vector2d(0.9, 2.2));
        CHECK(r.converged);
        CHECK(std::abs(r.theta[0] - 1.0) < 1e-6);
        CHECK(std::abs(r.theta[1] - 2.0) < 1e-6);
        const auto direct = fit(m, data, Eigen::Vector2d(2.2, 0.9));
        CHECK(std::abs(direct.objective - r.objective) < 1e-8);
    }
    SUBCASE("fixed-parameter mask") {
        const auto m = make_biexponential();
        const auto data = noiseless(m, biexp_design, Eigen::Vector2d(2, 1));
        FitOptions o;
        o.mask = ParameterMask(2);
        o.mask.fix(1, 1.0);
        const auto r = fit(m, data, Eigen::Vector2d(4.0, 7.0), o);
        CHECK(r.free_dimension == 1);
        CHECK(r.theta[1] == 1.0);
        CHECK(std::abs(r.theta[0] - 2.0) < 1e-6);
    }
    SUBCASE("start outside Θ") {
        const auto m = make_reciprocal();
        const auto data = noiseless(m, Design({0, 1}, 0.1), ParameterVector::Constant(1, 0.5));
        CHECK_THROWS_AS(fit(m, data, ParameterVector::Constant(1, -4.0)), OutOfBoundsError);
        FitOptions o;
        o.mask = ParameterMask(1);
        o.mask.fix(0, 5000.0);
        CHECK_THROWS_AS(fit(m, data, ParameterVector::Constant(1, 1.0), o), OutOfBoundsError);
    }
    SUBCASE("evaluation failures") {
        // Valid only below θ = 3; trial steps beyond are rejected.
        const auto m = Model::pointwise("edge", ParameterSpace({}, {0.1}, {10}), [](double t, const ParameterVector& th) {
            if (th[0] > 3.0) throw EvaluationError("outside valid region");
            return std::exp(-th[0] * t);
        });
        const Design d({0.5, 1.0, 2.0}, 0.01);
        const auto data = noiseless(m, d, ParameterVector::Constant(1, 2.9));
        const auto r = fit(m, data, ParameterVector::Constant(1, 0.2));
        CHECK(r.converged);
        CHECK(std::abs(r.theta[0] - 2.9) < 1e-6);
        const auto bad = fit(m, data, ParameterVector::Constant(1, 5.0));
        CHECK(bad.failed);
        CHECK(bad.reason == Termination::failure);
    }
}

TEST_CASE("LM invariants on built-ins") {
    const Design d({0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0}, 0.05);
    for (const auto& m : builtin_registry()) {
        if (m.label() == IdentifiabilityLabel::structurally_unidentifiable) continue;
        const ParameterVector truth = *m.reference_theta();
        const auto data = generate_data(m, d, truth, 4);
        FitOptions o;
        o.record_trace = true;
        const ParameterVector start = m.space().clamp(truth * 1.3 + ParameterVector::Constant(truth.size(), 0.05));
        const auto r = fit(m, data, start, o);
        CHECK_MESSAGE(r.converged, m.name());
        for (std::size_t k = 1; k < r.objective_trace.size(); ++k) CHECK(r.objective_trace[k] <= r.objective_trace[k - 1]);
        CHECK(r.objective <= r.objective_trace.front());
        CHECK(m.space().contains(r.theta));
        const Eigen::MatrixXd V = sensitivity(m, d, r.theta).entries;
        const Eigen::VectorXd gradient = V.transpose() * (data.replicate_means() - m.raw(d.times, r.theta));
        CHECK_MESSAGE(gradient.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + data.observations.norm()), m.name());
    }
}

TEST_CASE("fit agrees with closed-form least squares on linear models") {
    const auto m = make_polynomial_model(2);
    const Design d({0, 0.5, 1, 1.5, 2, 3}, 0.2, 2);
    const auto data = generate_data(m, d, Eigen::Vector3d(0.5, -1.0, 0.3), 8);
    const auto r = fit(m, data, Eigen::Vector3d::Zero());
    // Stack replicates to form the full regression problem.
    const Eigen::MatrixXd X1 = m.analytic_jacobian(d.times, Eigen::Vector3d::Zero());
    Eigen::MatrixXd X(12, 3);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 2; ++k) {
            X.row(2 * i + k) = X1.row(i);
            y[2 * i + k] = data.observations(i, k);
        }
    const auto ls = linear_least_squares(X, y);
    CHECK((r.theta - ls.theta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.sigma2_hat == doctest::Approx(ls.sigma2_hat).epsilon(1e-8));
}

TEST_CASE("sigma-squared estimate is unbiased with the n − p correction") {
    const auto m = make_biexponential();
    const Design d({0.1, 0.3, 0.6, 1.0, 1.5, 2.5}, 0.1);
    const Eigen::Vector2d truth(2, 1);
    double sum = 0.0;
    const int reps = 1000;
    for (int k = 0; k < reps; ++k) {
        const auto data = generate_data(m, d, truth, static_cast<std::uint64_t>(k));
        sum += fit(m, data, truth).sigma2_hat;
    }
    CHECK(sum / reps == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("latin hypercube starts") {
    const ParameterSpace s({}, {0, -1}, {1, 1});
    const auto pts = latin_hypercube(s, 16, 3);
    REQUIRE(pts.size() == 16);
    for (int j = 0; j < 2; ++j) {
        std::vector<int> strata(16, 0);
        for (const auto& p : pts) {
            const double u = (p[j] - s.lower(j)) / (s.upper(j) - s.lower(j));
            strata[static_cast<std::size_t>(std::min(15.0, std::floor(u * 16)))]++;
        }
        for (int c : strata) CHECK(c == 1);
    }
    const auto ordered = latin_hypercube(s.with_ordering({{0, 1}}), 32, 3);
    for (const auto& p : ordered) CHECK(p[0] > p[1]);
    CHECK(latin_hypercube(s, 16, 3)[5] == pts[5]);
}

TEST_CASE("multi-start clustering") {
    SUBCASE("linear problem has a single optimum") {
        const auto m = make_polynomial_model(1, 10.0);
        const auto data = generate_data(m, Design({0, 1, 2, 3}, 0.1), Eigen::Vector2d(1, 2), 1);
        MultiStartOptions o;
        o.starts = 8;
        const auto r = multi_start_fit(m, data, o);
        CHECK(r.clusters.size() == 1);
        CHECK(r.global_cluster_count() == 1);
    }
    SUBCASE("biexponential swap symmetry gives two permutation-related optima") {
        const auto m = make_biexponential();
        const auto data = noiseless(m, biexp_design, Eigen::Vector2d(2, 1));
        MultiStartOptions o;
        o.starts = 32;
        o.seed = 11;
        const auto r = multi_start_fit(m, data, o);
        REQUIRE(r.global_cluster_count() == 2);
        std::vector<const OptimumCluster*> global;
        for (const auto& c : r.clusters)
            if (c.global) global.push_back(&c);
        CHECK(std::abs(global[0]->objective - global[1]->objective) <= 1e-8);
        CHECK(parameters_tie(global[0]->theta, global[1]->theta.reverse(), 1e-3));
        for (std::size_t k = 1; k < r.results.size(); ++k) CHECK(r.results[k - 1].objective <= r.results[k].objective);

        const auto restricted = m.with_space(m.space().with_ordering({{0, 1}}));
        const auto rr = multi_start_fit(restricted, data, o);
        CHECK(rr.global_cluster_count() == 1);
        const auto& best = rr.best().theta;
        CHECK(std::abs(best[0] - 2.0) < 1e-6);
        CHECK(std::abs(best[1] - 1.0) < 1e-6);
    }
    SUBCASE("thread count does not change results") {
        const auto m = make_biexponential();
        const auto data = generate_data(m, biexp_design, Eigen::Vector2d(2, 1), 4);
        MultiStartOptions o;
        o.starts = 12;
        o.threads = 1;
        const auto a = multi_start_fit(m, data, o);
        o.threads = 4;
        const auto b = multi_start_fit(m, data, o);
        REQUIRE(a.results.size() == b.results.size());
        for (std::size_t k = 0; k < a.results.size(); ++k) {
            CHECK(a.results[k].theta == b.results[k].theta);
            CHECK(a.results[k].objective == b.results[k].objective);
        }
    }
    CHECK_THROWS_AS(multi_start_fit(make_reciprocal(), noiseless(make_reciprocal(), Design({0}, 1), ParameterVector::Constant(1, 1)),
                                    MultiStartOptions{0}),
                    PreconditionError);
}
