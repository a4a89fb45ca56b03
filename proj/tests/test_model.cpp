#include "identikit/builtins.hpp"
#include "identikit/model.hpp"
#include "identikit/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace identikit;

namespace {
ParameterVector vec(std::initializer_list<double> v) {
    ParameterVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}
} // namespace

TEST_CASE("parameter space membership and ordering") {
    ParameterSpace s({"a", "b"}, {0, 0}, {1, 1}, {{0, 1}});
    CHECK(s.contains(vec({0.6, 0.4})));
    CHECK_FALSE(s.contains(vec({0.4, 0.6})));
    CHECK_FALSE(s.contains(vec({1.5, 0.4})));
    CHECK(s.in_box(vec({0.4, 0.6})));
    CHECK_THROWS_AS(s.require(vec({0.4, 0.6})), OutOfBoundsError);
    CHECK_THROWS_AS(ParameterSpace({}, {1}, {0}), PreconditionError);
    CHECK_THROWS_AS(ParameterSpace({}, {0, 0}, {1, 1}, {{0, 0}}), PreconditionError);
    CHECK_THROWS_AS(ParameterSpace({}, {0, 0}, {1, 1}, {{0, 2}}), PreconditionError);
}

TEST_CASE("design invariants") {
    CHECK_NOTHROW(Design({0, 1, 2}, 0.1));
    CHECK_THROWS_AS(Design({}, 0.1), PreconditionError);
    CHECK_THROWS_AS(Design({0, 1}, 0.0), PreconditionError);
    CHECK_THROWS_AS(Design({0, 1}, -1.0), PreconditionError);
    CHECK_THROWS_AS(Design({0, 0}, 1.0), PreconditionError);
    CHECK_THROWS_AS(Design({0, 1}, 1.0, 0), PreconditionError);
}

TEST_CASE("evaluate built-ins at reference points") {
    const Design d({0.0, 0.5, 1.0}, 0.1);
    SUBCASE("reciprocal at θ=1 is 2 for every t") {
        const auto f = evaluate(make_reciprocal(), d, vec({1.0}));
        for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(f[i] == 2.0);
    }
    SUBCASE("biexponential at t=0 is 2") {
        const auto f = evaluate(make_biexponential(), d, vec({3.0, 0.2}));
        CHECK(f[0] == 2.0);
    }
    SUBCASE("logistic starts at x0") {
        const auto f = evaluate(make_logistic_ode(), d, vec({1.0, 1.0, 0.5}));
        CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-14));
        const auto exact = logistic_closed_form(d.times, vec({1.0, 1.0, 0.5}));
        for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(std::abs(f[i] - exact[i]) < 1e-8);
    }
    SUBCASE("out of bounds") {
        CHECK_THROWS_AS(evaluate(make_reciprocal(), d, vec({-1.0})), OutOfBoundsError);
        CHECK_THROWS_AS(evaluate(make_reciprocal(), d, vec({1.0, 2.0})), OutOfBoundsError);
    }
    SUBCASE("non-finite output is reported") {
        const auto bad = Model::pointwise("bad", ParameterSpace({}, {0}, {1}),
                                          [](double, const ParameterVector& th) { return std::log(th[0] - 0.5); });
        CHECK_THROWS_AS(evaluate(bad, d, vec({0.25})), EvaluationError);
    }
}

TEST_CASE("evaluation is pure") {
    const Design d({0.1, 0.7, 2.0, 5.0}, 0.1);
    for (const auto& m : builtin_registry()) {
        const ParameterVector th = *m.reference_theta();
        const auto a = evaluate(m, d, th);
        const auto b = evaluate(m, d, th);
        CHECK(a == b);
    }
}

TEST_CASE("biexponential swap symmetry and redundant exponential scaling") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.05, 5.0), t(0.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> times;
        double last = 0.0;
        for (int k = 0; k < 8; ++k) times.push_back(last += 0.01 + t(gen) / 8);
        const Design d(times, 1.0);
        const double a = u(gen), b = u(gen);
        const auto m = make_biexponential();
        CHECK(evaluate(m, d, vec({a, b})) == evaluate(m, d, vec({b, a})));

        const auto r = make_redundant_exponential();
        const double c = std::uniform_real_distribution<double>(-0.5, 0.5)(gen);
        const ParameterVector th = vec({2.0, -0.3, 0.4});
        const ParameterVector moved = vec({2.0 * std::exp(c), -0.3, 0.4 - c});
        const auto fa = evaluate(r, d, th), fb = evaluate(r, d, moved);
        for (Eigen::Index i = 0; i < fa.size(); ++i) CHECK(fa[i] == doctest::Approx(fb[i]).epsilon(1e-13));
    }
}

TEST_CASE("registry lookups") {
    CHECK(find_model("biexponential").label() == IdentifiabilityLabel::locally_not_globally);
    CHECK(find_model("redundant-exponential").label() == IdentifiabilityLabel::structurally_unidentifiable);
    CHECK(find_model("reciprocal").label() == IdentifiabilityLabel::globally_identifiable);
    CHECK(find_model("logistic").label() == IdentifiabilityLabel::globally_identifiable);
    CHECK(find_model("logistic").dimension() == 3);
    CHECK(find_model("linear", {{"degree", 2}}).dimension() == 3);
    CHECK_THROWS_AS(find_model("no-such-model"), NotFoundError);
    CHECK_THROWS_AS(find_model("reciprocal", {{"degree", 2}}), NotFoundError);
}

TEST_CASE("user-supplied linear design matrix") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 0, 1, 1, 1, 2;
    const auto m = make_linear_model({0.0, 1.0, 2.0}, X);
    const auto f = evaluate(m, Design({0.0, 1.0, 2.0}, 1.0), vec({1.0, 2.0}));
    CHECK(f == Eigen::Vector3d(1, 3, 5));
    CHECK_THROWS_AS(m.raw(std::vector<double>{0.5}, vec({1.0, 2.0})), EvaluationError);
}

TEST_CASE("generate_data") {
    const auto m = make_biexponential();
    const Design d({0.5, 1.0, 2.0}, 0.2, 3);
    const ParameterVector th = vec({2.0, 1.0});

    SUBCASE("deterministic under a seed") {
        const auto a = generate_data(m, d, th, 42), b = generate_data(m, d, th, 42);
        CHECK(a.observations == b.observations);
        CHECK(a.seed == 42);
        CHECK(*a.generating_theta == th);
        CHECK(a.observations.size() == d.observation_count());
        CHECK(generate_data(m, d, th, 43).observations != a.observations);
    }
    SUBCASE("vanishing noise") {
        const auto data = generate_data(m, d.with_noise(1e-12), th, 3);
        const auto f = evaluate(m, d, th);
        for (Eigen::Index i = 0; i < f.size(); ++i)
            for (int r = 0; r < 3; ++r) CHECK(std::abs(data.observations(i, r) - f[i]) < 1e-10);
    }
    SUBCASE("noise scales with sigma under a shared stream") {
        const auto f = evaluate(m, d, th);
        const auto lo = generate_data(m, d.with_noise(0.05), th, 9);
        const auto hi = generate_data(m, d.with_noise(0.2), th, 9);
        for (Eigen::Index i = 0; i < f.size(); ++i)
            for (int r = 0; r < 3; ++r) {
                const double ratio = (lo.observations(i, r) - f[i]) / (hi.observations(i, r) - f[i]);
                CHECK(ratio == doctest::Approx(0.25).epsilon(1e-9));
            }
    }
    SUBCASE("unbiased additive Gaussian noise") {
        const auto rec = make_reciprocal();
        const int reps = 100000;
        const double sigma = 0.3;
        const auto data = generate_data(rec, Design({1.0}, sigma, reps), vec({0.5}), 11);
        const double mean = data.observations.mean();
        CHECK(std::abs(mean - 3.0) < 4.0 * sigma / std::sqrt(double(reps)));
        const double var = (data.observations.array() - mean).square().sum() / (reps - 1);
        CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.02));
    }
}

TEST_CASE("counter rng streams") {
    const CounterRng a(1, 0), b(1, 1), c(2, 0);
    CHECK(a.bits(0) != b.bits(0));
    CHECK(a.bits(0) != c.bits(0));
    CHECK(a.uniform(5) == CounterRng(1, 0).uniform(5));
    double lo = 1, hi = 0;
    for (std::uint64_t k = 0; k < 10000; ++k) {
        lo = std::min(lo, a.uniform(k));
        hi = std::max(hi, a.uniform(k));
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
}
