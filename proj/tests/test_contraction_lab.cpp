#include "ciricdp/contraction_lab.hpp"
#include "ciricdp/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

using namespace ciricdp;

namespace {

ScalarMap linear_map(double c, double lo = 0.0, double hi = 1.0)
{
    ScalarMap m([c](double x) { return c * x; }, lo, hi);
    m.known_modulus = std::abs(c);
    m.known_fixed_point = 0.0;
    return m;
}

ScalarSampler small_sampler(std::uint64_t seed = 0, std::size_t n = 2000)
{
    ScalarSampler s;
    s.random_pairs = n;
    s.seed = seed;
    s.grid_points = 17;
    return s;
}

// Quasi-Ciric ratio of one pair computed from the piecewise definition.
double quasi_ratio_by_hand(double x, double y)
{
    auto t = [](double v) { return v <= 1.0 ? v / 4.0 : v / 5.0; };
    const double rhs = std::max({std::abs(x - y), std::abs(x - t(y)), std::abs(y - t(x))});
    return std::abs(t(x) - t(y)) / rhs;
}

} // namespace

TEST_CASE("example1_map examples")
{
    const ScalarMap t = example1_map();
    CHECK(t(0.5) == 0.125);
    CHECK(t(2.0) == 0.4);
    CHECK(t(1.0) == 0.25);
    CHECK(t(std::nextafter(1.0, 2.0)) == doctest::Approx(0.2));
    CHECK(t(1.0 + 1e-9) == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(t(0.0) == 0.0);
    CHECK(t.known_fixed_point == 0.0);
    CHECK(t.known_modulus == 0.25);
    REQUIRE(t.discontinuities.size() == 1);
    CHECK(t.discontinuities[0] == 1.0);
    CHECK_THROWS_AS(t(-0.1), DomainError);
    CHECK_THROWS_AS(t(2.0001), DomainError);
    CHECK_THROWS_AS(t(std::nan("")), DomainError);
    for (int i = 0; i <= 200; ++i) {
        const double y = t(i / 100.0);
        CHECK(y >= 0.0);
        CHECK(y <= 2.0);
    }
}

TEST_CASE("contraction class names round-trip")
{
    for (auto c : {ContractionClass::banach, ContractionClass::ciric_halfsum, ContractionClass::ciric_quasi}) {
        CHECK(parse_contraction_class(to_string(c)) == c);
    }
    CHECK_THROWS_AS(parse_contraction_class("kannan"), ParseError);
}

TEST_CASE("example1 fails the Banach condition across the jump")
{
    const ScalarMap t = example1_map();
    for (double gamma : {0.9, 0.99, 0.999}) {
        ScalarSampler s = small_sampler();
        s.extra_pairs = {{1.0, 1.0 + 1e-3}, {1.0, 1.0 + 1e-6}};
        const auto r = check_contraction(t, ContractionClass::banach, gamma, s);
        CHECK(r.violations > 0);
        CHECK_FALSE(r.passed());
        REQUIRE(r.first_violation.has_value());
        CHECK(r.max_ratio > 1000.0);
    }
    // Only the forced pairs: the uniform sample and grid alone would not be needed.
    ScalarSampler forced;
    forced.random_pairs = 0;
    forced.grid_points = 0;
    forced.straddle_discontinuities = false;
    forced.extra_pairs = {{1.0, 1.0 + 1e-6}};
    const auto r = check_contraction(t, ContractionClass::banach, 0.99, forced);
    CHECK(r.violations == 1);
    CHECK(r.max_ratio == doctest::Approx((0.25 - (1.0 + 1e-6) / 5.0) / 1e-6).epsilon(1e-9));
}

TEST_CASE("example1 satisfies the quasi form with modulus 1/4")
{
    ScalarSampler s;
    s.random_pairs = 100000;
    s.seed = 42;
    const auto r = check_contraction(example1_map(), ContractionClass::ciric_quasi, 0.25, s);
    CHECK(r.violations == 0);
    CHECK(r.samples + r.skipped == 100000 + 65 * 64 / 2 + 12);
    CHECK(r.max_ratio > 0.0);
    CHECK(r.max_ratio <= 0.25 + 1e-12);
    CHECK(quasi_ratio_by_hand(r.worst_pair.first, r.worst_pair.second) == doctest::Approx(r.max_ratio));

    CHECK(quasi_ratio_by_hand(1.0, 1.0 + 1e-6) == doctest::Approx(1.0 / 16.0).epsilon(1e-5));
    CHECK(quasi_ratio_by_hand(0.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("example1 half-sum form is measured separately")
{
    ScalarSampler s = small_sampler(3, 20000);
    const auto halfsum = check_contraction(example1_map(), ContractionClass::ciric_halfsum, 0.25, s);
    const auto quasi = check_contraction(example1_map(), ContractionClass::ciric_quasi, 0.25, s);
    CHECK(halfsum.samples == quasi.samples);
    CHECK(halfsum.max_ratio > 0.0);
    CHECK(halfsum.max_ratio < 1.0);
}

TEST_CASE("identity and constant maps")
{
    const ScalarMap id([](double x) { return x; }, 0.0, 1.0);
    const ScalarMap constant([](double) { return 0.3; }, 0.0, 1.0);
    const ScalarSampler s = small_sampler();
    for (auto c : {ContractionClass::banach, ContractionClass::ciric_halfsum, ContractionClass::ciric_quasi}) {
        CHECK(estimate_modulus(constant, c, s) == 0.0);
        CHECK(check_contraction(constant, c, 0.5, s).violations == 0);
    }
    CHECK(estimate_modulus(id, ContractionClass::banach, s) == doctest::Approx(1.0));
    CHECK(estimate_modulus(id, ContractionClass::ciric_quasi, s) == doctest::Approx(1.0));
    CHECK(check_contraction(id, ContractionClass::banach, 0.9, s).violations > 0);
}

TEST_CASE("estimate_modulus of linear maps")
{
    for (double c : {0.1, 0.25, 0.5, 0.9}) {
        const ScalarMap m = linear_map(c);
        CHECK(std::abs(estimate_modulus(m, ContractionClass::banach, small_sampler()) - c) <= 1e-9);
        const auto r = check_contraction(m, ContractionClass::banach, c, small_sampler());
        CHECK(r.violations == 0);
    }
    const ScalarMap e1 = example1_map();
    const double q = estimate_modulus(e1, ContractionClass::ciric_quasi, small_sampler());
    CHECK(q > 0.0);
    CHECK(q <= 0.25 + 1e-9);
}

TEST_CASE("estimate_modulus is monotone on nested samples")
{
    const ScalarMap m = example1_map();
    double prev = 0.0;
    for (std::size_t n : {10, 100, 1000, 10000}) {
        ScalarSampler s;
        s.random_pairs = n;
        s.seed = 9;
        s.grid_points = 0;
        s.straddle_discontinuities = false;
        const double est = estimate_modulus(m, ContractionClass::ciric_quasi, s);
        CHECK(est >= prev);
        prev = est;
    }
}

TEST_CASE("check_contraction is deterministic and validates its inputs")
{
    const ScalarMap m = example1_map();
    const auto a = check_contraction(m, ContractionClass::ciric_quasi, 0.25, small_sampler(5));
    const auto b = check_contraction(m, ContractionClass::ciric_quasi, 0.25, small_sampler(5));
    CHECK(a.max_ratio == b.max_ratio);
    CHECK(a.worst_pair == b.worst_pair);
    CHECK(a.samples == b.samples);

    CHECK_THROWS_AS(check_contraction(m, ContractionClass::banach, 0.0, small_sampler()), DomainError);
    CHECK_THROWS_AS(check_contraction(m, ContractionClass::banach, 1.0, small_sampler()), DomainError);

    ScalarSampler empty;
    empty.random_pairs = 0;
    empty.grid_points = 0;
    empty.straddle_discontinuities = false;
    CHECK_THROWS_AS(check_contraction(m, ContractionClass::banach, 0.5, empty), SamplingError);
    empty.extra_pairs = {{0.0, 0.0}, {0.7, 0.7}};
    const ScalarMap id([](double x) { return x; }, 0.0, 1.0);
    CHECK_THROWS_AS(check_contraction(id, ContractionClass::banach, 0.5, empty), SamplingError);

    ScalarSampler outside = empty;
    outside.extra_pairs = {{0.5, 3.0}};
    CHECK_THROWS_AS(check_contraction(m, ContractionClass::banach, 0.5, outside), DomainError);
}

TEST_CASE("zero-denominator pairs are skipped")
{
    ScalarSampler s;
    s.random_pairs = 0;
    s.grid_points = 0;
    s.straddle_discontinuities = false;
    s.extra_pairs = {{0.0, 0.0}, {0.0, 0.5}, {0.0, 0.0}};
    const auto r = check_contraction(example1_map(), ContractionClass::ciric_quasi, 0.25, s);
    CHECK(r.skipped == 2);
    CHECK(r.samples == 1);
    CHECK(r.worst_index == 1);
}

TEST_CASE("operator contraction checks on an MDP")
{
    const FiniteMdp mdp = random_mdp(6, 3, 0.8, 4);
    VectorSampler s;
    s.pairs = 2000;
    s.seed = 1;
    const auto r = check_contraction(optimality_operator(mdp), mdp.weights(), ContractionClass::ciric_halfsum, 0.8, s);
    CHECK(r.violations == 0);
    CHECK(r.samples == 2000);
    CHECK(r.max_ratio <= 0.8 + 1e-12);
    const auto banach = check_contraction(optimality_operator(mdp), mdp.weights(), ContractionClass::banach, 0.8, s);
    CHECK(banach.violations == 0);
    CHECK(estimate_modulus(optimality_operator(mdp), mdp.weights(), ContractionClass::banach, s) ==
          banach.max_ratio);
    CHECK_THROWS_AS(check_contraction(optimality_operator(mdp), mdp.weights(), ContractionClass::banach, 0.8,
                                      VectorSampler{0, 1, -1.0, 1.0}),
                    SamplingError);
}

TEST_CASE("report_to_json")
{
    const auto r = check_contraction(example1_map(), ContractionClass::ciric_quasi, 0.25, small_sampler());
    const auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j.at("class") == "ciric_quasi");
    CHECK(j.at("modulus") == 0.25);
    CHECK(j.at("samples") == r.samples);
    CHECK(j.at("max_ratio") == r.max_ratio);
    CHECK(j.at("violations") == 0);
    CHECK(j.at("worst_pair").size() == 2);
}

TEST_CASE("iterate_to_fixed_point")
{
    const ScalarMap t = example1_map();
    SUBCASE("example1 from 2")
    {
        const auto run = iterate_to_fixed_point(t, 2.0, 1e-12, 200);
        CHECK(run.converged);
        CHECK(std::abs(run.x_star) <= 4e-12);
        REQUIRE(run.trajectory.size() >= 4);
        CHECK(run.trajectory[0] == 2.0);
        CHECK(run.trajectory[1] == 0.4);
        CHECK(run.trajectory[2] == 0.1);
        CHECK(run.trajectory[3] == 0.025);
        CHECK(run.trajectory.size() == run.iterations + 1);
    }
    SUBCASE("fixed point start")
    {
        const auto run = iterate_to_fixed_point(t, 0.0, 1e-12, 200);
        CHECK(run.converged);
        CHECK(run.iterations == 0);
        CHECK(run.x_star == 0.0);
    }
    SUBCASE("geometric trajectory")
    {
        const auto run = iterate_to_fixed_point(linear_map(0.25), 1.0, 1e-12, 200);
        CHECK(run.converged);
        for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
            CHECK(run.trajectory[i] == std::pow(0.25, static_cast<double>(i)));
        }
    }
    SUBCASE("grid of starts")
    {
        for (int i = 0; i <= 64; ++i) {
            const auto run = iterate_to_fixed_point(t, 2.0 * i / 64.0, 1e-12, 200);
            CHECK(run.converged);
            CHECK(std::abs(run.x_star) <= 1e-12);
        }
    }
    SUBCASE("nonconvergence is reported")
    {
        const auto run = iterate_to_fixed_point(t, 2.0, 1e-12, 3);
        CHECK_FALSE(run.converged);
        CHECK(run.iterations == 3);
        CHECK_THROWS_AS((void)iterate_to_fixed_point(t, 2.0, 0.0, 3), DomainError);
        CHECK_THROWS_AS((void)iterate_to_fixed_point(t, 5.0, 1e-12, 3), DomainError);
    }
}
