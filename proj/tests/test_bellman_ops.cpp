#include "ciricdp/bellman_ops.hpp"
#include "ciricdp/errors.hpp"
#include "ciricdp/oracle_solvers.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ciricdp;
using testing::naive_policy_step;
using testing::scalar_mdp;

namespace {

// Long explicit series sum_{l<N} (1-lambda) lambda^l T_l + lambda^N T_N, T_l = F_mu^{l + shift} v.
ValueFunction brute_force_lambda(const FiniteMdp& mdp, const Policy& mu, const ValueFunction& v, double lambda,
                                 bool classical, std::size_t n_terms = 3000)
{
    ValueFunction t = classical ? naive_policy_step(mdp, mu, v) : v;
    std::vector<double> acc(v.size(), 0.0);
    double w = 1.0;
    for (std::size_t l = 0; l < n_terms; ++l) {
        for (std::size_t x = 0; x < acc.size(); ++x) {
            acc[x] += (1.0 - lambda) * w * t[x];
        }
        w *= lambda;
        t = naive_policy_step(mdp, mu, t);
    }
    for (std::size_t x = 0; x < acc.size(); ++x) {
        acc[x] += w * t[x];
    }
    return ValueFunction(std::move(acc));
}

LambdaOperatorConfig lam(double lambda, ExponentConvention c = ExponentConvention::classical_l_plus_1,
                         double tol = 1e-12)
{
    LambdaOperatorConfig cfg;
    cfg.lambda = lambda;
    cfg.convention = c;
    cfg.truncation_tol = tol;
    return cfg;
}

} // namespace

TEST_CASE("apply_policy_operator examples")
{
    const FiniteMdp mdp = scalar_mdp(1.0, 0.5);
    const Policy mu{{0}};
    CHECK(apply_policy_operator(mdp, mu, ValueFunction({0.0})) == ValueFunction({1.0}));
    CHECK(apply_policy_operator(mdp, mu, ValueFunction({2.0})) == ValueFunction({2.0}));
    CHECK_THROWS_AS(apply_policy_operator(mdp, Policy{{4}}, ValueFunction({0.0})), AdmissibilityError);

    std::mt19937_64 gen(1);
    const FiniteMdp rnd = random_mdp(7, 3, 0.9, 2);
    for (int i = 0; i < 20; ++i) {
        const Policy p = testing::random_policy(gen, rnd.controls());
        const auto v = testing::random_value(gen, 7);
        CHECK(apply_policy_operator(rnd, p, apply_policy_operator(rnd, p, v)) == apply_power(rnd, p, v, 2));
        CHECK(max_abs_deviation(apply_policy_operator(rnd, p, v), naive_policy_step(rnd, p, v)) <= 1e-14);
    }
}

TEST_CASE("apply_power examples")
{
    const FiniteMdp mdp = scalar_mdp(1.0, 0.5);
    const Policy mu{{0}};
    const ValueFunction v({0.0});
    CHECK(apply_power(mdp, mu, v, 0) == v);
    CHECK(apply_power(mdp, mu, v, 1) == apply_policy_operator(mdp, mu, v));
    CHECK(apply_power(mdp, mu, v, 3) == ValueFunction({1.75}));
}

TEST_CASE("apply_optimality_operator examples")
{
    SUBCASE("cheaper control wins")
    {
        const FiniteMdp mdp({{Action{0, 1.0, {0.5, 0.5}}, Action{1, 2.0, {0.5, 0.5}}}, {Action{0, 0.0, {0.0, 1.0}}}},
                            0.9);
        const auto r = apply_optimality_operator(mdp, ValueFunction({0.0, 0.0}));
        CHECK(r.policy[0] == 0);
        CHECK(r.value == ValueFunction({1.0, 0.0}));
    }
    SUBCASE("singleton control sets")
    {
        const FiniteMdp mdp = random_mdp(5, 1, 0.7, 3);
        std::mt19937_64 gen(2);
        const auto v = testing::random_value(gen, 5);
        const auto r = apply_optimality_operator(mdp, v);
        CHECK(r.value == apply_policy_operator(mdp, Policy{std::vector<Control>(5, 0)}, v));
    }
    SUBCASE("ties go to the lowest identifier")
    {
        const FiniteMdp mdp({{Action{3, 1.0, {1.0}}, Action{1, 1.0, {1.0}}, Action{2, 1.5, {1.0}}}}, 0.5);
        CHECK(apply_optimality_operator(mdp, ValueFunction({0.0})).policy[0] == 1);
    }
    SUBCASE("greedy policy reproduces FV exactly")
    {
        const FiniteMdp mdp = random_mdp(12, 4, 0.95, 9);
        std::mt19937_64 gen(3);
        for (int i = 0; i < 50; ++i) {
            const auto v = testing::random_value(gen, 12);
            const auto r = apply_optimality_operator(mdp, v);
            CHECK(apply_policy_operator(mdp, r.policy, v) == r.value);
        }
    }
}

TEST_CASE("lambda-operator examples")
{
    const FiniteMdp mdp = random_mdp(6, 2, 0.9, 5);
    std::mt19937_64 gen(4);
    const Policy mu = testing::random_policy(gen, mdp.controls());
    const auto v = testing::random_value(gen, 6);

    CHECK(apply_lambda_operator(mdp, mu, v, lam(0.0, ExponentConvention::paper_l)).value == v);
    CHECK(apply_lambda_operator(mdp, mu, v, lam(0.0)).value == apply_policy_operator(mdp, mu, v));

    const ValueFunction v_mu = exact_policy_value(mdp, mu);
    for (auto c : {ExponentConvention::paper_l, ExponentConvention::classical_l_plus_1}) {
        for (double l : {0.3, 0.5, 0.9}) {
            const auto r = apply_lambda_operator(mdp, mu, v_mu, lam(l, c));
            CHECK(weighted_distance(r.value, v_mu, mdp.weights()) <= 1e-12);
        }
    }
}

TEST_CASE("lambda-operator truncation stays within its tail bound")
{
    std::mt19937_64 gen(8);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const FiniteMdp mdp = random_mdp(8, 3, 0.9, seed);
        for (auto c : {ExponentConvention::paper_l, ExponentConvention::classical_l_plus_1}) {
            for (double l : {0.2, 0.5, 0.7, 0.9}) {
                const Policy mu = testing::random_policy(gen, mdp.controls());
                const auto v = testing::random_value(gen, 8);
                const auto r = apply_lambda_operator(mdp, mu, v, lam(l, c, 1e-6));
                const auto exact = brute_force_lambda(mdp, mu, v, l, c == ExponentConvention::classical_l_plus_1);
                CHECK_FALSE(r.hit_term_cap);
                CHECK(r.tail_bound <= 1e-6);
                CHECK(weighted_distance(r.value, exact, mdp.weights()) <= r.tail_bound + 1e-12);

                const auto tight = apply_lambda_operator(mdp, mu, v, lam(l, c, 1e-12));
                CHECK(weighted_distance(tight.value, exact, mdp.weights()) <= 1e-10);
            }
        }
    }
}

TEST_CASE("lambda-operator term cap raises a warning, not an error")
{
    const FiniteMdp mdp = random_mdp(4, 2, 0.9, 1);
    LambdaOperatorConfig cfg = lam(0.9);
    cfg.max_terms = 3;
    const auto r = apply_lambda_operator(mdp, Policy{{0, 0, 0, 0}}, ValueFunction::zeros(4), cfg);
    CHECK(r.hit_term_cap);
    CHECK(r.terms == 3);
    CHECK(r.tail_bound > cfg.truncation_tol);
}

TEST_CASE("lambda-operator config validation")
{
    const FiniteMdp mdp = scalar_mdp();
    const Policy mu{{0}};
    const ValueFunction v({0.0});
    CHECK_THROWS_AS(apply_lambda_operator(mdp, mu, v, lam(1.0)), DomainError);
    CHECK_THROWS_AS(apply_lambda_operator(mdp, mu, v, lam(-0.1)), DomainError);
    CHECK_THROWS_AS(apply_lambda_operator(mdp, mu, v, lam(0.5, ExponentConvention::paper_l, 0.0)), DomainError);
    LambdaOperatorConfig cfg = lam(0.5);
    cfg.max_terms = 0;
    CHECK_THROWS_AS(apply_lambda_operator(mdp, mu, v, cfg), DomainError);
}

TEST_CASE("lambda-operator is a contraction with the series modulus")
{
    std::mt19937_64 gen(21);
    const FiniteMdp mdp = random_mdp(10, 3, 0.9, 6);
    const double k = mdp.contraction_modulus();
    for (auto c : {ExponentConvention::classical_l_plus_1, ExponentConvention::paper_l}) {
        for (double l : {0.3, 0.5, 0.9}) {
            const Policy mu = testing::random_policy(gen, mdp.controls());
            const Operator op = lambda_operator(mdp, mu, lam(l, c));
            const double m = lambda_operator_modulus(l, k, c);
            for (int i = 0; i < 100; ++i) {
                const auto v = testing::random_value(gen, 10);
                const auto vp = testing::random_value(gen, 10);
                const auto cmp = ciric_comparison(op, mdp.weights(), v, vp);
                CHECK(cmp.lhs <= m * cmp.max_candidate() + 1e-9);
                CHECK(cmp.lhs <= m * cmp.d_v_vp + 1e-9);
            }
        }
    }
}

TEST_CASE("lambda-operator is monotone and commutes with F_mu")
{
    std::mt19937_64 gen(22);
    const FiniteMdp mdp = random_mdp(10, 3, 0.9, 7);
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    for (double l : {0.3, 0.5, 0.9}) {
        const auto cfg = lam(l);
        for (int i = 0; i < 50; ++i) {
            const Policy mu = testing::random_policy(gen, mdp.controls());
            const auto v = testing::random_value(gen, 10);
            std::vector<double> up(v.values().begin(), v.values().end());
            for (double& e : up) {
                e += bump(gen);
            }
            const ValueFunction vp(up);
            const auto a = apply_lambda_operator(mdp, mu, v, cfg).value;
            const auto b = apply_lambda_operator(mdp, mu, vp, cfg).value;
            CHECK(pointwise_leq(a, shift_by_weight(b, cfg.truncation_tol, mdp.weights())));

            const auto lhs = apply_policy_operator(mdp, mu, a);
            const auto rhs = apply_lambda_operator(mdp, mu, apply_policy_operator(mdp, mu, v), cfg).value;
            CHECK(weighted_distance(lhs, rhs, mdp.weights()) <= 2.0 * cfg.truncation_tol);
        }
    }
}

TEST_CASE("ciric_comparison examples")
{
    const FiniteMdp mdp = random_mdp(6, 2, 0.9, 8);
    std::mt19937_64 gen(23);
    const Policy mu = testing::random_policy(gen, mdp.controls());
    const Operator f_mu = policy_operator(mdp, mu);
    const auto& nu = mdp.weights();

    SUBCASE("identical inputs at a fixed point")
    {
        const auto v_mu = exact_policy_value(mdp, mu);
        const Operator id = [](const ValueFunction& v) { return v; };
        const auto c = ciric_comparison(id, nu, v_mu, v_mu);
        CHECK(c.lhs == 0.0);
        CHECK(c.max_candidate() == 0.0);
        CHECK_FALSE(c.ratio().has_value());
    }
    SUBCASE("substituting V' = F_mu V")
    {
        const auto v = testing::random_value(gen, 6);
        const auto vp = apply_policy_operator(mdp, mu, v);
        const auto c = ciric_comparison(f_mu, nu, v, vp);
        CHECK(c.d_vp_tvp == weighted_distance(vp, apply_power(mdp, mu, v, 2), nu));
        CHECK(c.half_sum == doctest::Approx(0.5 * (c.d_v_tvp + c.d_vp_tv)));
    }
    SUBCASE("ratio never exceeds alpha for F and F_mu")
    {
        const Operator f = optimality_operator(mdp);
        for (int i = 0; i < 1000; ++i) {
            const auto v = testing::random_value(gen, 6);
            const auto vp = testing::random_value(gen, 6);
            CHECK(*ciric_comparison(f, nu, v, vp).ratio() <= 0.9 + 1e-12);
            CHECK(*ciric_comparison(f_mu, nu, v, vp).ratio() <= 0.9 + 1e-12);
        }
    }
}

TEST_CASE("gamma_bound_constant")
{
    CHECK(gamma_bound_constant(0.5) == 2.0);
    CHECK(gamma_bound_constant(0.25) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(gamma_bound_constant(1e-12) == doctest::Approx(1.0));
    CHECK(gamma_bound_constant(0.9) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK_THROWS_AS(gamma_bound_constant(0.0), DomainError);
    CHECK_THROWS_AS(gamma_bound_constant(1.0), DomainError);
    // The 1/(1 - sigma) branch dominates on (0, 1); the max is kept as written.
    for (int i = 1; i < 1000; ++i) {
        const double s = i / 1000.0;
        CHECK(1.0 / (1.0 - s) >= (2.0 - s) / (2.0 - 2.0 * s));
        CHECK(gamma_bound_constant(s) == 1.0 / (1.0 - s));
    }
}

TEST_CASE("rho_modulus")
{
    CHECK(rho_modulus(0.5, 0.9) == doctest::Approx(0.45 * 0.5 / 0.55).epsilon(1e-15));
    CHECK(rho_modulus(0.5, 0.9) == doctest::Approx(0.40909090909090909).epsilon(1e-15));
    double partial = 0.0;
    for (int l = 1; l <= 50; ++l) {
        partial += 0.5 * std::pow(0.5, l) * std::pow(0.9, l);
    }
    CHECK(std::abs(partial - rho_modulus(0.5, 0.9)) < 1e-12);
    CHECK(rho_modulus(0.0, 0.7) == 0.0);
    for (int i = 0; i < 10; ++i) {
        for (int j = 1; j < 10; ++j) {
            const double r = rho_modulus(i / 10.0, j / 10.0);
            CHECK(r >= 0.0);
            CHECK(r < 1.0);
        }
    }
    CHECK_THROWS_AS(rho_modulus(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(rho_modulus(0.5, 1.0), DomainError);
    CHECK_THROWS_AS(rho_modulus(0.5, 0.0), DomainError);
}

TEST_CASE("lambda_operator_modulus")
{
    CHECK(lambda_operator_modulus(0.0, 0.9, ExponentConvention::classical_l_plus_1) == doctest::Approx(0.9));
    CHECK(lambda_operator_modulus(0.5, 0.9, ExponentConvention::classical_l_plus_1) ==
          doctest::Approx(0.9 * 0.5 / 0.55));
    CHECK(lambda_operator_modulus(0.5, 0.9, ExponentConvention::paper_l) == doctest::Approx(0.5 / 0.55));
    CHECK(lambda_operator_modulus(0.0, 0.9, ExponentConvention::paper_l) == 1.0);
}

TEST_CASE("certified_error_bound")
{
    SUBCASE("tight on the scalar model")
    {
        const FiniteMdp mdp = scalar_mdp(1.0, 0.5);
        CHECK(certified_error_bound(mdp, ValueFunction({0.0}), OptimalTarget{}, 0.5) == 2.0);
        CHECK(certified_error_bound(mdp, ValueFunction({0.0}), PolicyTarget{Policy{{0}}}, 0.5) == 2.0);
    }
    SUBCASE("vanishes at the fixed point")
    {
        const FiniteMdp mdp = random_mdp(8, 3, 0.9, 2);
        const auto pi = policy_iteration(mdp);
        CHECK(certified_error_bound(mdp, pi.value, OptimalTarget{}, 0.9) <= 1e-12);
    }
    SUBCASE("never below the true error")
    {
        const FiniteMdp mdp = random_mdp(20, 4, 0.9, 1);
        const auto v_star = policy_iteration(mdp).value;
        std::mt19937_64 gen(31);
        for (int i = 0; i < 1000; ++i) {
            const auto v = testing::random_around(gen, v_star, 10.0);
            CHECK(weighted_distance(v_star, v, mdp.weights()) <=
                  certified_error_bound(mdp, v, OptimalTarget{}, 0.9) + 1e-12);
        }
    }
    SUBCASE("domain errors")
    {
        CHECK_THROWS_AS(certified_error_bound(scalar_mdp(), ValueFunction({0.0}), OptimalTarget{}, 1.5), DomainError);
    }
}

TEST_CASE("epsilon-optimal policies from near-greedy selection")
{
    // Control 1 copies control 0's transitions at cost + delta, so choosing it
    // everywhere costs exactly delta / (1 - alpha) over V*.
    const double alpha = 0.9;
    const double epsilon = 1e-3;
    const double delta = epsilon * (1.0 - alpha);
    std::vector<std::vector<Action>> actions(3);
    const FiniteMdp base = random_mdp(3, 1, alpha, 12);
    for (std::size_t x = 0; x < 3; ++x) {
        const auto& a = base.actions(x)[0];
        actions[x] = {Action{0, a.cost, a.transition}, Action{1, a.cost + delta * 0.999999, a.transition}};
    }
    const FiniteMdp mdp(std::move(actions), alpha);
    const auto v_star = policy_iteration(mdp).value;

    const Policy mu_eps = epsilon_optimal_policy(mdp, v_star, epsilon, alpha);
    CHECK(mu_eps == Policy{{1, 1, 1}});
    const auto v_eps = exact_policy_value(mdp, mu_eps);
    CHECK(weighted_distance(v_eps, v_star, mdp.weights()) <= epsilon);
    CHECK(weighted_distance(v_eps, v_star, mdp.weights()) >= 0.99 * epsilon);

    // With slack epsilon alone the near-greedy choice can be off by gamma * epsilon.
    std::vector<std::vector<Action>> wide(3);
    for (std::size_t x = 0; x < 3; ++x) {
        const auto& a = base.actions(x)[0];
        wide[x] = {Action{0, a.cost, a.transition}, Action{1, a.cost + 0.999 * epsilon, a.transition}};
    }
    const FiniteMdp loose(std::move(wide), alpha);
    const auto loose_star = policy_iteration(loose).value;
    const auto loose_mu = near_greedy_policy(loose, loose_star, epsilon);
    CHECK(weighted_distance(exact_policy_value(loose, loose_mu), loose_star, loose.weights()) > epsilon);
    CHECK(epsilon_optimal_policy(loose, loose_star, epsilon, alpha) == Policy{{0, 0, 0}});

    CHECK(near_greedy_policy(mdp, v_star, 0.0) == Policy{{0, 0, 0}});
    CHECK_THROWS_AS(near_greedy_policy(mdp, v_star, -1.0), DomainError);
}
