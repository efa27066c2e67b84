#include "ciricdp/bellman_ops.hpp"

#include "ciricdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

namespace ciricdp {

namespace {

void require_model_size(const DpModel& model, const ValueFunction& v)
{
    if (v.size() != model.n_states()) {
        throw DimensionError("value function has " + std::to_string(v.size()) + " entries, model has " +
                             std::to_string(model.n_states()) + " states");
    }
}

ValueFunction apply_indexed(const DpModel& model, const std::vector<std::size_t>& idx, const ValueFunction& v)
{
    std::vector<double> out(model.n_states());
    for (std::size_t x = 0; x < out.size(); ++x) {
        out[x] = model.evaluate_at(x, idx[x], v);
    }
    return ValueFunction(std::move(out));
}

// acc += c * t
void axpy(std::vector<double>& acc, double c, const ValueFunction& t)
{
    for (std::size_t x = 0; x < acc.size(); ++x) {
        acc[x] += c * t[x];
    }
}

} // namespace

void LambdaOperatorConfig::validate() const
{
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in [0, 1), got " + std::to_string(lambda));
    }
    if (!(truncation_tol > 0.0)) {
        throw DomainError("truncation_tol must be positive");
    }
    if (max_terms == 0) {
        throw DomainError("max_terms must be at least 1");
    }
}

ValueFunction apply_policy_operator(const DpModel& model, const Policy& mu, const ValueFunction& v)
{
    require_model_size(model, v);
    return apply_indexed(model, policy_indices(model.controls(), mu), v);
}

GreedyResult apply_optimality_operator(const DpModel& model, const ValueFunction& v)
{
    require_model_size(model, v);
    const std::size_t n = model.n_states();
    std::vector<double> best(n);
    Policy mu{std::vector<Control>(n)};
    for (std::size_t x = 0; x < n; ++x) {
        const auto controls = model.controls().at(x);
        double best_h = std::numeric_limits<double>::infinity();
        Control best_u = 0;
        for (std::size_t i = 0; i < controls.size(); ++i) {
            const double h = model.evaluate_at(x, i, v);
            if (h < best_h || (h == best_h && controls[i] < best_u)) {
                best_h = h;
                best_u = controls[i];
            }
        }
        best[x] = best_h;
        mu.choice[x] = best_u;
    }
    return {ValueFunction(std::move(best)), std::move(mu)};
}

ValueFunction apply_power(const DpModel& model, const Policy& mu, const ValueFunction& v, std::size_t l)
{
    require_model_size(model, v);
    const auto idx = policy_indices(model.controls(), mu);
    ValueFunction cur = v;
    for (std::size_t i = 0; i < l; ++i) {
        cur = apply_indexed(model, idx, cur);
    }
    return cur;
}

LambdaResult apply_lambda_operator(const DpModel& model, const Policy& mu, const ValueFunction& v,
                                   const LambdaOperatorConfig& cfg)
{
    cfg.validate();
    require_model_size(model, v);
    const auto idx = policy_indices(model.controls(), mu);
    const auto& nu = model.weights();
    const double lambda = cfg.lambda;
    const double lk = lambda * model.contraction_modulus();
    const bool classical = cfg.convention == ExponentConvention::classical_l_plus_1;

    std::optional<ValueFunction> prev;
    ValueFunction cur = v;
    if (classical) {
        prev = v;
        cur = apply_indexed(model, idx, v);
    }

    std::vector<double> acc(model.n_states(), 0.0);
    double lambda_pow = 1.0;  // lambda^l
    LambdaResult result{ValueFunction::zeros(model.n_states())};
    for (std::size_t l = 0;; ++l) {
        double bound = std::numeric_limits<double>::infinity();
        if (lambda == 0.0) {
            bound = 0.0;
        } else if (prev && lk < 1.0) {
            bound = lambda_pow * lambda * weighted_distance(cur, *prev, nu) / (1.0 - lk);
        }
        const bool converged = bound <= cfg.truncation_tol;
        if (converged || l + 1 >= cfg.max_terms) {
            axpy(acc, lambda_pow, cur);
            result.value = ValueFunction(std::move(acc));
            result.terms = l + 1;
            result.tail_bound = bound;
            result.hit_term_cap = !converged;
            return result;
        }
        axpy(acc, (1.0 - lambda) * lambda_pow, cur);
        lambda_pow *= lambda;
        prev = std::move(cur);
        cur = apply_indexed(model, idx, *prev);
    }
}

Operator policy_operator(const DpModel& model, Policy mu)
{
    return [&model, mu = std::move(mu)](const ValueFunction& v) { return apply_policy_operator(model, mu, v); };
}

Operator optimality_operator(const DpModel& model)
{
    return [&model](const ValueFunction& v) { return apply_optimality_operator(model, v).value; };
}

Operator lambda_operator(const DpModel& model, Policy mu, LambdaOperatorConfig cfg)
{
    cfg.validate();
    return [&model, mu = std::move(mu), cfg](const ValueFunction& v) {
        return apply_lambda_operator(model, mu, v, cfg).value;
    };
}

double CiricComparison::max_candidate() const noexcept
{
    return std::max({d_v_vp, d_v_tv, d_vp_tvp, half_sum});
}

std::optional<double> CiricComparison::ratio() const noexcept
{
    const double m = max_candidate();
    if (!(m > 0.0)) {
        return std::nullopt;
    }
    return lhs / m;
}

CiricComparison ciric_comparison(const Operator& op, const WeightFunction& nu, const ValueFunction& v,
                                 const ValueFunction& v_prime)
{
    const ValueFunction tv = op(v);
    const ValueFunction tvp = op(v_prime);
    CiricComparison c;
    c.lhs = weighted_distance(tv, tvp, nu);
    c.d_v_vp = weighted_distance(v, v_prime, nu);
    c.d_v_tv = weighted_distance(v, tv, nu);
    c.d_vp_tvp = weighted_distance(v_prime, tvp, nu);
    c.d_v_tvp = weighted_distance(v, tvp, nu);
    c.d_vp_tv = weighted_distance(v_prime, tv, nu);
    c.half_sum = 0.5 * (c.d_v_tvp + c.d_vp_tv);
    return c;
}

double gamma_bound_constant(double sigma)
{
    if (!(sigma > 0.0 && sigma < 1.0)) {
        throw DomainError("sigma must lie in (0, 1), got " + std::to_string(sigma));
    }
    return std::max((2.0 - sigma) / (2.0 - 2.0 * sigma), 1.0 / (1.0 - sigma));
}

double rho_modulus(double lambda, double k)
{
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in [0, 1), got " + std::to_string(lambda));
    }
    if (!(k > 0.0 && k < 1.0)) {
        throw DomainError("k must lie in (0, 1), got " + std::to_string(k));
    }
    return (1.0 - lambda) * lambda * k / (1.0 - lambda * k);
}

double lambda_operator_modulus(double lambda, double k, ExponentConvention convention)
{
    const double rho = rho_modulus(lambda, k);
    // classical: sum_{l>=0} (1-lambda) lambda^l k^{l+1} = k (1 - lambda) + k rho
    // paper_l:   (1 - lambda) + rho
    if (convention == ExponentConvention::classical_l_plus_1) {
        return k * (1.0 - lambda) / (1.0 - lambda * k);
    }
    return (1.0 - lambda) + rho;
}

double certified_error_bound(const DpModel& model, const ValueFunction& v, const BoundTarget& which, double sigma)
{
    const double gamma = gamma_bound_constant(sigma);
    const ValueFunction tv = std::visit(
        [&](const auto& target) -> ValueFunction {
            using T = std::decay_t<decltype(target)>;
            if constexpr (std::is_same_v<T, OptimalTarget>) {
                return apply_optimality_operator(model, v).value;
            } else {
                return apply_policy_operator(model, target.mu, v);
            }
        },
        which);
    return gamma * weighted_distance(tv, v, model.weights());
}

Policy near_greedy_policy(const DpModel& model, const ValueFunction& v, double slack)
{
    if (!(slack >= 0.0) || !std::isfinite(slack)) {
        throw DomainError("slack must be finite and nonnegative");
    }
    require_model_size(model, v);
    const std::size_t n = model.n_states();
    Policy mu{std::vector<Control>(n)};
    std::vector<double> h;
    for (std::size_t x = 0; x < n; ++x) {
        const auto controls = model.controls().at(x);
        h.resize(controls.size());
        for (std::size_t i = 0; i < controls.size(); ++i) {
            h[i] = model.evaluate_at(x, i, v);
        }
        const double threshold = *std::min_element(h.begin(), h.end()) + slack * model.weights()[x];
        double chosen_h = -std::numeric_limits<double>::infinity();
        Control chosen = 0;
        for (std::size_t i = 0; i < controls.size(); ++i) {
            if (h[i] > threshold) {
                continue;
            }
            if (h[i] > chosen_h || (h[i] == chosen_h && controls[i] < chosen)) {
                chosen_h = h[i];
                chosen = controls[i];
            }
        }
        mu.choice[x] = chosen;
    }
    return mu;
}

Policy epsilon_optimal_policy(const DpModel& model, const ValueFunction& v_star, double epsilon, double sigma)
{
    if (!(epsilon > 0.0)) {
        throw DomainError("epsilon must be positive");
    }
    return near_greedy_policy(model, v_star, epsilon / gamma_bound_constant(sigma));
}

} // namespace ciricdp
