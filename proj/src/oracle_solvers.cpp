#include "ciricdp/oracle_solvers.hpp"

#include "ciricdp/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace ciricdp {

namespace {

constexpr double kFixedPointResidual = 1e-10;

struct AffinePolicy {
    Eigen::MatrixXd a;  // alpha * P_mu
    Eigen::VectorXd g;  // g_mu
};

AffinePolicy affine_form(const FiniteMdp& mdp, const Policy& mu)
{
    const auto idx = policy_indices(mdp.controls(), mu);
    const auto n = static_cast<Eigen::Index>(mdp.n_states());
    AffinePolicy out{Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};
    for (Eigen::Index x = 0; x < n; ++x) {
        const Action& act = mdp.actions(static_cast<std::size_t>(x))[idx[static_cast<std::size_t>(x)]];
        out.g(x) = act.cost;
        for (Eigen::Index y = 0; y < n; ++y) {
            out.a(x, y) = mdp.discount() * act.transition[static_cast<std::size_t>(y)];
        }
    }
    return out;
}

ValueFunction to_value(const Eigen::VectorXd& v)
{
    return ValueFunction(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd to_eigen(const ValueFunction& v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t x = 0; x < v.size(); ++x) {
        out(static_cast<Eigen::Index>(x)) = v[x];
    }
    return out;
}

Eigen::VectorXd solve_shifted(const Eigen::MatrixXd& a, double scale, const Eigen::VectorXd& rhs)
{
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - scale * a;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) {
        throw InternalError("linear solve produced non-finite values");
    }
    return sol;
}

} // namespace

ValueFunction exact_policy_value(const FiniteMdp& mdp, const Policy& mu)
{
    const AffinePolicy f = affine_form(mdp, mu);
    ValueFunction v = to_value(solve_shifted(f.a, 1.0, f.g));
    const double residual = weighted_distance(apply_policy_operator(mdp, mu, v), v, mdp.weights());
    if (residual > kFixedPointResidual * std::max(1.0, weighted_norm(v, mdp.weights()))) {
        throw InternalError("policy evaluation residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return v;
}

ValueIterationResult value_iteration(const DpModel& model, const ValueFunction& v0, double tol,
                                     std::size_t max_iters)
{
    if (!(tol > 0.0)) {
        throw DomainError("tol must be positive");
    }
    const double alpha = model.contraction_modulus();
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("value iteration needs a contraction modulus in (0, 1)");
    }
    const double threshold = tol * (1.0 - alpha) / alpha;
    ValueIterationResult result{v0};
    while (result.iterations < max_iters) {
        ValueFunction next = apply_optimality_operator(model, result.value).value;
        result.last_step = weighted_distance(next, result.value, model.weights());
        result.value = std::move(next);
        ++result.iterations;
        if (result.last_step <= threshold) {
            result.converged = true;
            break;
        }
    }
    return result;
}

PolicyIterationResult policy_iteration(const FiniteMdp& mdp, std::size_t max_iters)
{
    Policy mu = apply_optimality_operator(mdp, ValueFunction::zeros(mdp.n_states())).policy;
    PolicyIterationResult result{exact_policy_value(mdp, mu), mu};
    while (result.iterations < max_iters) {
        ++result.iterations;
        Policy next = apply_optimality_operator(mdp, result.value).policy;
        if (next == result.policy) {
            result.converged = true;
            break;
        }
        result.policy = std::move(next);
        result.value = exact_policy_value(mdp, result.policy);
    }
    return result;
}

EnumerationResult enumerate_policies(const FiniteMdp& mdp, std::uint64_t cap)
{
    const auto& controls = mdp.controls();
    const std::uint64_t count = controls.policy_count();
    if (count > cap) {
        throw CapExceededError("policy enumeration refused: " + std::to_string(count) +
                               " policies exceed the cap of " + std::to_string(cap));
    }
    const std::size_t n = mdp.n_states();
    std::vector<std::size_t> digits(n, 0);
    Policy mu{std::vector<Control>(n)};
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    Policy best_policy;
    double best_sum = std::numeric_limits<double>::infinity();

    for (std::uint64_t p = 0; p < count; ++p) {
        for (std::size_t x = 0; x < n; ++x) {
            mu.choice[x] = controls.at(x)[digits[x]];
        }
        const ValueFunction v = exact_policy_value(mdp, mu);
        double sum = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            best[x] = std::min(best[x], v[x]);
            sum += v[x];
        }
        if (sum < best_sum) {
            best_sum = sum;
            best_policy = mu;
        }
        // mixed-radix increment
        for (std::size_t x = 0; x < n; ++x) {
            if (++digits[x] < controls.at(x).size()) {
                break;
            }
            digits[x] = 0;
        }
    }

    EnumerationResult result{ValueFunction(std::move(best)), std::move(best_policy), count};
    const ValueFunction attained = exact_policy_value(mdp, result.policy);
    for (std::size_t x = 0; x < n; ++x) {
        if (attained[x] - result.value[x] > 1e-9 * std::max(1.0, std::abs(result.value[x]))) {
            throw InternalError("no enumerated policy attains the pointwise minimum at state " + std::to_string(x));
        }
    }
    return result;
}

ValueFunction lambda_operator_oracle(const FiniteMdp& mdp, const Policy& mu, const ValueFunction& v, double lambda,
                                     ExponentConvention convention)
{
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in [0, 1), got " + std::to_string(lambda));
    }
    if (v.size() != mdp.n_states()) {
        throw DimensionError("value function size does not match the model");
    }
    const AffinePolicy f = affine_form(mdp, mu);
    const Eigen::VectorXd ve = to_eigen(v);
    const Eigen::VectorXd rhs = f.g + (1.0 - lambda) * (f.a * ve);
    const Eigen::VectorXd w = solve_shifted(f.a, lambda, rhs);

    // W = (1 - lambda) F_mu v + lambda F_mu W
    const Eigen::VectorXd recursion = (1.0 - lambda) * (f.g + f.a * ve) + lambda * (f.g + f.a * w);
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if ((recursion - w).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InternalError("lambda-operator oracle residual exceeds tolerance");
    }
    if (convention == ExponentConvention::paper_l) {
        return to_value((1.0 - lambda) * ve + lambda * w);
    }
    return to_value(w);
}

} // namespace ciricdp
