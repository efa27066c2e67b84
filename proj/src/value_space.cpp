#include "ciricdp/value_space.hpp"

#include "ciricdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ciricdp {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

} // namespace

StateSpace::StateSpace(std::size_t n_states) : n_states_(n_states)
{
    if (n_states == 0) {
        throw ValidationError("state space must contain at least one state");
    }
}

WeightFunction::WeightFunction(std::vector<double> weights) : weights_(std::move(weights))
{
    if (weights_.empty()) {
        throw ValidationError("weight function must have at least one entry");
    }
    for (std::size_t x = 0; x < weights_.size(); ++x) {
        if (!std::isfinite(weights_[x]) || !(weights_[x] > 0.0)) {
            throw ValidationError("weight at state " + std::to_string(x) +
                                  " must be finite and strictly positive");
        }
    }
}

WeightFunction WeightFunction::uniform(std::size_t n_states)
{
    return WeightFunction(std::vector<double>(n_states, 1.0));
}

bool WeightFunction::is_uniform() const noexcept
{
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
}

ValueFunction::ValueFunction(std::vector<double> values) : values_(std::move(values))
{
    for (std::size_t x = 0; x < values_.size(); ++x) {
        if (!std::isfinite(values_[x])) {
            throw ValidationError("value at state " + std::to_string(x) + " is not finite");
        }
    }
}

ValueFunction ValueFunction::zeros(std::size_t n_states)
{
    return ValueFunction(std::vector<double>(n_states, 0.0));
}

ValueFunction ValueFunction::constant(std::size_t n_states, double c)
{
    return ValueFunction(std::vector<double>(n_states, c));
}

ValueFunction operator+(const ValueFunction& v, const ValueFunction& w)
{
    require_same_size(v.size(), w.size(), "operator+");
    std::vector<double> out(v.size());
    for (std::size_t x = 0; x < out.size(); ++x) {
        out[x] = v[x] + w[x];
    }
    return ValueFunction(std::move(out));
}

ValueFunction operator-(const ValueFunction& v, const ValueFunction& w)
{
    require_same_size(v.size(), w.size(), "operator-");
    std::vector<double> out(v.size());
    for (std::size_t x = 0; x < out.size(); ++x) {
        out[x] = v[x] - w[x];
    }
    return ValueFunction(std::move(out));
}

ValueFunction operator*(double c, const ValueFunction& v)
{
    std::vector<double> out(v.values().begin(), v.values().end());
    for (double& e : out) {
        e *= c;
    }
    return ValueFunction(std::move(out));
}

double weighted_norm(const ValueFunction& v, const WeightFunction& nu)
{
    require_same_size(v.size(), nu.size(), "weighted_norm");
    double best = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) {
        best = std::max(best, std::abs(v[x]) / nu[x]);
    }
    return best;
}

double weighted_distance(const ValueFunction& v, const ValueFunction& w, const WeightFunction& nu)
{
    require_same_size(v.size(), w.size(), "weighted_distance");
    require_same_size(v.size(), nu.size(), "weighted_distance");
    double best = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) {
        best = std::max(best, std::abs(v[x] - w[x]) / nu[x]);
    }
    return best;
}

double max_abs_deviation(const ValueFunction& v, const ValueFunction& w)
{
    require_same_size(v.size(), w.size(), "max_abs_deviation");
    double best = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) {
        best = std::max(best, std::abs(v[x] - w[x]));
    }
    return best;
}

bool pointwise_leq(const ValueFunction& v, const ValueFunction& w)
{
    require_same_size(v.size(), w.size(), "pointwise_leq");
    for (std::size_t x = 0; x < v.size(); ++x) {
        if (!(v[x] <= w[x])) {
            return false;
        }
    }
    return true;
}

bool pointwise_lt(const ValueFunction& v, const ValueFunction& w)
{
    require_same_size(v.size(), w.size(), "pointwise_lt");
    for (std::size_t x = 0; x < v.size(); ++x) {
        if (!(v[x] < w[x])) {
            return false;
        }
    }
    return true;
}

std::vector<std::size_t> states_not_lt(const ValueFunction& v, const ValueFunction& w)
{
    require_same_size(v.size(), w.size(), "states_not_lt");
    std::vector<std::size_t> failing;
    for (std::size_t x = 0; x < v.size(); ++x) {
        if (!(v[x] < w[x])) {
            failing.push_back(x);
        }
    }
    return failing;
}

ValueFunction shift_by_weight(const ValueFunction& v, double c, const WeightFunction& nu)
{
    require_same_size(v.size(), nu.size(), "shift_by_weight");
    std::vector<double> out(v.size());
    for (std::size_t x = 0; x < out.size(); ++x) {
        out[x] = v[x] + c * nu[x];
    }
    return ValueFunction(std::move(out));
}

} // namespace ciricdp
