#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ciricdp {

/// Finite state set {0, ..., n_states - 1}.
class StateSpace {
public:
    explicit StateSpace(std::size_t n_states);

    std::size_t size() const noexcept { return n_states_; }

private:
    std::size_t n_states_;
};

/// Strictly positive weights nu(x) defining the weighted sup-norm.
class WeightFunction {
public:
    explicit WeightFunction(std::vector<double> weights);

    /// nu == 1 everywhere; recovers the plain sup-norm.
    static WeightFunction uniform(std::size_t n_states);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t x) const noexcept { return weights_[x]; }
    std::span<const double> values() const noexcept { return weights_; }
    bool is_uniform() const noexcept;

private:
    std::vector<double> weights_;
};

/// Element of B(X): a finite real value per state.
class ValueFunction {
public:
    explicit ValueFunction(std::vector<double> values);

    static ValueFunction zeros(std::size_t n_states);
    static ValueFunction constant(std::size_t n_states, double c);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t x) const noexcept { return values_[x]; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const ValueFunction&, const ValueFunction&) = default;

private:
    std::vector<double> values_;
};

ValueFunction operator+(const ValueFunction& v, const ValueFunction& w);
ValueFunction operator-(const ValueFunction& v, const ValueFunction& w);
ValueFunction operator*(double c, const ValueFunction& v);

/// sup_x |v(x)| / nu(x).
double weighted_norm(const ValueFunction& v, const WeightFunction& nu);

/// weighted_norm(v - w, nu), computed without materializing the difference.
double weighted_distance(const ValueFunction& v, const ValueFunction& w, const WeightFunction& nu);

/// Unweighted max |v(x) - w(x)|.
double max_abs_deviation(const ValueFunction& v, const ValueFunction& w);

bool pointwise_leq(const ValueFunction& v, const ValueFunction& w);
bool pointwise_lt(const ValueFunction& v, const ValueFunction& w);

/// States where v(x) < w(x) fails.
std::vector<std::size_t> states_not_lt(const ValueFunction& v, const ValueFunction& w);

/// x -> v(x) + c * nu(x).
ValueFunction shift_by_weight(const ValueFunction& v, double c, const WeightFunction& nu);

} // namespace ciricdp
