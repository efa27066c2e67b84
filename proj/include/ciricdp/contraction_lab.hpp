#pragma once

#include "ciricdp/bellman_ops.hpp"
#include "ciricdp/value_space.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ciricdp {

/// Self-map of a closed interval [lo, hi] with the metric |x - y|.
class ScalarMap {
public:
    ScalarMap(std::function<double(double)> fn, double lo, double hi);

    /// Throws DomainError outside [lo, hi].
    double operator()(double x) const;

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

    std::optional<double> known_modulus;
    std::optional<double> known_fixed_point;
    /// Points where the map jumps; samplers force pairs across each of them.
    std::vector<double> discontinuities;

private:
    std::function<double(double)> fn_;
    double lo_;
    double hi_;
};

/// x/4 on [0, 1], x/5 on (1, 2]; fixed point 0, jump at 1.
ScalarMap example1_map();

enum class ContractionClass {
    banach,          // d(Tx, Ty) <= k d(x, y)
    ciric_halfsum,   // <= k max(d(x,y), d(x,Tx), d(y,Ty), (d(x,Ty) + d(y,Tx)) / 2)
    ciric_quasi,     // <= k max(d(x,y), d(x,Ty), d(y,Tx))
};

std::string_view to_string(ContractionClass c);
ContractionClass parse_contraction_class(std::string_view name);

/// Scalar pair sampler: seeded uniform pairs, a stratified grid (all pairs of
/// grid_points equally spaced points), pairs straddling each declared
/// discontinuity, and any explicitly supplied pairs.
struct ScalarSampler {
    std::size_t random_pairs = 100000;
    std::uint64_t seed = 0;
    std::size_t grid_points = 65;
    bool straddle_discontinuities = true;
    std::vector<double> straddle_offsets = {1e-1, 1e-3, 1e-6, 1e-9};
    std::vector<std::pair<double, double>> extra_pairs;
};

std::vector<std::pair<double, double>> sample_pairs(const ScalarMap& map, const ScalarSampler& sampler);

/// Value-function pair sampler: entries uniform on [lo, hi).
struct VectorSampler {
    std::size_t pairs = 10000;
    std::uint64_t seed = 0;
    double lo = -10.0;
    double hi = 10.0;
};

struct ContractionReport {
    ContractionClass cls = ContractionClass::banach;
    double modulus = 0.0;
    std::size_t samples = 0;          // pairs with a positive right-hand max
    std::size_t skipped = 0;          // pairs where every candidate distance is 0
    double max_ratio = 0.0;
    std::pair<double, double> worst_pair{0.0, 0.0};  // scalar checks only
    std::size_t worst_index = 0;      // index of the worst pair in sampling order
    std::size_t violations = 0;       // ratio > modulus + ratio_slack
    std::optional<std::size_t> first_violation;

    bool passed() const noexcept { return violations == 0; }
};

/// Default slack on the ratio before a pair counts as a violation.
inline constexpr double kRatioSlack = 1e-12;

ContractionReport check_contraction(const ScalarMap& map, ContractionClass cls, double modulus,
                                    const ScalarSampler& sampler, double ratio_slack = kRatioSlack);

ContractionReport check_contraction(const Operator& op, const WeightFunction& nu, ContractionClass cls,
                                    double modulus, const VectorSampler& sampler,
                                    double ratio_slack = kRatioSlack);

double estimate_modulus(const ScalarMap& map, ContractionClass cls, const ScalarSampler& sampler);
double estimate_modulus(const Operator& op, const WeightFunction& nu, ContractionClass cls,
                        const VectorSampler& sampler);

/// JSON export: {class, modulus, samples, skipped, max_ratio, worst_pair, violations}.
std::string report_to_json(const ContractionReport& report, int indent = 2);

struct FixedPointRun {
    double x_star = 0.0;
    std::size_t iterations = 0;   // updates performed before the stopping check passed
    std::vector<double> trajectory;
    bool converged = false;
};

/// Iterates x <- t(x) until |t(x) - x| <= tol; x_star is the last evaluated t(x).
/// converged is false when max_iters updates did not reach tol.
[[nodiscard]] FixedPointRun iterate_to_fixed_point(const ScalarMap& map, double x0, double tol,
                                                   std::size_t max_iters);

} // namespace ciricdp
