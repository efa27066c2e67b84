#pragma once

#include "ciricdp/value_space.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ciricdp {

using Control = std::uint32_t;

/// Per-state admissible control lists U(x). Each list is nonempty with unique ids.
class ControlSpace {
public:
    explicit ControlSpace(std::vector<std::vector<Control>> per_state);

    std::size_t n_states() const noexcept { return per_state_.size(); }
    std::span<const Control> at(std::size_t x) const { return per_state_.at(x); }

    /// Position of `u` within U(x), if admissible.
    std::optional<std::size_t> index_of(std::size_t x, Control u) const;

    /// Product of |U(x)|, saturated at UINT64_MAX.
    std::uint64_t policy_count() const noexcept;

private:
    std::vector<std::vector<Control>> per_state_;
};

/// Deterministic stationary policy: one control per state.
struct Policy {
    std::vector<Control> choice;

    std::size_t size() const noexcept { return choice.size(); }
    Control operator[](std::size_t x) const noexcept { return choice[x]; }

    friend bool operator==(const Policy&, const Policy&) = default;
};

/// Throws AdmissibilityError unless mu(x) is in U(x) for every x.
void validate_policy(const ControlSpace& controls, const Policy& mu);

/// Resolve each mu(x) to its position in U(x); throws AdmissibilityError.
std::vector<std::size_t> policy_indices(const ControlSpace& controls, const Policy& mu);

/// Abstract mapping H(x, u, V) together with the state/control structure.
///
/// Implementations must be monotone in V and well posed on B(X). The infimum
/// over U(x) is attained because control sets are finite.
class DpModel {
public:
    virtual ~DpModel() = default;

    virtual std::size_t n_states() const noexcept = 0;
    virtual const ControlSpace& controls() const noexcept = 0;
    virtual const WeightFunction& weights() const noexcept = 0;

    /// H(x, U(x)[control_index], v). Callers guarantee the index and size are valid.
    virtual double evaluate_at(std::size_t x, std::size_t control_index, const ValueFunction& v) const = 0;

    /// Banach modulus of every F_mu (and of F) under the weighted sup-norm.
    virtual double contraction_modulus() const noexcept = 0;

    /// Checked H(x, u, v).
    double evaluate(std::size_t x, Control u, const ValueFunction& v) const;
};

/// One admissible (x, u) pair of a finite MDP.
struct Action {
    Control id = 0;
    double cost = 0.0;
    std::vector<double> transition;  // p(. | x, u), length n_states
};

/// Finite discounted MDP: H(x, u, V) = g(x, u) + alpha * sum_y p(y | x, u) V(y).
class FiniteMdp final : public DpModel {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    /// Validates every invariant; throws ValidationError naming the offending (x, u).
    FiniteMdp(std::vector<std::vector<Action>> actions, double discount,
              std::optional<WeightFunction> weights = std::nullopt);

    std::size_t n_states() const noexcept override { return actions_.size(); }
    const ControlSpace& controls() const noexcept override { return controls_; }
    const WeightFunction& weights() const noexcept override { return weights_; }
    double evaluate_at(std::size_t x, std::size_t control_index, const ValueFunction& v) const override;
    double contraction_modulus() const noexcept override { return modulus_; }

    double discount() const noexcept { return discount_; }
    const std::vector<Action>& actions(std::size_t x) const { return actions_.at(x); }
    const Action& action(std::size_t x, Control u) const;

private:
    std::vector<std::vector<Action>> actions_;
    double discount_;
    WeightFunction weights_;
    ControlSpace controls_;
    double modulus_;
};

/// Parse a model document (JSON). Throws ParseError or ValidationError; never
/// returns a partially built model.
FiniteMdp parse_model(std::string_view text);
FiniteMdp load_model(const std::filesystem::path& path);

/// Serialize to the model document format (weights always written).
std::string model_to_json(const FiniteMdp& mdp, int indent = 2);

/// Seeded random instance: costs uniform on [0, 1), rows uniform on the simplex,
/// controls 0..n_controls-1 at every state.
FiniteMdp random_mdp(std::size_t n_states, std::size_t n_controls, double discount, std::uint64_t seed);

} // namespace ciricdp
