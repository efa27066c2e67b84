#include "ciricdp/dp_model.hpp"

#include "ciricdp/errors.hpp"
#include "ciricdp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

namespace ciricdp {

namespace {

std::string pair_name(std::size_t x, Control u)
{
    return "(state " + std::to_string(x) + ", control " + std::to_string(u) + ")";
}

std::vector<std::vector<Control>> control_ids(const std::vector<std::vector<Action>>& actions)
{
    std::vector<std::vector<Control>> ids(actions.size());
    for (std::size_t x = 0; x < actions.size(); ++x) {
        for (const auto& a : actions[x]) {
            ids[x].push_back(a.id);
        }
    }
    return ids;
}

WeightFunction resolve_weights(std::optional<WeightFunction> weights, std::size_t n)
{
    if (!weights) {
        return WeightFunction::uniform(n);
    }
    if (weights->size() != n) {
        throw ValidationError("weights has " + std::to_string(weights->size()) + " entries, expected " +
                              std::to_string(n));
    }
    return std::move(*weights);
}

} // namespace

ControlSpace::ControlSpace(std::vector<std::vector<Control>> per_state) : per_state_(std::move(per_state))
{
    if (per_state_.empty()) {
        throw ValidationError("control space must cover at least one state");
    }
    for (std::size_t x = 0; x < per_state_.size(); ++x) {
        auto sorted = per_state_[x];
        if (sorted.empty()) {
            throw ValidationError("U(" + std::to_string(x) + ") is empty");
        }
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ValidationError("U(" + std::to_string(x) + ") contains duplicate control identifiers");
        }
    }
}

std::optional<std::size_t> ControlSpace::index_of(std::size_t x, Control u) const
{
    const auto& list = per_state_.at(x);
    auto it = std::find(list.begin(), list.end(), u);
    if (it == list.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - list.begin());
}

std::uint64_t ControlSpace::policy_count() const noexcept
{
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t count = 1;
    for (const auto& list : per_state_) {
        if (count > kMax / list.size()) {
            return kMax;
        }
        count *= list.size();
    }
    return count;
}

void validate_policy(const ControlSpace& controls, const Policy& mu)
{
    (void)policy_indices(controls, mu);
}

std::vector<std::size_t> policy_indices(const ControlSpace& controls, const Policy& mu)
{
    if (mu.size() != controls.n_states()) {
        throw DimensionError("policy has " + std::to_string(mu.size()) + " entries, model has " +
                             std::to_string(controls.n_states()) + " states");
    }
    std::vector<std::size_t> idx(mu.size());
    for (std::size_t x = 0; x < mu.size(); ++x) {
        auto i = controls.index_of(x, mu[x]);
        if (!i) {
            throw AdmissibilityError("policy picks inadmissible " + pair_name(x, mu[x]));
        }
        idx[x] = *i;
    }
    return idx;
}

double DpModel::evaluate(std::size_t x, Control u, const ValueFunction& v) const
{
    if (x >= n_states()) {
        throw DimensionError("state " + std::to_string(x) + " out of range");
    }
    if (v.size() != n_states()) {
        throw DimensionError("value function has " + std::to_string(v.size()) + " entries, model has " +
                             std::to_string(n_states()) + " states");
    }
    auto i = controls().index_of(x, u);
    if (!i) {
        throw AdmissibilityError("inadmissible " + pair_name(x, u));
    }
    return evaluate_at(x, *i, v);
}

FiniteMdp::FiniteMdp(std::vector<std::vector<Action>> actions, double discount,
                     std::optional<WeightFunction> weights)
    : actions_(std::move(actions)),
      discount_(discount),
      weights_(resolve_weights(std::move(weights), actions_.size())),
      controls_(control_ids(actions_)),
      modulus_(discount)
{
    if (!(discount_ > 0.0 && discount_ < 1.0)) {
        throw ValidationError("discount must lie in (0, 1), got " + std::to_string(discount_));
    }
    const std::size_t n = actions_.size();
    for (std::size_t x = 0; x < n; ++x) {
        for (const auto& a : actions_[x]) {
            if (!std::isfinite(a.cost)) {
                throw ValidationError("cost of " + pair_name(x, a.id) + " is not finite");
            }
            if (a.transition.size() != n) {
                throw ValidationError("transition row of " + pair_name(x, a.id) + " has " +
                                      std::to_string(a.transition.size()) + " entries, expected " +
                                      std::to_string(n));
            }
            double sum = 0.0;
            for (double p : a.transition) {
                if (!std::isfinite(p) || p < 0.0) {
                    throw ValidationError("transition row of " + pair_name(x, a.id) +
                                          " has a negative or non-finite entry");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "transition row of " << pair_name(x, a.id) << " sums to " << sum << ", not 1";
                throw ValidationError(msg.str());
            }
        }
    }
    if (!weights_.is_uniform()) {
        // alpha * max_{x,u} sum_y p(y|x,u) nu(y) / nu(x)
        double worst = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            for (const auto& a : actions_[x]) {
                double s = 0.0;
                for (std::size_t y = 0; y < n; ++y) {
                    s += a.transition[y] * weights_[y];
                }
                worst = std::max(worst, s / weights_[x]);
            }
        }
        modulus_ = discount_ * worst;
    }
}

double FiniteMdp::evaluate_at(std::size_t x, std::size_t control_index, const ValueFunction& v) const
{
    const Action& a = actions_[x][control_index];
    double expected = 0.0;
    const auto vals = v.values();
    for (std::size_t y = 0; y < a.transition.size(); ++y) {
        expected += a.transition[y] * vals[y];
    }
    return a.cost + discount_ * expected;
}

const Action& FiniteMdp::action(std::size_t x, Control u) const
{
    auto i = controls_.index_of(x, u);
    if (!i) {
        throw AdmissibilityError("inadmissible " + pair_name(x, u));
    }
    return actions_[x][*i];
}

namespace {

using nlohmann::json;

std::pair<std::size_t, Control> parse_pair_key(const std::string& key)
{
    const auto comma = key.find(',');
    auto parse_uint = [&](std::string_view s, std::uint64_t& out) {
        const auto* end = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(s.data(), end, out);
        return ec == std::errc() && ptr == end && !s.empty();
    };
    std::uint64_t x = 0, u = 0;
    if (comma == std::string::npos ||
        !parse_uint(std::string_view(key).substr(0, comma), x) ||
        !parse_uint(std::string_view(key).substr(comma + 1), u) ||
        u > std::numeric_limits<Control>::max()) {
        throw ParseError("key \"" + key + "\" is not of the form \"state,control\"");
    }
    return {static_cast<std::size_t>(x), static_cast<Control>(u)};
}

const json& require(const json& doc, const char* key)
{
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw ParseError(std::string("model document is missing \"") + key + "\"");
    }
    return *it;
}

FiniteMdp build_from_json(const json& doc)
{
    if (!doc.is_object()) {
        throw ParseError("model document must be a JSON object");
    }
    const json& n_json = require(doc, "n_states");
    if (!n_json.is_number_unsigned() || n_json.get<std::uint64_t>() == 0) {
        throw ParseError("\"n_states\" must be a positive integer");
    }
    const auto n = n_json.get<std::size_t>();

    const json& discount_json = require(doc, "discount");
    if (!discount_json.is_number()) {
        throw ParseError("\"discount\" must be a number");
    }
    const double discount = discount_json.get<double>();

    const json& controls_json = require(doc, "controls");
    if (!controls_json.is_array() || controls_json.size() != n) {
        throw ParseError("\"controls\" must be an array with one list per state");
    }
    std::vector<std::vector<Action>> actions(n);
    for (std::size_t x = 0; x < n; ++x) {
        const json& list = controls_json[x];
        if (!list.is_array()) {
            throw ParseError("\"controls\"[" + std::to_string(x) + "] must be an array");
        }
        for (const json& u : list) {
            if (!u.is_number_unsigned() || u.get<std::uint64_t>() > std::numeric_limits<Control>::max()) {
                throw ParseError("control identifiers must be nonnegative integers");
            }
            actions[x].push_back(Action{u.get<Control>(), 0.0, {}});
        }
    }

    const json& cost_json = require(doc, "cost");
    const json& transition_json = require(doc, "transition");
    if (!cost_json.is_object() || !transition_json.is_object()) {
        throw ParseError("\"cost\" and \"transition\" must be objects keyed by \"state,control\"");
    }

    std::map<std::pair<std::size_t, Control>, double> costs;
    for (const auto& [key, value] : cost_json.items()) {
        if (!value.is_number()) {
            throw ParseError("cost \"" + key + "\" must be a number");
        }
        costs[parse_pair_key(key)] = value.get<double>();
    }
    std::map<std::pair<std::size_t, Control>, std::vector<double>> rows;
    for (const auto& [key, value] : transition_json.items()) {
        if (!value.is_array()) {
            throw ParseError("transition \"" + key + "\" must be an array");
        }
        std::vector<double> row;
        for (const json& p : value) {
            if (!p.is_number()) {
                throw ParseError("transition \"" + key + "\" must contain numbers");
            }
            row.push_back(p.get<double>());
        }
        rows[parse_pair_key(key)] = std::move(row);
    }

    std::size_t admissible = 0;
    for (std::size_t x = 0; x < n; ++x) {
        for (auto& a : actions[x]) {
            const auto key = std::make_pair(x, a.id);
            auto c = costs.find(key);
            auto r = rows.find(key);
            if (c == costs.end()) {
                throw ValidationError("missing cost for " + pair_name(x, a.id));
            }
            if (r == rows.end()) {
                throw ValidationError("missing transition row for " + pair_name(x, a.id));
            }
            a.cost = c->second;
            a.transition = std::move(r->second);
            ++admissible;
        }
    }
    if (costs.size() != admissible || rows.size() != admissible) {
        throw ValidationError("cost/transition entries reference inadmissible (state, control) pairs");
    }

    std::optional<WeightFunction> weights;
    if (auto it = doc.find("weights"); it != doc.end()) {
        if (!it->is_array()) {
            throw ParseError("\"weights\" must be an array");
        }
        std::vector<double> w;
        for (const json& e : *it) {
            if (!e.is_number()) {
                throw ParseError("\"weights\" must contain numbers");
            }
            w.push_back(e.get<double>());
        }
        weights = WeightFunction(std::move(w));
    }
    return FiniteMdp(std::move(actions), discount, std::move(weights));
}

} // namespace

FiniteMdp parse_model(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model document is not valid JSON: ") + e.what());
    }
    return build_from_json(doc);
}

FiniteMdp load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open model file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string model_to_json(const FiniteMdp& mdp, int indent)
{
    json doc = json::object();
    const std::size_t n = mdp.n_states();
    doc["n_states"] = n;
    doc["discount"] = mdp.discount();
    doc["weights"] = std::vector<double>(mdp.weights().values().begin(), mdp.weights().values().end());
    json controls = json::array();
    json cost = json::object();
    json transition = json::object();
    for (std::size_t x = 0; x < n; ++x) {
        json list = json::array();
        for (const auto& a : mdp.actions(x)) {
            list.push_back(a.id);
            const auto key = std::to_string(x) + "," + std::to_string(a.id);
            cost[key] = a.cost;
            transition[key] = a.transition;
        }
        controls.push_back(std::move(list));
    }
    doc["controls"] = std::move(controls);
    doc["cost"] = std::move(cost);
    doc["transition"] = std::move(transition);
    return doc.dump(indent) + "\n";
}

FiniteMdp random_mdp(std::size_t n_states, std::size_t n_controls, double discount, std::uint64_t seed)
{
    if (n_states == 0 || n_controls == 0) {
        throw ValidationError("random_mdp needs at least one state and one control");
    }
    if (!(discount > 0.0 && discount < 1.0)) {
        throw ValidationError("discount must lie in (0, 1), got " + std::to_string(discount));
    }
    CounterRng rng(seed);
    std::vector<std::vector<Action>> actions(n_states);
    for (std::size_t x = 0; x < n_states; ++x) {
        for (std::size_t u = 0; u < n_controls; ++u) {
            Action a;
            a.id = static_cast<Control>(u);
            a.cost = rng.uniform();
            // Normalized exponential spacings are uniform on the simplex.
            a.transition.resize(n_states);
            double sum = 0.0;
            for (double& p : a.transition) {
                p = -std::log1p(-rng.uniform());
                sum += p;
            }
            if (sum == 0.0) {
                a.transition.assign(n_states, 1.0 / static_cast<double>(n_states));
            } else {
                for (double& p : a.transition) {
                    p /= sum;
                }
            }
            actions[x].push_back(std::move(a));
        }
    }
    return FiniteMdp(std::move(actions), discount);
}

} // namespace ciricdp
