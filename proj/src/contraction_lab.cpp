#include "ciricdp/contraction_lab.hpp"

#include "ciricdp/errors.hpp"
#include "ciricdp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace ciricdp {

ScalarMap::ScalarMap(std::function<double(double)> fn, double lo, double hi)
    : fn_(std::move(fn)), lo_(lo), hi_(hi)
{
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("scalar map needs a finite interval lo <= hi");
    }
}

double ScalarMap::operator()(double x) const
{
    if (!(x >= lo_ && x <= hi_)) {
        throw DomainError("x = " + std::to_string(x) + " is outside [" + std::to_string(lo_) + ", " +
                          std::to_string(hi_) + "]");
    }
    return fn_(x);
}

ScalarMap example1_map()
{
    ScalarMap map([](double x) { return x <= 1.0 ? x / 4.0 : x / 5.0; }, 0.0, 2.0);
    map.known_modulus = 0.25;
    map.known_fixed_point = 0.0;
    map.discontinuities = {1.0};
    return map;
}

std::string_view to_string(ContractionClass c)
{
    switch (c) {
    case ContractionClass::banach:
        return "banach";
    case ContractionClass::ciric_halfsum:
        return "ciric_halfsum";
    case ContractionClass::ciric_quasi:
        return "ciric_quasi";
    }
    return "unknown";
}

ContractionClass parse_contraction_class(std::string_view name)
{
    for (auto c : {ContractionClass::banach, ContractionClass::ciric_halfsum, ContractionClass::ciric_quasi}) {
        if (name == to_string(c)) {
            return c;
        }
    }
    throw ParseError("unknown contraction class \"" + std::string(name) + "\"");
}

std::vector<std::pair<double, double>> sample_pairs(const ScalarMap& map, const ScalarSampler& sampler)
{
    std::vector<std::pair<double, double>> pairs;
    const double lo = map.lo();
    const double hi = map.hi();

    CounterRng rng(sampler.seed);
    pairs.reserve(sampler.random_pairs);
    for (std::size_t i = 0; i < sampler.random_pairs; ++i) {
        const double x = rng.uniform(lo, hi);
        const double y = rng.uniform(lo, hi);
        pairs.emplace_back(x, y);
    }

    if (sampler.grid_points >= 2) {
        const double step = (hi - lo) / static_cast<double>(sampler.grid_points - 1);
        for (std::size_t i = 0; i < sampler.grid_points; ++i) {
            for (std::size_t j = i + 1; j < sampler.grid_points; ++j) {
                const double x = i + 1 == sampler.grid_points ? hi : lo + step * static_cast<double>(i);
                const double y = j + 1 == sampler.grid_points ? hi : lo + step * static_cast<double>(j);
                pairs.emplace_back(x, y);
            }
        }
    }

    if (sampler.straddle_discontinuities) {
        auto clip = [&](double v) { return std::clamp(v, lo, hi); };
        for (double d : map.discontinuities) {
            for (double delta : sampler.straddle_offsets) {
                pairs.emplace_back(clip(d), clip(d + delta));
                pairs.emplace_back(clip(d - delta), clip(d + delta));
                pairs.emplace_back(clip(d - delta), clip(d));
            }
        }
    }

    pairs.insert(pairs.end(), sampler.extra_pairs.begin(), sampler.extra_pairs.end());
    return pairs;
}

namespace {

// Right-hand max of the chosen inequality (without the modulus).
double rhs_for(ContractionClass cls, double d_xy, double d_x_tx, double d_y_ty, double d_x_ty, double d_y_tx)
{
    switch (cls) {
    case ContractionClass::banach:
        return d_xy;
    case ContractionClass::ciric_halfsum:
        return std::max({d_xy, d_x_tx, d_y_ty, 0.5 * (d_x_ty + d_y_tx)});
    case ContractionClass::ciric_quasi:
        return std::max({d_xy, d_x_ty, d_y_tx});
    }
    return d_xy;
}

struct RatioTally {
    ContractionReport report;
    double ratio_slack;

    void add(std::size_t index, double lhs, double rhs)
    {
        if (!(rhs > 0.0)) {
            ++report.skipped;
            return;
        }
        const double ratio = lhs / rhs;
        ++report.samples;
        if (report.samples == 1 || ratio > report.max_ratio) {
            report.max_ratio = ratio;
            report.worst_index = index;
        }
        if (ratio > report.modulus + ratio_slack) {
            ++report.violations;
            if (!report.first_violation) {
                report.first_violation = index;
            }
        }
    }

    ContractionReport finish() &&
    {
        if (report.samples == 0) {
            throw SamplingError("no sampled pair had a positive right-hand side (" +
                                std::to_string(report.skipped) + " skipped)");
        }
        return std::move(report);
    }
};

void require_modulus(double modulus)
{
    if (!(modulus > 0.0 && modulus < 1.0)) {
        throw DomainError("modulus must lie in (0, 1), got " + std::to_string(modulus));
    }
}

} // namespace

ContractionReport check_contraction(const ScalarMap& map, ContractionClass cls, double modulus,
                                    const ScalarSampler& sampler, double ratio_slack)
{
    require_modulus(modulus);
    const auto pairs = sample_pairs(map, sampler);
    RatioTally tally{ContractionReport{}, ratio_slack};
    tally.report.cls = cls;
    tally.report.modulus = modulus;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [x, y] = pairs[i];
        const double tx = map(x);
        const double ty = map(y);
        const double rhs = rhs_for(cls, std::abs(x - y), std::abs(x - tx), std::abs(y - ty), std::abs(x - ty),
                                   std::abs(y - tx));
        tally.add(i, std::abs(tx - ty), rhs);
    }
    auto report = std::move(tally).finish();
    report.worst_pair = pairs[report.worst_index];
    return report;
}

ContractionReport check_contraction(const Operator& op, const WeightFunction& nu, ContractionClass cls,
                                    double modulus, const VectorSampler& sampler, double ratio_slack)
{
    require_modulus(modulus);
    if (!(sampler.lo < sampler.hi)) {
        throw DomainError("vector sampler needs lo < hi");
    }
    RatioTally tally{ContractionReport{}, ratio_slack};
    tally.report.cls = cls;
    tally.report.modulus = modulus;
    CounterRng rng(sampler.seed);
    const std::size_t n = nu.size();
    auto draw = [&] {
        std::vector<double> v(n);
        for (double& e : v) {
            e = rng.uniform(sampler.lo, sampler.hi);
        }
        return ValueFunction(std::move(v));
    };
    for (std::size_t i = 0; i < sampler.pairs; ++i) {
        const ValueFunction v = draw();
        const ValueFunction vp = draw();
        const CiricComparison c = ciric_comparison(op, nu, v, vp);
        const double rhs = rhs_for(cls, c.d_v_vp, c.d_v_tv, c.d_vp_tvp, c.d_v_tvp, c.d_vp_tv);
        tally.add(i, c.lhs, rhs);
    }
    return std::move(tally).finish();
}

double estimate_modulus(const ScalarMap& map, ContractionClass cls, const ScalarSampler& sampler)
{
    // Any modulus in (0, 1) works here; only max_ratio is used.
    return check_contraction(map, cls, 0.5, sampler).max_ratio;
}

double estimate_modulus(const Operator& op, const WeightFunction& nu, ContractionClass cls,
                        const VectorSampler& sampler)
{
    return check_contraction(op, nu, cls, 0.5, sampler).max_ratio;
}

std::string report_to_json(const ContractionReport& report, int indent)
{
    nlohmann::json doc = {
        {"class", std::string(to_string(report.cls))},
        {"modulus", report.modulus},
        {"samples", report.samples},
        {"skipped", report.skipped},
        {"max_ratio", report.max_ratio},
        {"worst_pair", {report.worst_pair.first, report.worst_pair.second}},
        {"violations", report.violations},
    };
    return doc.dump(indent);
}

FixedPointRun iterate_to_fixed_point(const ScalarMap& map, double x0, double tol, std::size_t max_iters)
{
    if (!(tol > 0.0)) {
        throw DomainError("tol must be positive");
    }
    FixedPointRun run;
    double x = x0;
    run.trajectory.push_back(x);
    for (;;) {
        const double tx = map(x);
        if (std::abs(tx - x) <= tol) {
            run.x_star = tx;
            run.converged = true;
            return run;
        }
        if (run.iterations == max_iters) {
            run.x_star = x;
            return run;
        }
        x = tx;
        ++run.iterations;
        run.trajectory.push_back(x);
    }
}

} // namespace ciricdp
