#pragma once

#include "ciricdp/bellman_ops.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ciricdp::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 2,
    kNonConvergence = 3,
    kPrecondition = 4,
    kCertificationFailure = 5,
};

inline constexpr int kSchemaVersion = 1;

/// "a..b" (inclusive) ranges and single values separated by commas.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

ExponentConvention parse_convention(std::string_view name);

struct SolveOptions {
    std::filesystem::path model;
    std::string method = "vi";  // vi | pi_exact | enumerate
    double tol = 1e-8;
    std::size_t max_iters = 100000;
    std::uint64_t cap = 1'000'000;
    std::optional<std::filesystem::path> out;
};

struct PirOptions {
    std::filesystem::path model;
    double lambda = 0.5;
    double p = 0.5;
    std::optional<double> p_beta;     // geometric schedule p * beta^k when set
    double p_min = 0.05;
    std::vector<std::uint64_t> seeds{0};
    double tol = 1e-8;
    std::size_t max_iters = 10000;
    double v0_shift = 1.0;
    ExponentConvention convention = ExponentConvention::classical_l_plus_1;
    bool enforce = true;
    double truncation_tol = 1e-12;
    std::size_t max_terms = 100000;
    double oracle_tol = 1e-10;
    std::filesystem::path out_dir = ".";
    unsigned threads = 0;
    bool record_wall_time = false;
};

struct CertifyOptions {
    std::string target;  // mdp-ciric | example1 | lambda-op | bounds
    std::optional<std::filesystem::path> model;
    std::size_t samples = 0;  // 0 = target default
    std::uint64_t seed = 0;
    double lambda = 0.5;
    std::size_t policies = 10;
    std::optional<std::filesystem::path> out;
};

struct GenOptions {
    std::size_t states = 20;
    std::size_t controls = 4;
    double discount = 0.9;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

// Each command writes its report (stdout when no path is given), prints
// diagnostics to `err`, and returns the process exit code.
int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_pir(const PirOptions& opts, std::ostream& out, std::ostream& err);
int cmd_certify(const CertifyOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err);

} // namespace ciricdp::cli
