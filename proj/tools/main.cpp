#include "commands.hpp"

#include "ciricdp/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace ciricdp::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Abstract dynamic programming toolkit: Bellman and lambda-operators, "
                 "randomized lambda-policy iteration, contraction certificates"};
    app.require_subcommand(1);

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a model with an oracle method");
    solve_cmd->add_option("--model", solve.model, "Model document (JSON)")->required();
    solve_cmd->add_option("--method", solve.method, "vi | pi_exact | enumerate")
        ->check(CLI::IsMember({"vi", "pi_exact", "enumerate"}));
    solve_cmd->add_option("--tol", solve.tol, "Value iteration error tolerance");
    solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration cap");
    solve_cmd->add_option("--cap", solve.cap, "Policy enumeration cap");
    solve_cmd->add_option("--out", solve.out, "Report path (default stdout)");

    PirOptions pir;
    std::string seeds = "0";
    std::string pir_convention = "classical_l_plus_1";
    bool no_enforce = false;
    auto* pir_cmd = app.add_subcommand("pir", "Run randomized lambda-policy iteration over one or more seeds");
    pir_cmd->add_option("--model", pir.model, "Model document (JSON)")->required();
    pir_cmd->add_option("--lambda", pir.lambda, "lambda in [0, 1)");
    pir_cmd->add_option("--p", pir.p, "Policy-step probability (p_0 for the geometric schedule)");
    pir_cmd->add_option("--p-beta", pir.p_beta, "Geometric schedule p_k = p * beta^k");
    pir_cmd->add_option("--p-min", pir.p_min, "Lower clip of the geometric schedule");
    auto* seed_opt = pir_cmd->add_option("--seed", seeds, "Single seed");
    pir_cmd->add_option("--seeds", seeds, "Seed list, e.g. 1..100 or 1,5,9..12")->excludes(seed_opt);
    pir_cmd->add_option("--tol", pir.tol, "Stop when ||F V_k - V_k|| <= tol");
    pir_cmd->add_option("--max-iters", pir.max_iters, "Iteration cap per run");
    pir_cmd->add_option("--v0-shift", pir.v0_shift, "V_0 = V*_est + c * nu");
    pir_cmd->add_option("--convention", pir_convention, "classical_l_plus_1 | paper_l")
        ->check(CLI::IsMember({"classical_l_plus_1", "paper_l"}));
    pir_cmd->add_flag("--no-enforce", no_enforce, "Do not require F V_0 < V_0");
    pir_cmd->add_option("--trunc-tol", pir.truncation_tol, "lambda-series truncation tolerance");
    pir_cmd->add_option("--max-terms", pir.max_terms, "lambda-series term cap");
    pir_cmd->add_option("--oracle-tol", pir.oracle_tol, "Value iteration tolerance for V*_est");
    pir_cmd->add_option("--out-dir", pir.out_dir, "Directory for traces and summary");
    pir_cmd->add_option("--threads", pir.threads, "Worker threads (0 = all cores)");
    pir_cmd->add_flag("--record-wall-time", pir.record_wall_time,
                      "Fill wall_time_ns in traces (breaks byte-identical reruns)");

    CertifyOptions certify;
    auto* certify_cmd = app.add_subcommand("certify", "Run a contraction or bound certification suite");
    certify_cmd->add_option("target", certify.target, "mdp-ciric | example1 | lambda-op | bounds")
        ->required()
        ->check(CLI::IsMember({"mdp-ciric", "example1", "lambda-op", "bounds"}));
    certify_cmd->add_option("--model", certify.model, "Model document (JSON)");
    certify_cmd->add_option("--samples", certify.samples, "Sample count (0 = target default)");
    certify_cmd->add_option("--seed", certify.seed, "Sampling seed");
    certify_cmd->add_option("--lambda", certify.lambda, "lambda for lambda-op");
    certify_cmd->add_option("--policies", certify.policies, "Random policies to check");
    certify_cmd->add_option("--out", certify.out, "Report path (default stdout)");

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded random finite MDP");
    gen_cmd->add_option("--states", gen.states, "Number of states");
    gen_cmd->add_option("--controls", gen.controls, "Controls per state");
    gen_cmd->add_option("--discount", gen.discount, "Discount in (0, 1)");
    gen_cmd->add_option("--seed", gen.seed, "Generator seed");
    gen_cmd->add_option("--out", gen.out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (*solve_cmd) {
            return cmd_solve(solve, std::cout, std::cerr);
        }
        if (*pir_cmd) {
            pir.seeds = parse_seed_list(seeds);
            pir.convention = parse_convention(pir_convention);
            pir.enforce = !no_enforce;
            return cmd_pir(pir, std::cout, std::cerr);
        }
        if (*certify_cmd) {
            return cmd_certify(certify, std::cout, std::cerr);
        }
        return cmd_gen(gen, std::cout, std::cerr);
    } catch (const ciricdp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
}
