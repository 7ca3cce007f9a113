#include "uavnoma/cli.hpp"

#include "uavnoma/io.hpp"
#include "uavnoma/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>

namespace uavnoma {

namespace {

struct RunArgs {
    std::string mode;
    std::string scenario;
    std::uint64_t seed = 1;
    std::string out;
    bool no_reachability = false;
    std::optional<double> lambda;
};

struct SweepArgs {
    std::string scenario;
    std::string param;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds{1};
    std::string mode;
    std::string out;
    bool no_reachability = false;
    std::optional<double> lambda;
};

int do_run(const RunArgs& a, std::ostream& out) {
    Scenario sc = load_scenario(a.scenario);
    if (a.lambda) sc.lambda = *a.lambda;
    const RunMode mode = a.mode.empty() ? sc.mode : parse_run_mode(a.mode);
    const OnlineOptions opt{!a.no_reachability};
    const RunOutput r = run_scenario(sc, mode, a.seed, opt);
    save_result(r.result, sc, r.trace, a.out, SaveOptions{!a.no_reachability || mode != RunMode::Online});
    out << "mode " << r.result.mode << " seed " << a.seed << " objective " << format_number(r.result.objective())
        << " nats (" << format_number(nats_to_bits(r.result.objective())) << " bits/s/Hz)"
        << (r.result.converged ? " converged" : " not converged") << " iterations " << r.result.iterations;
    if (r.result.qos_relaxed) out << " qos-relaxed x" << format_number(r.result.qos_scale);
    out << "\nresults in " << a.out << "\n";
    return 0;
}

int do_sweep(const SweepArgs& a, std::ostream& out) {
    Scenario sc = load_scenario(a.scenario);
    if (a.lambda) sc.lambda = *a.lambda;
    const std::string param = a.param.empty() ? sc.sweep_param : a.param;
    const std::vector<double> values = a.values.empty() ? sc.sweep_values : a.values;
    if (param.empty() || values.empty()) throw ScenarioError("sweep: need --param and --values (or a sweep block)");
    RunMode mode = a.mode.empty() ? sc.mode : parse_run_mode(a.mode);
    if (param == "lambda" && a.mode.empty()) mode = RunMode::Online;
    const auto rows = sweep(sc, param, values, a.seeds, mode, OnlineOptions{!a.no_reachability});
    write_sweep_table(rows, param, out);
    if (!a.out.empty()) {
        std::filesystem::create_directories(a.out);
        std::ofstream f(std::filesystem::path(a.out) / "sweep.csv");
        if (!f) throw Error("cannot write " + a.out + "/sweep.csv");
        write_sweep_table(rows, param, f);
    }
    for (const auto& r : rows)
        if (!r.error.empty()) return 1;
    return 0;
}

int do_verify(const std::string& dir, std::ostream& out, std::ostream& err) {
    const VerifyReport rep = verify_result(dir);
    if (rep.ok()) {
        out << "verify: " << dir << " ok\n";
        return 0;
    }
    for (const auto& p : rep.problems) err << "verify: " << p << "\n";
    return 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint UAV trajectory and NOMA power optimization"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario and save its results");
    run_cmd->add_option("--mode", run.mode, "offline-fixed | offline-mobile | online")
        ->check(CLI::IsMember({"offline-fixed", "offline-mobile", "online"}));
    run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
    run_cmd->add_option("--seed", run.seed, "Random seed")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_flag("--no-reachability", run.no_reachability, "Drop the online terminal reachability constraint");
    run_cmd->add_option("--lambda", run.lambda, "Poisson mean group size (online)");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over values and seeds");
    sweep_cmd->add_option("--scenario", sw.scenario, "Scenario JSON file")->required();
    sweep_cmd->add_option("--param", sw.param, "T | N | U_g | G | p_max | lambda");
    sweep_cmd->add_option("--values", sw.values, "Comma separated values")->delimiter(',');
    sweep_cmd->add_option("--seeds", sw.seeds, "Comma separated seeds")->delimiter(',');
    sweep_cmd->add_option("--mode", sw.mode, "offline-fixed | offline-mobile | online")
        ->check(CLI::IsMember({"offline-fixed", "offline-mobile", "online"}));
    sweep_cmd->add_option("--out", sw.out, "Directory for sweep.csv");
    sweep_cmd->add_flag("--no-reachability", sw.no_reachability, "Online runs without reachability");
    sweep_cmd->add_option("--lambda", sw.lambda, "Poisson mean group size");

    std::string verify_dir;
    auto* verify_cmd = app.add_subcommand("verify", "Re-check a saved result directory");
    verify_cmd->add_option("--out", verify_dir, "Result directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*run_cmd) return do_run(run, out);
        if (*sweep_cmd) return do_sweep(sw, out);
        if (*verify_cmd) return do_verify(verify_dir, out, err);
    } catch (const InfeasibleError& e) {
        err << "error: infeasible (" << e.family() << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace uavnoma
