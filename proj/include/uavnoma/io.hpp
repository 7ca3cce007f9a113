#pragma once

// Scenario files (JSON), result directories (CSV tables + JSON summary)
// and re-verification of saved results.
//
// Result directory layout:
//   trajectory.csv   n,x,y                      one row per breaking point
//   powers.csv       n,g,p,C_nats,C_bits        one row per slot and group
//   trace.csv        n,g,u,x,y                  user positions per slot
//   run_log.csv      stage,outer,inner,movement,objective
//   summary.json     objective history, flags, seed, config echo
//   scenario.json    the scenario as run, full precision
//   snapshots/slot_NN.json   online runs only
// Numbers in tables and the summary carry 9 significant digits.

#include "uavnoma/model.hpp"
#include "uavnoma/runner.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace uavnoma {

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text);
// Full-precision JSON; parse_scenario(scenario_json(s)) reproduces s.
std::string scenario_json(const Scenario& sc);
void save_scenario(const Scenario& sc, const std::filesystem::path& path);

struct SaveOptions {
    bool reachability = true;
};

void save_result(const RunResult& result, const Scenario& sc, const UserTrace& trace,
                 const std::filesystem::path& dir, const SaveOptions& opt = {});

struct LoadedResult {
    Scenario scenario;
    Trajectory trajectory;
    PowerSchedule powers;
    Eigen::MatrixXd rates;  // as written in powers.csv
    UserTrace trace;
    double objective = 0.0;  // summary value
    double qos_scale = 1.0;
    std::string mode;
    bool reachability = true;
};

LoadedResult load_result(const std::filesystem::path& dir);

struct VerifyReport {
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

// Feasibility of the saved schedule plus agreement between the stored
// rates/objective and a fresh evaluation of the model.
VerifyReport verify_result(const std::filesystem::path& dir);

void write_sweep_table(const std::vector<SweepRow>& rows, const std::string& param, std::ostream& os);

// printf("%.9g")
std::string format_number(double v);

}  // namespace uavnoma
