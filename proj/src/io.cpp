#include "uavnoma/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace uavnoma {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& why) {
    throw ScenarioError(field + ": " + why);
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) schema_error(key, "expected a number");
    return j.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
    return obj.contains(key) ? number(obj.at(key), key) : fallback;
}

const json& required(const json& obj, const std::string& key) {
    if (!obj.contains(key)) schema_error(key, "missing required field");
    return obj.at(key);
}

int integer(const json& j, const std::string& key) {
    if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
        schema_error(key, "expected an integer");
    return static_cast<int>(j.get<double>());
}

Vec2 point(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2) schema_error(key, "expected [x, y]");
    return {number(j[0], key), number(j[1], key)};
}

json point_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

double round9(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

// Scalar, per-group list, or [g][n] matrix.
std::vector<std::vector<double>> rate_matrix(const json& j, const std::string& key, int G, int N, double unit) {
    std::vector<std::vector<double>> m(G, std::vector<double>(N));
    if (j.is_number()) {
        for (auto& row : m) std::fill(row.begin(), row.end(), number(j, key) * unit);
        return m;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != G) schema_error(key, "expected a number or one entry per group");
    for (int g = 0; g < G; ++g) {
        if (j[g].is_number()) {
            std::fill(m[g].begin(), m[g].end(), number(j[g], key) * unit);
        } else {
            if (!j[g].is_array() || static_cast<int>(j[g].size()) != N)
                schema_error(key, "each group row needs num_slots entries");
            for (int n = 0; n < N; ++n) m[g][n] = number(j[g][n], key) * unit;
        }
    }
    return m;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != columns)
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                        " columns");
        rows.push_back(std::move(cells));
    }
    return rows;
}

double to_double(const std::string& s, const fs::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(path.string() + ": bad number '" + s + "'");
    }
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

const std::set<std::string> kScenarioKeys = {
    "name",          "description",    "num_groups",     "users_per_group", "num_slots",   "horizon",
    "v_max",         "altitude",       "p_max",          "noise_power_db",  "noise_power", "pathloss_ref_db",
    "pathloss_ref",  "coverage_radius", "start_point",   "end_point",       "min_rate_bps_hz",
    "min_rate_nats", "eps_traj",       "eps_power",      "coord_offset",    "rng_seed",    "rate_slots",
    "limits",        "mobility",       "user_layout",    "users",           "mode",        "sweep"};

}  // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) schema_error("scenario", "expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kScenarioKeys.count(key)) schema_error(key, "unknown field");

    Scenario sc;
    ScenarioConfig& c = sc.config;
    if (j.contains("name")) c.name = j.at("name").get<std::string>();

    const json& upg = required(j, "users_per_group");
    if (upg.is_array()) {
        for (const auto& u : upg) c.users_per_group.push_back(integer(u, "users_per_group"));
        if (j.contains("num_groups") && integer(j.at("num_groups"), "num_groups") != c.num_groups())
            schema_error("num_groups", "disagrees with the length of users_per_group");
    } else {
        const int G = integer(required(j, "num_groups"), "num_groups");
        if (G < 1) schema_error("num_groups", "must be >= 1");
        c.users_per_group.assign(G, integer(upg, "users_per_group"));
    }
    c.num_slots = integer(required(j, "num_slots"), "num_slots");
    if (c.num_slots < 1) schema_error("num_slots", "must be >= 1");
    c.horizon = number(required(j, "horizon"), "horizon");
    c.v_max = number_or(j, "v_max", c.v_max);
    c.altitude = number_or(j, "altitude", c.altitude);
    c.p_max = number_or(j, "p_max", c.p_max);
    if (j.contains("noise_power") && j.contains("noise_power_db"))
        schema_error("noise_power", "give either noise_power or noise_power_db");
    if (j.contains("noise_power_db")) c.noise_power = db_to_linear(number(j.at("noise_power_db"), "noise_power_db"));
    c.noise_power = number_or(j, "noise_power", c.noise_power);
    if (j.contains("pathloss_ref") && j.contains("pathloss_ref_db"))
        schema_error("pathloss_ref", "give either pathloss_ref or pathloss_ref_db");
    if (j.contains("pathloss_ref_db"))
        c.pathloss_ref = db_to_linear(number(j.at("pathloss_ref_db"), "pathloss_ref_db"));
    c.pathloss_ref = number_or(j, "pathloss_ref", c.pathloss_ref);
    c.coverage_radius = number_or(j, "coverage_radius", c.coverage_radius);
    if (j.contains("start_point")) c.start_point = point(j.at("start_point"), "start_point");
    if (j.contains("end_point")) c.end_point = point(j.at("end_point"), "end_point");

    const int G = c.num_groups();
    if (j.contains("min_rate_bps_hz") && j.contains("min_rate_nats"))
        schema_error("min_rate_bps_hz", "give either min_rate_bps_hz or min_rate_nats");
    if (j.contains("min_rate_nats"))
        c.min_rate = rate_matrix(j.at("min_rate_nats"), "min_rate_nats", G, c.num_slots, 1.0);
    else if (j.contains("min_rate_bps_hz"))
        c.min_rate = rate_matrix(j.at("min_rate_bps_hz"), "min_rate_bps_hz", G, c.num_slots, std::log(2.0));
    else
        c.set_uniform_min_rate(0.0);

    c.eps_traj = number_or(j, "eps_traj", c.eps_traj);
    c.eps_power = number_or(j, "eps_power", c.eps_power);
    c.coord_offset = number_or(j, "coord_offset", 2.0 * c.coverage_radius + 1.0);
    if (j.contains("rng_seed")) {
        if (!j.at("rng_seed").is_number_unsigned() && !j.at("rng_seed").is_number_integer())
            schema_error("rng_seed", "expected a non-negative integer");
        c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    }
    if (j.contains("rate_slots")) {
        const std::string rs = j.at("rate_slots").get<std::string>();
        if (rs == "all")
            c.rate_slots = RateSlots::All;
        else if (rs == "all-but-last")
            c.rate_slots = RateSlots::AllButLast;
        else
            schema_error("rate_slots", "expected 'all' or 'all-but-last'");
    }
    if (j.contains("limits")) {
        const json& l = j.at("limits");
        for (const auto& [key, _] : l.items())
            if (key != "max_asm_iter" && key != "max_sca_iter" && key != "max_online_asm_iter")
                schema_error("limits." + key, "unknown field");
        if (l.contains("max_asm_iter")) c.limits.max_asm_iter = integer(l.at("max_asm_iter"), "limits.max_asm_iter");
        if (l.contains("max_sca_iter")) c.limits.max_sca_iter = integer(l.at("max_sca_iter"), "limits.max_sca_iter");
        if (l.contains("max_online_asm_iter"))
            c.limits.max_online_asm_iter = integer(l.at("max_online_asm_iter"), "limits.max_online_asm_iter");
    }
    if (j.contains("mobility")) {
        const json& m = j.at("mobility");
        for (const auto& [key, _] : m.items())
            if (key != "speed_range" && key != "lambda") schema_error("mobility." + key, "unknown field");
        if (m.contains("speed_range")) {
            const Vec2 r = point(m.at("speed_range"), "mobility.speed_range");
            sc.speed_min = r.x();
            sc.speed_max = r.y();
        }
        sc.lambda = number_or(m, "lambda", 0.0);
    }
    if (j.contains("user_layout")) {
        const std::string l = j.at("user_layout").get<std::string>();
        if (l == "per-group")
            sc.layout = UserLayout::PerGroup;
        else if (l == "pool")
            sc.layout = UserLayout::Pool;
        else
            schema_error("user_layout", "expected 'per-group' or 'pool'");
    }
    if (j.contains("users")) {
        const json& u = j.at("users");
        if (!u.is_array() || static_cast<int>(u.size()) != G) schema_error("users", "expected one list per group");
        for (int g = 0; g < G; ++g) {
            std::vector<Vec2> grp;
            for (const auto& p : u[g]) grp.push_back(point(p, "users"));
            if (static_cast<int>(grp.size()) != c.users_per_group[g])
                schema_error("users", "group " + std::to_string(g + 1) + " size differs from users_per_group");
            for (const Vec2& p : grp)
                if (p.norm() > c.coverage_radius + kTolGeom) schema_error("users", "position outside the coverage disk");
            sc.users.push_back(std::move(grp));
        }
    }
    if (j.contains("mode")) sc.mode = parse_run_mode(j.at("mode").get<std::string>());
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        sc.sweep_param = required(s, "param").get<std::string>();
        for (const auto& v : required(s, "values")) sc.sweep_values.push_back(number(v, "sweep.values"));
    }
    sc.mobility(RunMode::OfflineMobile).validate();
    c.validate();
    return sc;
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_json(const Scenario& sc) {
    const ScenarioConfig& c = sc.config;
    json j;
    j["name"] = c.name;
    j["users_per_group"] = c.users_per_group;
    j["num_slots"] = c.num_slots;
    j["horizon"] = c.horizon;
    j["v_max"] = c.v_max;
    j["altitude"] = c.altitude;
    j["p_max"] = c.p_max;
    j["noise_power"] = c.noise_power;
    j["pathloss_ref"] = c.pathloss_ref;
    j["coverage_radius"] = c.coverage_radius;
    j["start_point"] = point_json(c.start_point);
    j["end_point"] = point_json(c.end_point);
    j["min_rate_nats"] = c.min_rate;
    j["eps_traj"] = c.eps_traj;
    j["eps_power"] = c.eps_power;
    j["coord_offset"] = c.coord_offset;
    j["rng_seed"] = c.rng_seed;
    j["rate_slots"] = c.rate_slots == RateSlots::All ? "all" : "all-but-last";
    j["limits"] = {{"max_asm_iter", c.limits.max_asm_iter},
                   {"max_sca_iter", c.limits.max_sca_iter},
                   {"max_online_asm_iter", c.limits.max_online_asm_iter}};
    j["mobility"] = {{"speed_range", json::array({sc.speed_min, sc.speed_max})}, {"lambda", sc.lambda}};
    j["user_layout"] = sc.layout == UserLayout::Pool ? "pool" : "per-group";
    if (!sc.users.empty()) {
        json users = json::array();
        for (const auto& grp : sc.users) {
            json g = json::array();
            for (const Vec2& p : grp) g.push_back(point_json(p));
            users.push_back(g);
        }
        j["users"] = users;
    }
    j["mode"] = to_string(sc.mode);
    if (!sc.sweep_param.empty()) j["sweep"] = {{"param", sc.sweep_param}, {"values", sc.sweep_values}};
    return j.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const fs::path& path) {
    auto out = open_out(path);
    out << scenario_json(sc);
}

void save_result(const RunResult& r, const Scenario& sc, const UserTrace& trace, const fs::path& dir,
                 const SaveOptions& opt) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    const int N = r.trajectory.num_slots();
    const int G = static_cast<int>(r.powers.p.rows());

    {
        auto out = open_out(dir / "trajectory.csv");
        out << "n,x,y\n";
        for (int n = 0; n <= N; ++n)
            out << n << "," << format_number(r.trajectory.points[n].x()) << ","
                << format_number(r.trajectory.points[n].y()) << "\n";
    }
    {
        auto out = open_out(dir / "powers.csv");
        out << "n,g,p,C_nats,C_bits\n";
        for (int s = 0; s < N; ++s)
            for (int g = 0; g < G; ++g)
                out << s + 1 << "," << g + 1 << "," << format_number(r.powers.p(g, s)) << ","
                    << format_number(r.rates(g, s)) << "," << format_number(nats_to_bits(r.rates(g, s))) << "\n";
    }
    {
        auto out = open_out(dir / "trace.csv");
        out << "n,g,u,x,y\n";
        for (int s = 0; s < trace.num_slots(); ++s)
            for (int g = 0; g < static_cast<int>(trace.positions[s].size()); ++g)
                for (std::size_t u = 0; u < trace.positions[s][g].size(); ++u)
                    out << s + 1 << "," << g + 1 << "," << u + 1 << ","
                        << format_number(trace.positions[s][g][u].x()) << ","
                        << format_number(trace.positions[s][g][u].y()) << "\n";
    }
    {
        auto out = open_out(dir / "run_log.csv");
        out << "stage,outer,inner,movement,objective\n";
        for (const auto& l : r.log)
            out << l.stage << "," << l.outer << "," << l.inner << "," << format_number(l.movement) << ","
                << format_number(l.objective) << "\n";
    }
    save_scenario(sc, dir / "scenario.json");
    {
        json s;
        s["mode"] = r.mode;
        s["seed"] = r.seed;
        s["reachability"] = opt.reachability;
        s["objective_nats"] = round9(r.objective());
        s["objective_bits"] = round9(nats_to_bits(r.objective()));
        json hist = json::array();
        for (double v : r.objective_history) hist.push_back(round9(v));
        s["objective_history"] = hist;
        s["converged"] = r.converged;
        s["iterations"] = r.iterations;
        s["qos_relaxed"] = r.qos_relaxed;
        s["qos_scale"] = round9(r.qos_scale);
        s["infeasible_slots"] = r.infeasible_slots;
        s["num_slots"] = N;
        s["num_groups"] = G;
        json cfg = json::parse(scenario_json(sc));
        cfg["rng_seed"] = r.seed;
        // Echo with the same 9-digit rounding as every other number here.
        std::function<void(json&)> round_all = [&](json& v) {
            if (v.is_number_float()) v = round9(v.get<double>());
            else if (v.is_structured())
                for (auto& child : v) round_all(child);
        };
        round_all(cfg);
        s["config"] = cfg;
        auto out = open_out(dir / "summary.json");
        out << s.dump(2) << "\n";
    }
    if (r.mode.rfind("online", 0) == 0) {
        fs::create_directories(dir / "snapshots", ec);
        for (int n = 1; n <= N; ++n) {
            json snap;
            snap["slot"] = n;
            snap["uav_start"] = {round9(r.trajectory.points[n - 1].x()), round9(r.trajectory.points[n - 1].y())};
            snap["uav"] = {round9(r.trajectory.points[n].x()), round9(r.trajectory.points[n].y())};
            json users = json::array();
            for (const auto& grp : trace.slot(n - 1)) {
                json g = json::array();
                for (const Vec2& p : grp) g.push_back({round9(p.x()), round9(p.y())});
                users.push_back(g);
            }
            snap["users"] = users;
            json p = json::array(), c = json::array();
            for (int g = 0; g < G; ++g) {
                p.push_back(round9(r.powers.p(g, n - 1)));
                c.push_back(round9(r.rates(g, n - 1)));
            }
            snap["powers"] = p;
            snap["rates_nats"] = c;
            char name[32];
            std::snprintf(name, sizeof name, "slot_%02d.json", n);
            auto out = open_out(dir / "snapshots" / name);
            out << snap.dump(2) << "\n";
        }
    }
}

LoadedResult load_result(const fs::path& dir) {
    LoadedResult lr;
    lr.scenario = load_scenario(dir / "scenario.json");
    const json summary = read_json(dir / "summary.json");
    lr.objective = summary.at("objective_nats").get<double>();
    lr.qos_scale = summary.value("qos_scale", 1.0);
    lr.mode = summary.value("mode", std::string("offline-fixed"));
    lr.reachability = summary.value("reachability", true);
    if (summary.contains("seed")) lr.scenario.config.rng_seed = summary.at("seed").get<std::uint64_t>();
    const int G = lr.scenario.config.num_groups();
    const int N = lr.scenario.config.num_slots;

    const fs::path tpath = dir / "trajectory.csv";
    const auto trows = read_csv(tpath, 3);
    if (static_cast<int>(trows.size()) != N + 1)
        throw Error(tpath.string() + ": expected " + std::to_string(N + 1) + " rows, found " +
                    std::to_string(trows.size()));
    for (const auto& row : trows) lr.trajectory.points.emplace_back(to_double(row[1], tpath), to_double(row[2], tpath));

    const fs::path ppath = dir / "powers.csv";
    lr.powers.p = Eigen::MatrixXd::Zero(G, N);
    lr.rates = Eigen::MatrixXd::Zero(G, N);
    const auto prows = read_csv(ppath, 5);
    if (static_cast<int>(prows.size()) != G * N) throw Error(ppath.string() + ": expected one row per slot and group");
    for (const auto& row : prows) {
        const int n = static_cast<int>(to_double(row[0], ppath));
        const int g = static_cast<int>(to_double(row[1], ppath));
        if (n < 1 || n > N || g < 1 || g > G) throw Error(ppath.string() + ": index out of range");
        lr.powers.p(g - 1, n - 1) = to_double(row[2], ppath);
        lr.rates(g - 1, n - 1) = to_double(row[3], ppath);
    }

    const fs::path rpath = dir / "trace.csv";
    lr.trace.positions.assign(N, std::vector<std::vector<Vec2>>(G));
    for (const auto& row : read_csv(rpath, 5)) {
        const int n = static_cast<int>(to_double(row[0], rpath));
        const int g = static_cast<int>(to_double(row[1], rpath));
        if (n < 1 || n > N || g < 1 || g > G) throw Error(rpath.string() + ": index out of range");
        lr.trace.positions[n - 1][g - 1].emplace_back(to_double(row[3], rpath), to_double(row[4], rpath));
    }
    return lr;
}

VerifyReport verify_result(const fs::path& dir) {
    VerifyReport rep;
    const LoadedResult lr = load_result(dir);
    ScenarioConfig cfg = lr.scenario.config;
    for (auto& row : cfg.min_rate)
        for (double& c : row) c *= lr.qos_scale;
    const bool free_end = !lr.reachability;
    // The tables carry 9 significant digits; allow for that rounding.
    FeasibilityTolerances tol;
    tol.geom += 1e-8 * (cfg.coverage_radius + cfg.coord_offset);
    tol.power += 1e-8 * cfg.p_max * cfg.num_groups();
    tol.rate += 1e-8;
    const FeasibilityReport feas = check_feasibility(lr.trajectory, lr.powers, lr.trace, cfg, tol);
    for (const auto& v : feas.violations) {
        if (free_end && v.kind == ViolationKind::Endpoint && v.slot == cfg.num_slots) continue;
        std::ostringstream os;
        os << to_string(v.kind) << " constraint violated at slot " << v.slot;
        if (v.group >= 0) os << " group " << v.group + 1;
        os << " by " << v.magnitude;
        rep.problems.push_back(os.str());
    }
    for (const auto& slot : lr.trace.positions)
        for (const auto& grp : slot)
            if (grp.empty()) rep.problems.push_back("trace has an empty group");
    if (!rep.ok()) return rep;

    const Eigen::MatrixXd rates = slot_rates(lr.trajectory, lr.powers, lr.trace, cfg);
    for (int g = 0; g < rates.rows(); ++g)
        for (int s = 0; s < rates.cols(); ++s)
            if (std::abs(rates(g, s) - lr.rates(g, s)) > 1e-6 * std::max(1.0, std::abs(rates(g, s)))) {
                std::ostringstream os;
                os << "stored rate at slot " << s + 1 << " group " << g + 1 << " is " << lr.rates(g, s)
                   << ", model gives " << rates(g, s);
                rep.problems.push_back(os.str());
            }
    const double obj = rates.sum();
    if (std::abs(obj - lr.objective) > 1e-6 * std::max(1.0, std::abs(obj))) {
        std::ostringstream os;
        os << "summary objective " << lr.objective << " differs from recomputed " << obj;
        rep.problems.push_back(os.str());
    }
    return rep;
}

void write_sweep_table(const std::vector<SweepRow>& rows, const std::string& param, std::ostream& os) {
    os << param << ",seed,objective_nats,objective_bits,converged,qos_relaxed,iterations,error\n";
    for (const auto& r : rows) {
        std::string err = r.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        os << format_number(r.value) << "," << r.seed << "," << format_number(r.objective) << ","
           << format_number(nats_to_bits(r.objective)) << "," << (r.converged ? 1 : 0) << ","
           << (r.qos_relaxed ? 1 : 0) << "," << r.iterations << "," << err << "\n";
    }
}

}  // namespace uavnoma
