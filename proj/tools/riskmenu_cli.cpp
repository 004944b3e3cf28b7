// Batch front-end: reads one JSON config, runs one command, writes CSV or JSON.
//
// Exit codes: 0 ok, 2 config or usage error, 3 numerical failure.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskmenu/riskmenu.hpp"

namespace {

using json = nlohmann::json;
using namespace riskmenu;

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kDefaultSeed = 20240607;

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "config" : path, "must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(join(path, key), "unknown key");
    }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required field");
    return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
}

double number(const json& obj, const std::string& path, const std::string& key) {
    return as_number(require(obj, path, key), join(path, key));
}

std::uint64_t as_count(const json& v, const std::string& path, std::uint64_t min) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(path, "must be an integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) throw ConfigError(path, "must be non-negative");
    const auto x = v.get<std::uint64_t>();
    if (x < min) throw ConfigError(path, "must be >= " + std::to_string(min));
    return x;
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path, "must be a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// ---------------------------------------------------------------- config

struct Sections {
    const json* market = nullptr;
    const json* distribution = nullptr;
    const json* planner = nullptr;
    const json* solver = nullptr;
    const json* output = nullptr;
    const json* sweep = nullptr;
    const json* simulate = nullptr;
};

Sections sections(const json& cfg) {
    check_keys(cfg, "", {"market", "distribution", "planner", "solver", "output", "sweep", "simulate"});
    Sections s;
    auto get = [&](const char* k) { return cfg.contains(k) ? &cfg.at(k) : nullptr; };
    s.market = get("market");
    s.distribution = get("distribution");
    s.planner = get("planner");
    s.solver = get("solver");
    s.output = get("output");
    s.sweep = get("sweep");
    s.simulate = get("simulate");
    if (s.planner) check_keys(*s.planner, "planner", {"eta"});
    if (s.solver) check_keys(*s.solver, "solver", {"n", "seed", "max_iterations", "boundary_tolerance"});
    if (s.output) check_keys(*s.output, "output", {"format", "path"});
    if (s.sweep) check_keys(*s.sweep, "sweep", {"b_over_a", "R"});
    if (s.simulate) check_keys(*s.simulate, "simulate", {"m", "strategy", "paths", "gammas"});
    return s;
}

const json& need(const json* section, const char* name) {
    if (!section) throw ConfigError(name, "missing required section");
    return *section;
}

MarketParams parse_market(const json& m) {
    check_keys(m, "market", {"r", "mu", "sigma", "T"});
    const double r = number(m, "market", "r");
    const auto& mu_v = require(m, "market", "mu");
    if (mu_v.is_array()) throw ConfigError("market.mu", "must be a number for a single-asset market");
    const double mu = as_number(mu_v, "market.mu");
    const double sigma = number(m, "market", "sigma");
    const double T = number(m, "market", "T");
    if (!(sigma > 0.0)) throw ConfigError("market.sigma", "must be > 0");
    if (!(mu > r)) throw ConfigError("market.mu", "must exceed market.r");
    if (!(T > 0.0)) throw ConfigError("market.T", "must be > 0");
    return MarketParams(r, mu, sigma, T);
}

struct MultiMarketConfig {
    MultiAssetMarket market;
    double T;
};

MultiMarketConfig parse_multi_market(const json& m) {
    check_keys(m, "market", {"r", "mu", "sigma", "T"});
    const double r = number(m, "market", "r");
    const auto mu = number_list(require(m, "market", "mu"), "market.mu");
    const auto& sig = require(m, "market", "sigma");
    const auto d = static_cast<Eigen::Index>(mu.size());
    if (!sig.is_array() || static_cast<Eigen::Index>(sig.size()) != d)
        throw ConfigError("market.sigma", "must be a d x d array matching market.mu");
    Eigen::MatrixXd vol(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const std::string row_path = "market.sigma[" + std::to_string(i) + "]";
        const auto row = number_list(sig[i], row_path);
        if (static_cast<Eigen::Index>(row.size()) != d) throw ConfigError(row_path, "must have length d");
        for (Eigen::Index j = 0; j < d; ++j) vol(i, j) = row[j];
    }
    Eigen::VectorXd mu_v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(mu[i] > r)) throw ConfigError("market.mu[" + std::to_string(i) + "]", "must exceed market.r");
        mu_v[i] = mu[i];
    }
    const double T = number(m, "market", "T");
    if (!(T > 0.0)) throw ConfigError("market.T", "must be > 0");
    return {MultiAssetMarket(r, mu_v, vol), T};
}

TypeDistribution parse_distribution(const json& d) {
    if (!d.is_object()) throw ConfigError("distribution", "must be an object");
    const auto& type_v = require(d, "distribution", "type");
    if (!type_v.is_string()) throw ConfigError("distribution.type", "must be a string");
    const auto type = type_v.get<std::string>();
    auto positive = [&](const char* key) {
        const double v = number(d, "distribution", key);
        if (!(v > 0.0)) throw ConfigError(join("distribution", key), "must be > 0");
        return v;
    };
    if (type == "uniform") {
        check_keys(d, "distribution", {"type", "a", "b"});
        const double a = positive("a"), b = positive("b");
        if (!(b >= a)) throw ConfigError("distribution.b", "must be >= distribution.a");
        return TypeDistribution::uniform(a, b);
    }
    if (type == "point") {
        check_keys(d, "distribution", {"type", "x"});
        return TypeDistribution::point(positive("x"));
    }
    if (type == "two_point") {
        check_keys(d, "distribution", {"type", "a", "b", "p"});
        const double a = positive("a"), b = positive("b");
        if (!(b >= a)) throw ConfigError("distribution.b", "must be >= distribution.a");
        const double p = number(d, "distribution", "p");
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("distribution.p", "must lie in [0, 1]");
        return TypeDistribution::two_point(a, b, p);
    }
    if (type == "density") {
        check_keys(d, "distribution", {"type", "knots"});
        const auto& k = require(d, "distribution", "knots");
        if (!k.is_array()) throw ConfigError("distribution.knots", "must be an array of [gamma, density] pairs");
        std::vector<std::pair<double, double>> knots;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const std::string p = "distribution.knots[" + std::to_string(i) + "]";
            const auto pair = number_list(k[i], p);
            if (pair.size() != 2) throw ConfigError(p, "must be a [gamma, density] pair");
            knots.emplace_back(pair[0], pair[1]);
        }
        try {
            return TypeDistribution::density(knots);
        } catch (const DomainError& e) {
            throw ConfigError("distribution.knots", e.what());
        }
    }
    throw ConfigError("distribution.type", "must be one of uniform, point, two_point, density");
}

PlannerPreferences parse_planner(const json* p) {
    if (!p || !p->contains("eta")) return PlannerPreferences::logarithmic();
    const double eta = number(*p, "planner", "eta");
    if (!(eta >= 0.0)) throw ConfigError("planner.eta", "must be >= 0");
    return PlannerPreferences::power(eta);
}

std::size_t parse_n(const json* solver) {
    const auto& s = need(solver, "solver");
    return static_cast<std::size_t>(as_count(require(s, "solver", "n"), "solver.n", 1));
}

GroupingOptions parse_grouping(const json* solver) {
    GroupingOptions opt;
    if (!solver) return opt;
    if (solver->contains("seed")) opt.seed = as_count(solver->at("seed"), "solver.seed", 0);
    if (solver->contains("max_iterations"))
        opt.max_iterations = static_cast<int>(as_count(solver->at("max_iterations"), "solver.max_iterations", 1));
    if (solver->contains("boundary_tolerance")) {
        opt.boundary_tolerance = as_number(solver->at("boundary_tolerance"), "solver.boundary_tolerance");
        if (!(opt.boundary_tolerance > 0.0)) throw ConfigError("solver.boundary_tolerance", "must be > 0");
    }
    return opt;
}

StepStrategy parse_strategy(const json& s, const std::string& path) {
    check_keys(s, path, {"breakpoints", "values"});
    const auto t = number_list(require(s, path, "breakpoints"), join(path, "breakpoints"));
    const auto v = number_list(require(s, path, "values"), join(path, "values"));
    try {
        return StepStrategy(t, v);
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
}

// ---------------------------------------------------------------- output

std::string fmt12(double x) {
    if (std::isnan(x)) return "";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, double>> summary; ///< emitted as "name,value" rows after the data
};

std::string cell_csv(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return fmt12(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return json_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(const json& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(cfg.dump()));
    return buf;
}

std::string render_csv(const Table& t, const std::string& hash) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_csv(row[i]);
        os << "\n";
    }
    for (const auto& [name, value] : t.summary) os << name << "," << fmt12(value) << "\n";
    os << "# version=" << kVersion << " config_hash=" << hash << "\n";
    return os.str();
}

json table_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
        rows.push_back(obj);
    }
    json summary = json::object();
    for (const auto& [name, value] : t.summary) summary[name] = json_number(value);
    return {{"columns", t.columns}, {"rows", rows}, {"summary", summary}};
}

/// A command result: a JSON document, and a table when the result is tabular.
struct Report {
    json doc;
    std::optional<Table> table;
};

std::string render(Report rep, const std::string& format, const std::string& hash) {
    if (format == "csv") {
        if (!rep.table) {
            // Flat JSON objects become a one-row table.
            Table t;
            std::vector<Cell> row;
            for (const auto& [k, v] : rep.doc.items()) {
                if (!v.is_number()) continue;
                t.columns.push_back(k);
                row.push_back(v.is_number_integer() ? Cell(v.get<std::int64_t>()) : Cell(v.get<double>()));
            }
            t.rows.push_back(row);
            rep.table = std::move(t);
        }
        return render_csv(*rep.table, hash);
    }
    json doc = rep.table ? table_json(*rep.table) : rep.doc;
    if (rep.table)
        for (const auto& [k, v] : rep.doc.items()) doc[k] = v;
    doc["meta"] = {{"version", kVersion}, {"config_hash", hash}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- commands

Report cmd_solve_single(const Sections& s) {
    const auto mp = parse_market(need(s.market, "market"));
    const auto F = parse_distribution(need(s.distribution, "distribution"));
    const auto prefs = parse_planner(s.planner);
    const auto sol = solve(mp, F, prefs);
    json maxima = json::array();
    for (const auto& lm : sol.diagnostics.local_maxima) maxima.push_back({{"m", lm.m}, {"objective", lm.objective}});
    return {{{"m_star", sol.m_star},
             {"gamma_star", sol.gamma_star},
             {"objective", sol.objective_value},
             {"iterations", sol.diagnostics.iterations},
             {"residual", sol.diagnostics.residual},
             {"local_maxima", maxima}},
            std::nullopt};
}

Report cmd_solve_menu(const Sections& s) {
    const auto mp = parse_market(need(s.market, "market"));
    const auto F = parse_distribution(need(s.distribution, "distribution"));
    const auto prefs = parse_planner(s.planner);
    const auto n = parse_n(s.solver);
    const auto sol = solve_grouping(mp, F, prefs, n, parse_grouping(s.solver));
    Table t{{"i", "g_lo", "g_hi", "Gamma_i", "m_i"}, {}, {{"welfare", sol.welfare}}};
    for (std::size_t i = 0; i < n; ++i)
        t.rows.push_back({static_cast<std::int64_t>(i + 1), sol.partition[i], sol.partition[i + 1],
                          sol.targeted_types[i], sol.menu[i]});
    json doc = {{"welfare", sol.welfare},
                {"iterations", sol.diagnostics.iterations},
                {"converged", sol.diagnostics.converged},
                {"multistart_used", sol.diagnostics.multistart_used}};
    return {doc, t};
}

Report cmd_robust_menu(const Sections& s) {
    const auto mp = parse_market(need(s.market, "market"));
    const auto F = parse_distribution(need(s.distribution, "distribution"));
    const auto n = parse_n(s.solver);
    const auto rm = robust_menu(mp, F.support_low(), F.support_high(), n);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Table t{{"i", "h_i", "Gamma_i", "g_i", "m_i"}, {}, {{"R_star", rm.regret_guarantee}}};
    t.rows.push_back({std::int64_t{0}, rm.h[0], nan, rm.boundaries[0], nan});
    for (std::size_t i = 1; i <= n; ++i)
        t.rows.push_back({static_cast<std::int64_t>(i), rm.h[i], rm.targeted_types[i - 1], rm.boundaries[i],
                          rm.decisions[i - 1]});
    return {{{"R_star", rm.regret_guarantee}}, t};
}

Report cmd_bounds(const Sections& s) {
    const auto F = parse_distribution(need(s.distribution, "distribution"));
    const auto n_max = parse_n(s.solver);
    Table t{{"n", "E_n_star", "bound_factor", "E_inf_star", "ratio"}, {}, {}};
    for (std::size_t n = 1; n <= n_max; ++n) {
        const auto rep = bound_report(F, n);
        t.rows.push_back({static_cast<std::int64_t>(n), rep.e_value, rep.bound_factor, rep.e_infinity, rep.ratio});
    }
    return {json::object(), t};
}

Report cmd_min_menu_size(const Sections& s) {
    const auto& sw = need(s.sweep, "sweep");
    const auto ratios = number_list(require(sw, "sweep", "b_over_a"), "sweep.b_over_a");
    const auto Rs = number_list(require(sw, "sweep", "R"), "sweep.R");
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (!(ratios[i] >= 1.0)) throw ConfigError("sweep.b_over_a[" + std::to_string(i) + "]", "must be >= 1");
    for (std::size_t i = 0; i < Rs.size(); ++i)
        if (!(Rs[i] >= 1.0)) throw ConfigError("sweep.R[" + std::to_string(i) + "]", "must be >= 1");
    Table t{{"b_over_a", "R", "n_bound", "n_practical"}, {}, {}};
    for (double q : ratios)
        for (double R : Rs) {
            const double nb = min_menu_size(1.0, q, R);
            const double np = std::isinf(nb) ? nb : std::max(1.0, std::ceil(nb));
            t.rows.push_back({q, R, nb, np});
        }
    return {json::object(), t};
}

Report cmd_comparative_statics(const Sections& s) {
    const auto& sw = need(s.sweep, "sweep");
    const auto ratios = number_list(require(sw, "sweep", "b_over_a"), "sweep.b_over_a");
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (!(ratios[i] >= 1.0)) throw ConfigError("sweep.b_over_a[" + std::to_string(i) + "]", "must be >= 1");
    const auto n = parse_n(s.solver);
    Table t{{"b_over_a", "i", "r_i", "rho_i"}, {}, {}};
    for (double q : ratios) {
        const auto cs = comparative_statics(1.0, q, n);
        for (const auto& row : cs.rows) t.rows.push_back({q, static_cast<std::int64_t>(row.i), row.r, row.rho});
    }
    return {json::object(), t};
}

struct SimulateFlags {
    std::optional<double> m;
    std::optional<std::string> strategy_path;
    std::optional<std::uint64_t> paths;
    std::vector<double> gammas;
};

/// Writes simulate flags into the config so they are validated and hashed like config values.
void apply_simulate_flags(json& cfg, const SimulateFlags& flags) {
    json& sim = cfg["simulate"];
    if (flags.m) {
        sim.erase("strategy");
        sim["m"] = *flags.m;
    } else if (flags.strategy_path) {
        std::ifstream in(*flags.strategy_path);
        if (!in) throw ConfigError("--strategy", "cannot open " + *flags.strategy_path);
        try {
            sim["strategy"] = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("--strategy", e.what());
        }
        sim.erase("m");
    }
    if (flags.paths) sim["paths"] = *flags.paths;
    if (!flags.gammas.empty()) sim["gammas"] = flags.gammas;
}

Report cmd_simulate(const Sections& s, std::uint64_t seed) {
    const auto mp = parse_market(need(s.market, "market"));
    const json& sim = need(s.simulate, "simulate");

    if (sim.contains("m") && sim.contains("strategy"))
        throw ConfigError("simulate.strategy", "give either simulate.m or simulate.strategy");
    std::optional<StepStrategy> strategy;
    json strategy_doc;
    if (sim.contains("m")) {
        const double m = as_number(sim.at("m"), "simulate.m");
        strategy = StepStrategy::constant(m, mp.T());
        strategy_doc = {{"m", m}};
    } else if (sim.contains("strategy")) {
        strategy = parse_strategy(sim.at("strategy"), "simulate.strategy");
        strategy_doc = sim.at("strategy");
    } else {
        throw ConfigError("simulate.m", "an exposure (--m, --strategy, simulate.m or simulate.strategy) is required");
    }
    if (std::abs(strategy->horizon() - mp.T()) > 1e-12 * mp.T())
        throw ConfigError("simulate.strategy.breakpoints", "must end at market.T");

    const std::uint64_t paths = sim.contains("paths") ? as_count(sim.at("paths"), "simulate.paths", 2) : 1000000;
    const std::vector<double> gammas =
        sim.contains("gammas") ? number_list(sim.at("gammas"), "simulate.gammas") : std::vector<double>{1.0, 2.0, 5.0};
    for (std::size_t i = 0; i < gammas.size(); ++i)
        if (!(gammas[i] > 0.0)) throw ConfigError("simulate.gammas[" + std::to_string(i) + "]", "must be > 0");

    const auto logs = simulate_log_terminal_wealth(mp, *strategy, paths, seed);
    json rows = json::array();
    Table t{{"gamma", "sample_ce", "closed_form_ce", "std_error", "z_score"}, {}, {}};
    for (double g : gammas) {
        const auto ce = sample_certainty_equivalent(logs, g);
        const double exact = ce_time_varying(mp, g, *strategy);
        const double diff = ce.value - exact;
        const double z = ce.std_error > 0.0 ? diff / ce.std_error
                                            : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        rows.push_back({{"gamma", g},
                        {"sample_ce", ce.value},
                        {"closed_form_ce", exact},
                        {"std_error", ce.std_error},
                        {"z_score", json_number(z)}});
        t.rows.push_back({g, ce.value, exact, ce.std_error, z});
    }
    json doc = {{"paths", paths}, {"seed", seed}, {"strategy", strategy_doc}, {"gammas", rows}};
    return {doc, t};
}

Report cmd_reduce_market(const Sections& s) {
    const auto mm = parse_multi_market(need(s.market, "market"));
    const auto red = reduce_to_single_asset(mm.market, mm.T);
    const auto tau = tangency_portfolio(mm.market);
    std::vector<double> tv(tau.data(), tau.data() + tau.size());
    json doc = {{"market", {{"r", red.r()}, {"mu", red.mu()}, {"sigma", red.sigma()}, {"T", red.T()}}},
                {"k", effective_sharpe_squared(mm.market)},
                {"tangency", tv},
                {"condition_number", mm.market.condition_number()}};
    Table t{{"r", "mu", "sigma", "T", "k"}, {{red.r(), red.mu(), red.sigma(), red.T(), doc["k"].get<double>()}}, {}};
    for (std::size_t i = 0; i < tv.size(); ++i) t.summary.emplace_back("tangency_" + std::to_string(i + 1), tv[i]);
    return {doc, t};
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal and robust decision menus for heterogeneous CRRA agents"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Common {
        std::string config;
        std::string out;
        std::string format;
        std::optional<std::uint64_t> seed;
    } common;
    SimulateFlags sim_flags;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve-single", "One-size-fits-all decision for the configured planner"},
        {"solve-menu", "Optimal n-cell risk grouping and its decision menu"},
        {"robust-menu", "Minimax-regret menu for types known only to lie in the distribution's support"},
        {"bounds", "Welfare-loss bounds E_n*, bound factor and E_inf* for n = 1..solver.n"},
        {"min-menu-size", "Menu size bound over sweep.b_over_a x sweep.R"},
        {"comparative-statics", "Relative robust boundary and type locations over sweep.b_over_a"},
        {"simulate", "Monte Carlo certainty equivalents against closed forms"},
        {"reduce-market", "Reduce a multi-asset market to its tangency asset"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", common.config, "JSON config file")->required();
        sub->add_option("--out", common.out, "Output path (default: output.path or stdout)");
        sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", common.seed, "Random seed (overrides solver.seed)");
        if (name == "simulate") {
            sub->add_option("--m", sim_flags.m, "Constant exposure");
            sub->add_option("--strategy", sim_flags.strategy_path, "JSON file with breakpoints and values");
            sub->add_option("--paths", sim_flags.paths, "Number of simulated paths");
            sub->add_option("--gamma", sim_flags.gammas, "Risk types (comma separated)")->delimiter(',');
        }
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string command;
    for (auto* sub : subs)
        if (sub->parsed()) command = sub->get_name();

    try {
        json cfg = load_config(common.config);
        const Sections s = sections(cfg);
        std::uint64_t seed = kDefaultSeed;
        if (s.solver && s.solver->contains("seed")) seed = as_count(s.solver->at("seed"), "solver.seed", 0);
        if (common.seed) {
            seed = *common.seed;
            cfg["solver"]["seed"] = seed;
        }
        if (command == "simulate") apply_simulate_flags(cfg, sim_flags);
        const Sections eff = sections(cfg);

        std::string format, out_path;
        if (eff.output) {
            if (eff.output->contains("format")) {
                const auto& f = eff.output->at("format");
                if (!f.is_string() || (f != "csv" && f != "json"))
                    throw ConfigError("output.format", "must be \"csv\" or \"json\"");
                format = f.get<std::string>();
            }
            if (eff.output->contains("path")) {
                if (!eff.output->at("path").is_string()) throw ConfigError("output.path", "must be a string");
                out_path = eff.output->at("path").get<std::string>();
            }
        }
        if (!common.format.empty()) format = common.format;
        if (!common.out.empty()) out_path = common.out;

        Report rep;
        bool tabular = true;
        if (command == "solve-single") rep = cmd_solve_single(eff), tabular = false;
        else if (command == "solve-menu") rep = cmd_solve_menu(eff);
        else if (command == "robust-menu") rep = cmd_robust_menu(eff);
        else if (command == "bounds") rep = cmd_bounds(eff);
        else if (command == "min-menu-size") rep = cmd_min_menu_size(eff);
        else if (command == "comparative-statics") rep = cmd_comparative_statics(eff);
        else if (command == "simulate") rep = cmd_simulate(eff, seed), tabular = false;
        else if (command == "reduce-market") rep = cmd_reduce_market(eff), tabular = false;
        if (format.empty()) format = tabular ? "csv" : "json";
        if (!tabular && format == "json") rep.table.reset();

        const std::string text = render(std::move(rep), format, hash_hex(cfg));
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw ConfigError("output.path", "cannot write " + out_path);
            out << text;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error at " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
