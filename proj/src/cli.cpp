#include "riskbandit/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "riskbandit/error.hpp"
#include "riskbandit/risk.hpp"
#include "riskbandit/sim.hpp"

#ifndef RISKBANDIT_VERSION
#define RISKBANDIT_VERSION "unknown"
#endif

namespace riskbandit::cli {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// "name:args" -> {name, args}; args empty when there is no colon.
std::pair<std::string, std::string> head_tail(const std::string& text) {
    const auto t = trim(text);
    const auto c = t.find(':');
    if (c == std::string::npos) return {t, ""};
    return {trim(t.substr(0, c)), trim(t.substr(c + 1))};
}

std::vector<double> args_of(const std::string& args, std::size_t expected, const std::string& what) {
    auto v = parse_number_list(args, what);
    if (v.size() != expected)
        throw InputError(what + ": expected " + std::to_string(expected) + " parameter(s), got " +
                         std::to_string(v.size()));
    return v;
}

risk::PowerUtility power_utility(const Params& p, const std::string& prefix) {
    return {p.number_or(prefix + "_exponent", 1.0), p.number_or(prefix + "_scale", 1.0)};
}

// ----- INI configs ---------------------------------------------------------

using Sections = std::map<std::string, Params>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"experiment", {"kind", "name", "seed", "trials", "output_dir", "workers"}},
        {"model", {"arm"}},
        {"instance", {"arms", "sigma"}},
        {"risk",
         {"measure", "gamma", "alpha", "spectrum", "utility", "threshold", "tol", "bracket", "gain_exponent",
          "gain_scale", "loss_exponent", "loss_scale", "w_plus", "w_minus", "holder_constant", "holder_order",
          "truncation"}},
        {"bound",
         {"family", "gamma", "sigma", "lipschitz", "alpha", "eta", "delta", "spectrum_bound", "lipschitz_u",
          "growth_u", "holder_constant", "holder_order", "utility_bound", "auto_truncation"}},
        {"grid", {"points", "n", "target"}},
        {"policy", {"name", "gamma", "horizon", "trace"}},
        {"bai", {"policy", "alpha", "m", "budgets"}},
        {"demo", {"eps"}},
    };
    return s;
}

Sections load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file '" + path + "'");
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    Sections out;
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end()) {
            if (body.empty()) throw InputError("unknown key '" + section + "' outside any section");
            throw InputError("unknown section '" + section + "'");
        }
        Params p{section, {}};
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw InputError("unknown key '" + section + "." + key + "'");
            p.values[key] = trim(value.data());
        }
        out[section] = std::move(p);
    }
    return out;
}

const Params& section(const Sections& s, const std::string& name) {
    const auto it = s.find(name);
    if (it == s.end()) throw InputError("missing section [" + name + "]");
    return it->second;
}

// ----- subcommands ---------------------------------------------------------

struct FlagSet {
    std::map<std::string, std::string> store;
    std::map<std::string, CLI::Option*> opts;

    void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
        opts[key] = app.add_option(flag, store[key], help);
    }
    Params collect(const std::string& where) const {
        Params p{where, {}};
        for (const auto& [key, opt] : opts)
            if (opt->count() > 0) p.values[key] = store.at(key);
        return p;
    }
};

void add_risk_flags(CLI::App& app, FlagSet& f) {
    f.add(app, "--gamma", "gamma", "mean-variance weight (default 1)");
    f.add(app, "--threshold", "threshold", "shortfall threshold alpha_u (default 0)");
    f.add(app, "--tol", "tol", "shortfall bisection tolerance (default 1e-8)");
    f.add(app, "--bracket", "bracket", "shortfall search bracket 'lo,hi'");
    f.add(app, "--gain-exponent", "gain_exponent", "CPT gain utility exponent (default 1)");
    f.add(app, "--gain-scale", "gain_scale", "CPT gain utility scale (default 1)");
    f.add(app, "--loss-exponent", "loss_exponent", "CPT loss utility exponent (default 1)");
    f.add(app, "--loss-scale", "loss_scale", "CPT loss utility scale (default 1)");
    f.add(app, "--w-plus", "w_plus", "CPT gain weight: identity | power:c | tk:d");
    f.add(app, "--w-minus", "w_minus", "CPT loss weight: identity | power:c | tk:d");
    f.add(app, "--holder-constant", "holder_constant", "Hoelder constant of the weights (default 1)");
    f.add(app, "--holder-order", "holder_order", "Hoelder order of the weights (default 1)");
    f.add(app, "--truncation", "truncation", "truncate CPT utilities at this level");
}

int cmd_estimate(const std::string& file, const std::string& inline_samples, const Params& risk_params,
                 std::ostream& out) {
    std::vector<double> xs;
    if (!file.empty() && !inline_samples.empty()) throw InputError("give either --file or --samples, not both");
    if (!file.empty()) {
        if (file == "-") {
            xs = read_samples(std::cin);
        } else {
            std::ifstream in(file);
            if (!in) throw InputError("cannot read samples file '" + file + "'");
            xs = read_samples(in);
        }
    } else if (!inline_samples.empty()) {
        std::string s = inline_samples;
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream in(s);
        std::string tok;
        while (in >> tok) xs.push_back(parse_number(tok, "sample"));
        if (xs.empty()) throw InputError("no samples");
    } else {
        throw InputError("no samples: use --file or --samples");
    }
    const auto spec = build_risk(risk_params);
    out << fmt12(risk::estimate(xs, spec)) << '\n';
    return kExitOk;
}

int cmd_bound(const Params& p, std::size_t n, double eps, std::ostream& out) {
    const auto spec = build_bound(p, nullptr, nullptr);
    conc::validate(spec);
    const auto w = conc::validity_window(spec, n);
    const double b = conc::tail_bound(spec, n, eps);
    out << fmt12(b);
    if (conc::is_vacuous(b)) out << " VACUOUS";
    out << '\n';
    out << "window [" << fmt12(w.lo) << ", " << fmt12(w.hi) << "]\n";
    return kExitOk;
}

std::optional<std::uint64_t> seed_from_env() {
    const char* s = std::getenv("RISKBANDIT_SEED");
    if (!s || !*s) return std::nullopt;
    std::uint64_t v = 0;
    const std::string t = trim(s);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw InputError("RISKBANDIT_SEED is not an unsigned integer: '" + t + "'");
    return v;
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const std::string t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw InputError(what + " is not an unsigned integer: '" + t + "'");
    return v;
}

struct RunOverrides {
    std::string seed;
    std::string trials;
    std::string output_dir;
    unsigned workers = 0;
    bool quiet = false;
    bool verbose = false;
};

sim::CoverageConfig coverage_config(const Sections& s, std::uint64_t seed, std::size_t trials) {
    const auto model = parse_arm(section(s, "model").text("arm"));
    const auto spec = build_risk(section(s, "risk"));
    const Params bound_params = s.count("bound") ? s.at("bound") : Params{"bound", {}};
    const auto bound = build_bound(bound_params, &spec, &model);

    sim::CoverageConfig cfg{model, spec, bound, {}, trials, seed, bound_params.boolean_or("auto_truncation", false)};
    const Params& grid = section(s, "grid");
    if (grid.has("points")) {
        if (grid.has("n") || grid.has("target")) throw InputError("grid: give either points or n + target");
        for (const auto& item : split(grid.text("points"), ',')) {
            const auto [n, eps] = head_tail(item);
            if (eps.empty()) throw InputError("grid.points: expected 'n:eps', got '" + item + "'");
            Params tmp{"grid.points", {{"n", n}}};
            cfg.grid.push_back({tmp.count("n"), parse_number(eps, "grid.points eps")});
        }
    } else {
        const double target = grid.number("target");
        for (double nd : parse_number_list(grid.text("n"), "grid.n")) {
            if (!(nd >= 1.0) || nd != std::floor(nd)) throw InputError("grid.n: sample sizes must be positive integers");
            const auto n = static_cast<std::size_t>(nd);
            cfg.grid.push_back({n, conc::invert_tail_bound(bound, n, target)});
        }
    }
    return cfg;
}

bandit::BanditInstance instance_from(const Sections& s) {
    const Params& p = section(s, "instance");
    auto arms = parse_arms(p.text("arms"));
    std::optional<double> proxy;
    if (p.has("sigma")) {
        const double sigma = p.number("sigma");
        proxy = sigma * sigma;
    }
    return bandit::BanditInstance::make(std::move(arms), proxy);
}

// Echo of every section with overrides applied, as the run actually used it.
nlohmann::json echo(const Sections& s) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, p] : s) {
        nlohmann::json sec = nlohmann::json::object();
        for (const auto& [k, v] : p.values) sec[k] = v;
        j[name] = sec;
    }
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << body;
    if (!f) throw InputError("cannot write '" + path.string() + "'");
}

int cmd_run(const std::string& config_path, const RunOverrides& ov, std::ostream& out, std::ostream& err) {
    Sections s = load_config(config_path);
    Params& exp = s["experiment"];
    exp.where = "experiment";

    if (!ov.seed.empty()) exp.values["seed"] = ov.seed;
    if (!exp.has("seed")) {
        if (const auto env = seed_from_env()) exp.values["seed"] = std::to_string(*env);
    }
    if (!exp.has("seed")) throw InputError("no seed: set experiment.seed, pass --seed, or set RISKBANDIT_SEED");
    if (!ov.trials.empty()) exp.values["trials"] = ov.trials;
    if (!ov.output_dir.empty()) exp.values["output_dir"] = ov.output_dir;

    const std::string kind = exp.text("kind");
    const std::uint64_t seed = parse_seed(exp.text("seed"), "experiment.seed");
    const std::size_t trials = exp.count_or("trials", 100);
    if (trials < 1) throw InputError("experiment.trials must be >= 1");
    const unsigned workers =
        ov.workers > 0 ? ov.workers : static_cast<unsigned>(exp.count_or("workers", sim::default_workers()));
    const std::string name = exp.text_or("name", kind);
    const std::filesystem::path dir = exp.text_or("output_dir", ".");

    if (ov.verbose) err << "running " << kind << " with seed " << seed << " on " << workers << " worker(s)\n";

    std::string csv;
    std::string trace_csv;
    std::vector<sim::Check> checks;
    if (kind == "coverage") {
        const auto cfg = coverage_config(s, seed, trials);
        const auto rows = sim::run_coverage(cfg, workers);
        csv = sim::coverage_table(rows).str();
        checks = sim::coverage_checks(rows);
    } else if (kind == "regret") {
        const Params& pol = section(s, "policy");
        const std::string policy = pol.text("name");
        sim::RegretConfig cfg{instance_from(s)};
        if (policy == "risk-lcb") {
            cfg.policy = sim::RegretPolicy::RiskLcb;
            cfg.spec = build_risk(section(s, "risk"));
            if (pol.has("gamma")) throw InputError("policy.gamma only applies to mvts");
        } else if (policy == "mvts") {
            cfg.policy = sim::RegretPolicy::Mvts;
            cfg.gamma = pol.number_or("gamma", 1.0);
            if (s.count("risk")) throw InputError("mvts optimizes mean-variance; remove the [risk] section");
        } else {
            throw InputError("policy.name must be risk-lcb or mvts, got '" + policy + "'");
        }
        cfg.horizon = pol.count("horizon");
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.trace = pol.boolean_or("trace", false);
        const auto res = sim::run_regret(cfg, workers);
        csv = sim::regret_table(res.rows, cfg.policy).str();
        if (cfg.trace) trace_csv = sim::trace_table(res.trace).str();
        checks = sim::regret_checks(res.rows, cfg.policy);
    } else if (kind == "bai") {
        const Params& b = section(s, "bai");
        sim::BaiConfig cfg{instance_from(s)};
        const std::string policy = b.text("policy");
        if (policy == "cvar-sr") {
            cfg.policy = sim::BaiPolicy::CvarSr;
            if (b.has("m")) throw InputError("bai.m only applies to q-sar");
        } else if (policy == "q-sar") {
            cfg.policy = sim::BaiPolicy::Qsar;
            cfg.m = b.count("m");
        } else {
            throw InputError("bai.policy must be cvar-sr or q-sar, got '" + policy + "'");
        }
        cfg.alpha = b.number("alpha");
        for (double v : parse_number_list(b.text("budgets"), "bai.budgets")) {
            if (!(v >= 1.0) || v != std::floor(v)) throw InputError("bai.budgets must be positive integers");
            cfg.budgets.push_back(static_cast<std::size_t>(v));
        }
        cfg.trials = trials;
        cfg.seed = seed;
        const auto rows = sim::run_bai(cfg, workers);
        csv = sim::bai_table(rows).str();
        checks = sim::bai_checks(rows);
    } else if (kind == "nonlipschitz") {
        const auto rows = sim::run_nonlipschitz_demo(parse_number_list(section(s, "demo").text("eps"), "demo.eps"));
        csv = sim::demo_table(rows).str();
        checks = sim::demo_checks(rows);
    } else {
        throw InputError("experiment.kind must be coverage, regret, bai or nonlipschitz, got '" + kind + "'");
    }

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const auto csv_path = dir / (name + ".csv");
    write_file(csv_path, csv);
    if (!trace_csv.empty()) write_file(dir / (name + "_trace.csv"), trace_csv);

    nlohmann::json meta;
    meta["kind"] = kind;
    meta["name"] = name;
    meta["seed"] = seed;
    meta["trials"] = trials;
    meta["version"] = RISKBANDIT_VERSION;
    Sections resolved = s;
    resolved["experiment"].values.erase("workers");  // does not affect results
    meta["config"] = echo(resolved);
    nlohmann::json jchecks = nlohmann::json::array();
    for (const auto& c : checks) jchecks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    meta["checks"] = jchecks;
    write_file(dir / (name + ".json"), meta.dump(2) + "\n");

    bool all = true;
    for (const auto& c : checks) {
        all = all && c.passed;
        if (!ov.quiet) out << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": ") << c.detail << '\n';
    }
    if (!ov.quiet) out << "summary: " << (all ? "pass" : "FAIL") << " (" << csv_path.string() << ")\n";
    return kExitOk;
}

}  // namespace

// ----- Params --------------------------------------------------------------

std::string Params::text(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw InputError("missing key '" + where + "." + key + "'");
    return it->second;
}

std::string Params::text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
}

double Params::number(const std::string& key) const { return parse_number(text(key), where + "." + key); }

double Params::number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

std::size_t Params::count(const std::string& key) const {
    const std::string t = trim(text(key));
    std::size_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw InputError("invalid count for '" + where + "." + key + "': '" + t + "'");
    return v;
}

std::size_t Params::count_or(const std::string& key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
}

bool Params::boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string t = trim(text(key));
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw InputError("invalid boolean for '" + where + "." + key + "': '" + t + "'");
}

// ----- parsers -------------------------------------------------------------

double parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw InputError("invalid number for " + what + ": '" + t + "'");
    return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(parse_number(item, what));
    return out;
}

std::vector<double> read_samples(std::istream& in) {
    std::vector<double> xs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        double v = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size())
            throw InputError("line " + std::to_string(lineno) + ": cannot parse '" + t + "' as a number");
        xs.push_back(v);
    }
    if (xs.empty()) throw InputError("no samples");
    return xs;
}

dist::ArmModel parse_arm(const std::string& text) {
    const std::string t = trim(text);
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')') throw InputError("invalid arm '" + t + "'");
    const std::string kind = trim(t.substr(0, open));
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    const std::string what = "arm '" + t + "'";
    if (kind == "gaussian") {
        const auto a = args_of(inner, 2, what);
        return dist::ArmModel::gaussian(a[0], a[1]);
    }
    if (kind == "bernoulli") return dist::ArmModel::bernoulli(args_of(inner, 1, what)[0]);
    if (kind == "uniform") {
        const auto a = args_of(inner, 2, what);
        return dist::ArmModel::uniform(a[0], a[1]);
    }
    if (kind == "point") return dist::ArmModel::point_mass(args_of(inner, 1, what)[0]);
    if (kind == "empirical") {
        std::vector<double> values, probs;
        std::istringstream in(inner);
        std::string tok;
        while (in >> tok) {
            const auto [v, p] = head_tail(tok);
            if (p.empty()) throw InputError(what + ": expected value:probability, got '" + tok + "'");
            values.push_back(parse_number(v, what));
            probs.push_back(parse_number(p, what));
        }
        return dist::ArmModel::empirical(std::move(values), std::move(probs));
    }
    throw InputError("unknown arm kind '" + kind + "'");
}

std::vector<dist::ArmModel> parse_arms(const std::string& text) {
    std::vector<dist::ArmModel> out;
    for (const auto& item : split(text, ';'))
        if (!item.empty()) out.push_back(parse_arm(item));
    return out;
}

risk::Spectrum parse_spectrum(const std::string& text) {
    const auto [kind, args] = head_tail(text);
    const std::string what = "spectrum '" + trim(text) + "'";
    if (kind == "uniform") return risk::Spectrum::uniform();
    if (kind == "cvar") return risk::Spectrum::cvar(args_of(args, 1, what)[0]);
    if (kind == "power") return risk::Spectrum::power(args_of(args, 1, what)[0]);
    if (kind == "exp" || kind == "exponential") return risk::Spectrum::exponential(args_of(args, 1, what)[0]);
    if (kind == "step") {
        auto cells = parse_number_list(args, what);
        if (cells.empty()) throw InputError(what + ": no cells");
        return risk::Spectrum::step(std::move(cells));
    }
    throw InputError("unknown spectrum '" + trim(text) + "'");
}

risk::ShortfallUtility parse_utility(const std::string& text) {
    const auto [kind, args] = head_tail(text);
    const std::string what = "utility '" + trim(text) + "'";
    if (kind == "linear") return risk::ShortfallUtility::linear(args.empty() ? 1.0 : args_of(args, 1, what)[0]);
    if (kind == "kinked") {
        const auto a = args_of(args, 2, what);
        return risk::ShortfallUtility::kinked(a[0], a[1]);
    }
    if (kind == "softplus") {
        const auto a = args_of(args, 2, what);
        return risk::ShortfallUtility::softplus(a[0], a[1]);
    }
    throw InputError("unknown utility '" + trim(text) + "'");
}

risk::WeightFunction parse_weight(const std::string& text) {
    const auto [kind, args] = head_tail(text);
    const std::string what = "weight '" + trim(text) + "'";
    if (kind == "identity") return risk::WeightFunction::identity();
    if (kind == "power") return risk::WeightFunction::power(args_of(args, 1, what)[0]);
    if (kind == "tk") return risk::WeightFunction::tversky_kahneman(args_of(args, 1, what)[0]);
    throw InputError("unknown weight function '" + trim(text) + "'");
}

risk::RiskSpec build_risk(const Params& p) {
    const std::string m = p.text("measure");
    if (m == "mv") return risk::MeanVariance{p.number_or("gamma", 1.0)};
    if (m == "var") return risk::ValueAtRisk{p.number("alpha")};
    if (m == "cvar") return risk::ConditionalValueAtRisk{p.number("alpha")};
    if (m == "srm") return risk::SpectralRisk{parse_spectrum(p.text("spectrum"))};
    if (m == "ubsr") {
        risk::ShortfallRisk s{parse_utility(p.text_or("utility", "linear:1")), p.number_or("threshold", 0.0), {},
                              p.number_or("tol", 1e-8)};
        if (p.has("bracket")) {
            const auto b = args_of(p.text("bracket"), 2, p.where + ".bracket");
            s.bracket = std::make_pair(b[0], b[1]);
        }
        return s;
    }
    if (m == "cpt") {
        risk::ProspectValue s;
        s.gain_utility = power_utility(p, "gain");
        s.loss_utility = power_utility(p, "loss");
        s.w_plus = parse_weight(p.text_or("w_plus", "identity"));
        s.w_minus = parse_weight(p.text_or("w_minus", "identity"));
        s.holder_constant = p.number_or("holder_constant", 1.0);
        s.holder_order = p.number_or("holder_order", 1.0);
        if (p.has("truncation")) s.truncation = p.number("truncation");
        return s;
    }
    if (m == "distorted-sqrt") return risk::DistortedSqrt{};
    throw InputError("unknown risk measure '" + m + "' in " + p.where + ".measure");
}

conc::BoundSpec build_bound(const Params& p, const risk::RiskSpec* rs, const dist::ArmModel* model) {
    const std::string family = p.text("family");
    auto sigma = [&] {
        if (p.has("sigma")) return p.number("sigma");
        if (model) return std::sqrt(model->subgaussian_proxy());
        return p.number("sigma");  // reports the missing key
    };
    auto from_risk = [&](const std::string& key, auto getter) -> double {
        if (p.has(key)) return p.number(key);
        if (rs) {
            if (const auto v = getter(*rs)) return *v;
        }
        return p.number(key);
    };
    auto alpha = [&] {
        return from_risk("alpha", [](const risk::RiskSpec& r) -> std::optional<double> {
            if (const auto* c = std::get_if<risk::ConditionalValueAtRisk>(&r)) return c->alpha;
            return std::nullopt;
        });
    };
    auto cpt_field = [&](const std::string& key, double risk::ProspectValue::*field) {
        return from_risk(key, [field](const risk::RiskSpec& r) -> std::optional<double> {
            if (const auto* c = std::get_if<risk::ProspectValue>(&r)) return c->*field;
            return std::nullopt;
        });
    };

    if (family == "mean-variance") {
        const double gamma = from_risk("gamma", [](const risk::RiskSpec& r) -> std::optional<double> {
            if (const auto* m = std::get_if<risk::MeanVariance>(&r)) return m->gamma;
            return std::nullopt;
        });
        return conc::MeanVarianceBound{gamma, sigma()};
    }
    if (family == "lipschitz") {
        const double L = from_risk("lipschitz", [](const risk::RiskSpec& r) -> std::optional<double> {
            try {
                return risk::lipschitz_constant(r);
            } catch (const DomainError&) {
                return std::nullopt;
            }
        });
        return conc::LipschitzBound{L, sigma()};
    }
    if (family == "cvar-lipschitz") return conc::CvarLipschitzBound{alpha(), sigma()};
    if (family == "cvar-density") {
        const double a = alpha();
        const double s = sigma();
        const double delta = p.number("delta");
        double eta = 0.0;
        if (p.has("eta")) {
            eta = p.number("eta");
        } else if (model && std::holds_alternative<dist::Gaussian>(model->variant())) {
            const auto& g = std::get<dist::Gaussian>(model->variant());
            eta = conc::gaussian_density_constants(g.mean, g.stddev, a, delta).eta;
        } else {
            eta = p.number("eta");
        }
        return conc::CvarDensityBound{a, s, eta, delta};
    }
    if (family == "spectral") {
        const double K = from_risk("spectrum_bound", [](const risk::RiskSpec& r) -> std::optional<double> {
            if (const auto* s = std::get_if<risk::SpectralRisk>(&r)) return s->spectrum.bound();
            return std::nullopt;
        });
        return conc::SpectralLipschitzBound{K, sigma()};
    }
    if (family == "shortfall") {
        const double Ku = from_risk("lipschitz_u", [](const risk::RiskSpec& r) -> std::optional<double> {
            if (const auto* s = std::get_if<risk::ShortfallRisk>(&r)) return s->utility.lipschitz();
            return std::nullopt;
        });
        const double ku = from_risk("growth_u", [](const risk::RiskSpec& r) -> std::optional<double> {
            if (const auto* s = std::get_if<risk::ShortfallRisk>(&r)) return s->utility.growth();
            return std::nullopt;
        });
        return conc::ShortfallLipschitzBound{Ku, ku, sigma()};
    }
    if (family == "cpt-bounded") {
        return conc::CptBoundedBound{cpt_field("holder_constant", &risk::ProspectValue::holder_constant),
                                     cpt_field("holder_order", &risk::ProspectValue::holder_order),
                                     p.number("utility_bound")};
    }
    if (family == "cpt-subgaussian") {
        return conc::CptSubGaussianBound{cpt_field("holder_constant", &risk::ProspectValue::holder_constant),
                                         cpt_field("holder_order", &risk::ProspectValue::holder_order), sigma()};
    }
    throw InputError("unknown bound family '" + family + "' in " + p.where + ".family");
}

// ----- entry point ---------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-aware bandit toolkit: estimators, tail bounds and Monte-Carlo experiments", "riskbandit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RISKBANDIT_VERSION);

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate a risk measure from samples");
    std::string file, inline_samples;
    est->add_option("--file", file, "newline-separated samples ('-' reads stdin)");
    est->add_option("--samples", inline_samples, "inline samples, comma or space separated");
    FlagSet est_flags;
    bool mv = false, cpt = false, dsqrt = false;
    std::string var_level, cvar_level, srm_spec, ubsr_utility;
    auto* o_mv = est->add_flag("--mv", mv, "mean-variance gamma*mean - variance");
    auto* o_var = est->add_option("--var", var_level, "value at risk at level alpha");
    auto* o_cvar = est->add_option("--cvar", cvar_level, "conditional value at risk at level alpha");
    auto* o_srm = est->add_option("--srm", srm_spec, "spectral risk: uniform | cvar:a | power:k | exp:l | step:v1,...");
    auto* o_ubsr = est->add_option("--ubsr", ubsr_utility, "shortfall risk with utility linear:c | kinked:b,a | softplus:k,K");
    auto* o_cpt = est->add_flag("--cpt", cpt, "cumulative prospect theory value");
    auto* o_dsqrt = est->add_flag("--distorted-sqrt", dsqrt, "integral of sqrt(1 - F) (non-negative samples)");
    add_risk_flags(*est, est_flags);

    // bound
    auto* bnd = app.add_subcommand("bound", "Evaluate a tail bound and its eps window");
    FlagSet bnd_flags;
    std::size_t bn = 0;
    double beps = 0.0;
    bnd_flags.add(*bnd, "--family", "family",
                  "mean-variance | lipschitz | cvar-lipschitz | cvar-density | spectral | shortfall | cpt-bounded | "
                  "cpt-subgaussian");
    bnd_flags.opts["family"]->required();
    bnd_flags.add(*bnd, "--gamma", "gamma", "mean-variance weight");
    bnd_flags.add(*bnd, "--sigma", "sigma", "sub-Gaussian parameter");
    bnd_flags.add(*bnd, "--lipschitz", "lipschitz", "Lipschitz constant L");
    bnd_flags.add(*bnd, "--alpha", "alpha", "CVaR level");
    bnd_flags.add(*bnd, "--eta", "eta", "density lower bound near VaR");
    bnd_flags.add(*bnd, "--delta", "delta", "width of the density window");
    bnd_flags.add(*bnd, "--spectrum-bound", "spectrum_bound", "sup of the spectrum");
    bnd_flags.add(*bnd, "--lipschitz-u", "lipschitz_u", "upper slope K_u of the shortfall utility");
    bnd_flags.add(*bnd, "--growth-u", "growth_u", "lower slope k_u of the shortfall utility");
    bnd_flags.add(*bnd, "--holder-constant", "holder_constant", "Hoelder constant H of the weights");
    bnd_flags.add(*bnd, "--holder-order", "holder_order", "Hoelder order of the weights");
    bnd_flags.add(*bnd, "--utility-bound", "utility_bound", "bound M on the utilities");
    bnd->add_option("--n", bn, "sample count")->required();
    bnd->add_option("--eps", beps, "deviation eps")->required();

    // run
    auto* run = app.add_subcommand("run", "Run an experiment config and write CSV + JSON");
    std::string config_path;
    RunOverrides ov;
    run->add_option("config", config_path, "experiment config (INI)")->required();
    run->add_option("--seed", ov.seed, "base seed (overrides config and RISKBANDIT_SEED)");
    run->add_option("--trials", ov.trials, "trial count override");
    run->add_option("--output-dir", ov.output_dir, "output directory override");
    run->add_option("--workers", ov.workers, "worker threads (default: logical cores)");
    run->add_flag("-q,--quiet", ov.quiet, "suppress the summary");
    run->add_flag("-v,--verbose", ov.verbose, "progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*est) {
            Params p = est_flags.collect("estimate");
            const int chosen = static_cast<int>(o_mv->count() > 0) + static_cast<int>(o_var->count() > 0) +
                               static_cast<int>(o_cvar->count() > 0) + static_cast<int>(o_srm->count() > 0) +
                               static_cast<int>(o_ubsr->count() > 0) + static_cast<int>(o_cpt->count() > 0) +
                               static_cast<int>(o_dsqrt->count() > 0);
            if (chosen != 1) throw InputError("choose exactly one risk measure");
            if (mv) p.values["measure"] = "mv";
            if (o_var->count()) p.values["measure"] = "var", p.values["alpha"] = var_level;
            if (o_cvar->count()) p.values["measure"] = "cvar", p.values["alpha"] = cvar_level;
            if (o_srm->count()) p.values["measure"] = "srm", p.values["spectrum"] = srm_spec;
            if (o_ubsr->count()) p.values["measure"] = "ubsr", p.values["utility"] = ubsr_utility;
            if (cpt) p.values["measure"] = "cpt";
            if (dsqrt) p.values["measure"] = "distorted-sqrt";
            return cmd_estimate(file, inline_samples, p, out);
        }
        if (*bnd) return cmd_bound(bnd_flags.collect("bound"), bn, beps, out);
        if (*run) return cmd_run(config_path, ov, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
    return kExitInput;
}

}  // namespace riskbandit::cli
