#include "riskbandit/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>

#include "riskbandit/error.hpp"
#include "riskbandit/risk.hpp"

namespace riskbandit::sim {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double binomial_se(double p, std::size_t trials) {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

struct MeanSe {
    double mean;
    double se;
};

// Sums in index order so the result is independent of scheduling.
MeanSe mean_and_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::string flag(bool b) { return b ? "true" : "false"; }

double w1_discrete(const dist::ArmModel& a, const dist::ArmModel& b) {
    const auto ea = a.atoms();
    const auto eb = b.atoms();
    std::vector<double> pts = ea.values;
    pts.insert(pts.end(), eb.values.begin(), eb.values.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    // |F_a - F_b| = |S_a - S_b| with S the upper tail, which keeps small tails exact.
    auto upper = [](const dist::Empirical& e, double x) {
        double s = 0.0;
        for (std::size_t i = e.values.size(); i-- > 0 && e.values[i] > x;) s += e.probs[i];
        return s;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += std::abs(upper(ea, pts[i]) - upper(eb, pts[i])) * (pts[i + 1] - pts[i]);
    return total;
}

}  // namespace

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

void for_each_trial(std::size_t trials, unsigned workers, const std::function<void(std::size_t)>& body) {
    const std::size_t nthreads = std::min<std::size_t>(std::max(1u, workers), trials);
    if (nthreads <= 1) {
        for (std::size_t t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_trial = trials;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                body(t);
            } catch (...) {
                std::lock_guard lock(mu);
                // Report the lowest failing trial, as a serial run would.
                if (t < failed_trial) {
                    failed_trial = t;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// ----- coverage ------------------------------------------------------------

double truncation_level(double sigma, std::size_t n) {
    return sigma * std::sqrt(std::log(static_cast<double>(n))) + 1.0;
}

std::vector<CoverageRow> run_coverage(const CoverageConfig& cfg, unsigned workers) {
    if (cfg.trials < 1) throw InputError("trials must be >= 1");
    if (cfg.grid.empty()) throw InputError("coverage grid is empty");
    risk::validate(cfg.spec);
    conc::validate(cfg.bound);

    const double truth = dist::true_risk(cfg.model, cfg.spec);

    double trunc_sigma = 0.0;
    if (cfg.auto_truncation) {
        const auto* b = std::get_if<conc::CptSubGaussianBound>(&cfg.bound);
        if (!b || !std::holds_alternative<risk::ProspectValue>(cfg.spec))
            throw DomainError("automatic truncation needs a CPT risk measure and the sub-Gaussian CPT bound");
        trunc_sigma = b->sigma;
    }

    const std::size_t G = cfg.grid.size();
    std::vector<double> bounds(G);
    std::vector<risk::RiskSpec> specs(G, cfg.spec);
    for (std::size_t g = 0; g < G; ++g) {
        bounds[g] = conc::tail_bound(cfg.bound, cfg.grid[g].n, cfg.grid[g].eps);
        if (cfg.auto_truncation)
            std::get<risk::ProspectValue>(specs[g]).truncation = truncation_level(trunc_sigma, cfg.grid[g].n);
    }

    std::vector<unsigned char> violated(cfg.trials * G, 0);
    for_each_trial(cfg.trials, workers, [&](std::size_t trial) {
        for (std::size_t g = 0; g < G; ++g) {
            auto rng = RngStream::substream(cfg.seed, trial, g);
            const auto xs = dist::sample(cfg.model, rng, cfg.grid[g].n);
            const double est = risk::estimate(xs, specs[g]);
            violated[trial * G + g] = std::abs(est - truth) > cfg.grid[g].eps ? 1 : 0;
        }
    });

    std::vector<CoverageRow> rows;
    for (std::size_t g = 0; g < G; ++g) {
        std::size_t count = 0;
        for (std::size_t t = 0; t < cfg.trials; ++t) count += violated[t * G + g];
        const double rate = static_cast<double>(count) / static_cast<double>(cfg.trials);
        const double se = binomial_se(rate, cfg.trials);
        const bool checked = bounds[g] <= 0.5;
        rows.push_back({cfg.grid[g].n, cfg.grid[g].eps, rate, bounds[g], conc::is_vacuous(bounds[g]), se, checked,
                        rate <= bounds[g] + 3.0 * se});
    }
    return rows;
}

// ----- regret --------------------------------------------------------------

std::vector<std::size_t> checkpoints(std::size_t horizon) {
    std::vector<std::size_t> out;
    for (std::size_t t = 1; t < horizon; t *= 2) out.push_back(t);
    out.push_back(horizon);
    return out;
}

RegretResult run_regret(const RegretConfig& cfg, unsigned workers) {
    if (cfg.trials < 1) throw InputError("trials must be >= 1");
    const auto& inst = cfg.instance;
    const std::size_t K = inst.size();
    if (cfg.horizon < 2 * K) throw DomainError("horizon must be at least 2K");

    const risk::RiskSpec spec =
        cfg.policy == RegretPolicy::Mvts ? risk::RiskSpec{risk::MeanVariance{cfg.gamma}} : cfg.spec;
    risk::validate(spec);
    const auto gaps = bandit::arm_gaps(inst, spec);

    double rhs = kNaN;
    double lipschitz = kNaN;
    if (cfg.policy == RegretPolicy::Mvts) {
        std::vector<conc::GaussianArmParams> params;
        for (const auto& a : inst.arms) {
            const auto* g = std::get_if<dist::Gaussian>(&a.variant());
            if (!g) throw DomainError("MVTS needs Gaussian arms");
            params.push_back({g->mean, g->stddev * g->stddev});
        }
        try {
            rhs = conc::mvts_regret_rhs(params, cfg.gamma);
        } catch (const DomainError&) {
            rhs = kNaN;  // identical arms: no yardstick, regret is zero anyway
        }
    } else {
        lipschitz = risk::lipschitz_constant(spec);
    }

    const auto cps = checkpoints(cfg.horizon);
    std::vector<std::vector<double>> at_cp(cfg.trials);
    std::vector<std::vector<TraceRow>> traces(cfg.trials);

    for_each_trial(cfg.trials, workers, [&](std::size_t trial) {
        bandit::Environment env(inst, cfg.seed, trial);
        std::vector<double> out;
        out.reserve(cps.size());
        auto& trace = traces[trial];
        double regret = 0.0;
        std::size_t next_cp = 0;
        auto step = [&](std::size_t t, std::size_t arm, double reward) {
            regret += gaps[arm];
            if (cfg.trace) trace.push_back({trial, t, arm, reward, gaps[arm]});
            if (next_cp < cps.size() && cps[next_cp] == t) {
                out.push_back(regret);
                ++next_cp;
            }
        };
        if (cfg.policy == RegretPolicy::Mvts) {
            bandit::Mvts policy(K, cfg.gamma, RngStream::substream(cfg.seed, trial, kPolicyStream));
            for (std::size_t t = 1; t <= cfg.horizon; ++t) {
                const std::size_t arm = policy.select();
                const double r = env.pull(arm);
                policy.observe(arm, r);
                step(t, arm, r);
            }
        } else {
            bandit::RiskLcb policy(K, spec, inst.sigma());
            for (std::size_t t = 1; t <= cfg.horizon; ++t) {
                const std::size_t arm = policy.select();
                const double r = env.pull(arm);
                policy.observe(arm, r);
                step(t, arm, r);
            }
        }
        at_cp[trial] = std::move(out);
    });

    RegretResult result;
    for (std::size_t c = 0; c < cps.size(); ++c) {
        std::vector<double> col(cfg.trials);
        for (std::size_t t = 0; t < cfg.trials; ++t) col[t] = at_cp[t][c];
        const auto [mean, se] = mean_and_se(col);
        RegretRow row{cps[c], mean, se, kNaN, kNaN, kNaN};
        if (cfg.policy == RegretPolicy::Mvts) {
            row.regret_over_log_t = cps[c] > 1 ? mean / std::log(static_cast<double>(cps[c])) : kNaN;
            row.mvts_rhs = rhs;
        } else {
            row.gap_free_bound = bandit::risk_lcb_gap_free_bound(cps[c], K, inst.sigma(), lipschitz, gaps);
        }
        result.rows.push_back(row);
    }
    if (cfg.trace)
        for (auto& tr : traces) result.trace.insert(result.trace.end(), tr.begin(), tr.end());
    return result;
}

// ----- best-arm identification ---------------------------------------------

std::vector<std::size_t> bai_target(const BaiConfig& cfg) {
    const std::size_t K = cfg.instance.size();
    std::vector<double> rho(K);
    for (std::size_t i = 0; i < K; ++i) {
        const risk::RiskSpec s = cfg.policy == BaiPolicy::CvarSr ? risk::RiskSpec{risk::ConditionalValueAtRisk{cfg.alpha}}
                                                                 : risk::RiskSpec{risk::ValueAtRisk{cfg.alpha}};
        rho[i] = dist::true_risk(cfg.instance.arms[i], s);
    }
    const std::size_t m = cfg.policy == BaiPolicy::CvarSr ? 1 : cfg.m;
    if (m < 1 || m >= K) throw DomainError("m must satisfy 1 <= m < K");
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    // Best first: lowest CVaR, highest VaR.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.policy == BaiPolicy::CvarSr ? rho[a] < rho[b] : rho[a] > rho[b];
    });
    const double edge = rho[order[m - 1]];
    const double next = rho[order[m]];
    if (std::abs(edge - next) <= 1e-12 * std::max(1.0, std::abs(edge)))
        throw DomainError("best arm set is not unique");
    std::vector<std::size_t> target(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(target.begin(), target.end());
    return target;
}

std::vector<BaiRow> run_bai(const BaiConfig& cfg, unsigned workers) {
    if (cfg.trials < 1) throw InputError("trials must be >= 1");
    if (cfg.budgets.empty()) throw InputError("no budgets given");
    const auto target = bai_target(cfg);
    const std::size_t K = cfg.instance.size();
    for (std::size_t b : cfg.budgets)
        if (b < bandit::minimal_budget(K))
            throw DomainError("budget too small: minimal feasible budget is " +
                              std::to_string(bandit::minimal_budget(K)));

    const auto base_target = cfg.policy == BaiPolicy::CvarSr ? bandit::BaiTarget::LowestCvar
                                                             : bandit::BaiTarget::HighestVar;
    const std::size_t m = cfg.policy == BaiPolicy::CvarSr ? 1 : cfg.m;

    std::vector<BaiRow> rows;
    for (std::size_t bi = 0; bi < cfg.budgets.size(); ++bi) {
        const std::size_t budget = cfg.budgets[bi];
        std::vector<unsigned char> miss(cfg.trials, 0), base_miss(cfg.trials, 0);
        for_each_trial(cfg.trials, workers, [&](std::size_t trial) {
            bandit::Environment env(cfg.instance, derive_seed(cfg.seed, bi, 0), trial);
            const auto out = cfg.policy == BaiPolicy::CvarSr ? bandit::run_cvar_sr(env, cfg.alpha, budget)
                                                             : bandit::run_qsar(env, cfg.alpha, cfg.m, budget);
            miss[trial] = out.recommended != target;
            bandit::Environment base_env(cfg.instance, derive_seed(cfg.seed, bi, 1), trial);
            base_miss[trial] = bandit::run_uniform_bai(base_env, base_target, cfg.alpha, m, budget).recommended != target;
        });
        const double n = static_cast<double>(cfg.trials);
        const double rate = static_cast<double>(std::accumulate(miss.begin(), miss.end(), std::size_t{0})) / n;
        const double base = static_cast<double>(std::accumulate(base_miss.begin(), base_miss.end(), std::size_t{0})) / n;
        rows.push_back({budget, rate, binomial_se(rate, cfg.trials), base, binomial_se(base, cfg.trials)});
    }
    return rows;
}

// ----- non-Lipschitz demonstration -----------------------------------------

std::vector<DemoRow> run_nonlipschitz_demo(const std::vector<double>& eps_ladder) {
    if (eps_ladder.empty()) throw InputError("eps ladder is empty");
    std::vector<DemoRow> rows;
    for (double eps : eps_ladder) {
        if (!(eps > 0.0 && eps <= 0.25)) throw DomainError("eps must lie in (0, 1/4]");
        const auto heavy = dist::ArmModel::bernoulli(4.0 * eps);
        const auto light = dist::ArmModel::bernoulli(eps);
        const double diff =
            std::abs(dist::true_risk(heavy, risk::DistortedSqrt{}) - dist::true_risk(light, risk::DistortedSqrt{}));
        const double w1 = w1_discrete(heavy, light);
        rows.push_back({eps, diff, w1, diff / w1});
    }
    return rows;
}

// ----- output --------------------------------------------------------------

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Shortest representation that round-trips.
std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(cells[i]);
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

CsvTable coverage_table(const std::vector<CoverageRow>& rows) {
    CsvTable t({"n", "eps", "emp_rate", "bound", "vacuous"});
    for (const auto& r : rows)
        t.add({std::to_string(r.n), format_number(r.eps), format_number(r.emp_rate), format_number(r.bound),
               flag(r.vacuous)});
    return t;
}

CsvTable regret_table(const std::vector<RegretRow>& rows, RegretPolicy policy) {
    if (policy == RegretPolicy::Mvts) {
        CsvTable t({"t", "mean_regret", "std_error", "regret_over_log_t", "mvts_rhs"});
        for (const auto& r : rows)
            t.add({std::to_string(r.t), format_number(r.mean_regret), format_number(r.std_error),
                   format_number(r.regret_over_log_t), format_number(r.mvts_rhs)});
        return t;
    }
    CsvTable t({"t", "mean_regret", "std_error", "gap_free_bound"});
    for (const auto& r : rows)
        t.add({std::to_string(r.t), format_number(r.mean_regret), format_number(r.std_error),
               format_number(r.gap_free_bound)});
    return t;
}

CsvTable trace_table(const std::vector<TraceRow>& rows) {
    CsvTable t({"trial", "t", "arm", "reward", "inst_regret"});
    for (const auto& r : rows)
        t.add({std::to_string(r.trial), std::to_string(r.t), std::to_string(r.arm), format_number(r.reward),
               format_number(r.inst_regret)});
    return t;
}

CsvTable bai_table(const std::vector<BaiRow>& rows) {
    CsvTable t({"budget", "misid_rate", "std_error", "baseline_rate", "baseline_std_error"});
    for (const auto& r : rows)
        t.add({std::to_string(r.budget), format_number(r.policy_rate), format_number(r.policy_se),
               format_number(r.baseline_rate), format_number(r.baseline_se)});
    return t;
}

CsvTable demo_table(const std::vector<DemoRow>& rows) {
    CsvTable t({"eps", "rho_diff", "w1", "ratio"});
    for (const auto& r : rows)
        t.add({format_number(r.eps), format_number(r.rho_diff), format_number(r.w1), format_number(r.ratio)});
    return t;
}

// ----- checks --------------------------------------------------------------

std::vector<Check> coverage_checks(const std::vector<CoverageRow>& rows) {
    std::size_t checked = 0, covered = 0;
    std::string failures;
    for (const auto& r : rows) {
        if (!r.checked) continue;
        ++checked;
        if (r.covered)
            ++covered;
        else
            failures += " (n=" + std::to_string(r.n) + ", eps=" + format_number(r.eps) + ")";
    }
    std::string detail = std::to_string(covered) + "/" + std::to_string(checked) + " checked rows covered";
    if (!failures.empty()) detail += "; violated at" + failures;
    return {{"coverage", checked > 0 && covered == checked, detail}};
}

std::vector<Check> bai_checks(const std::vector<BaiRow>& rows) {
    std::vector<Check> out;
    // A rate that has reached zero may stay there.
    bool decreasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].policy_rate < rows[i - 1].policy_rate) && !(rows[i].policy_rate == 0.0 && rows[i - 1].policy_rate == 0.0))
            decreasing = false;
    std::string rates;
    for (const auto& r : rows) rates += (rates.empty() ? "" : " ") + format_number(r.policy_rate);
    out.push_back({"monotone error decay", decreasing, "rates " + rates});
    const auto& last = rows.back();
    const double slack = 2.0 * std::hypot(last.policy_se, last.baseline_se);
    out.push_back({"no worse than uniform allocation", last.policy_rate <= last.baseline_rate + slack,
                   format_number(last.policy_rate) + " vs baseline " + format_number(last.baseline_rate)});
    return out;
}

std::vector<Check> demo_checks(const std::vector<DemoRow>& rows) {
    bool increasing = true, scaling = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double expected = 1.0 / (3.0 * std::sqrt(rows[i].eps));
        if (std::abs(rows[i].ratio - expected) > 1e-12 * expected) scaling = false;
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (rows[j].eps < rows[i].eps && !(rows[j].ratio > rows[i].ratio)) increasing = false;
    }
    return {{"ratio grows as eps shrinks", increasing, ""},
            {"ratio equals 1/(3 sqrt(eps))", scaling, "relative tolerance 1e-12"}};
}

std::vector<Check> regret_checks(const std::vector<RegretRow>& rows, RegretPolicy policy) {
    std::vector<Check> out;
    if (policy == RegretPolicy::Mvts) {
        const auto& last = rows.back();
        if (std::isnan(last.mvts_rhs)) {
            out.push_back({"mvts yardstick", last.mean_regret == 0.0, "degenerate instance; regret must vanish"});
        } else {
            out.push_back({"mvts yardstick", last.regret_over_log_t <= 1.25 * last.mvts_rhs,
                           "R_n/log n = " + format_number(last.regret_over_log_t) + " vs rhs " +
                               format_number(last.mvts_rhs)});
        }
        return out;
    }
    bool ok = true;
    for (const auto& r : rows)
        if (r.mean_regret > r.gap_free_bound) ok = false;
    out.push_back({"gap-free regret bound", ok, "mean regret below the bound at every checkpoint"});
    return out;
}

}  // namespace riskbandit::sim
