#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "riskbandit/bandit.hpp"
#include "riskbandit/error.hpp"
#include "riskbandit/numeric.hpp"
#include "riskbandit/risk.hpp"

namespace riskbandit::bandit {
namespace {

void require_feasible(std::size_t arms, std::size_t budget) {
    if (arms < 2) throw DomainError("best-arm identification needs at least two arms");
    const std::size_t need = minimal_budget(arms);
    if (budget < need)
        throw DomainError("budget too small: minimal feasible budget is " + std::to_string(need));
}

void require_level(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("risk level alpha must lie in (0, 1)");
}

struct Run {
    Environment& env;
    std::vector<std::vector<double>> samples;
    BaiOutcome out;

    explicit Run(Environment& e) : env(e), samples(e.size()) { out.pulls.assign(e.size(), 0); }

    void top_up(std::size_t arm, std::size_t target) {
        while (samples[arm].size() < target) {
            samples[arm].push_back(env.pull(arm));
            ++out.pulls[arm];
            ++out.budget_used;
        }
    }
};

}  // namespace

double logbar(std::size_t arms) {
    double s = 0.5;
    for (std::size_t i = 2; i <= arms; ++i) s += 1.0 / static_cast<double>(i);
    return s;
}

std::size_t minimal_budget(std::size_t arms) { return arms * (arms + 1); }

std::vector<std::size_t> phase_schedule(std::size_t arms, std::size_t budget) {
    require_feasible(arms, budget);
    const double lb = logbar(arms);
    const double spare = static_cast<double>(budget - arms);
    std::vector<std::size_t> n(arms - 1);
    for (std::size_t p = 1; p < arms; ++p)
        n[p - 1] = detail::ceil_index(spare / (lb * static_cast<double>(arms + 1 - p)));
    return n;
}

BaiOutcome run_cvar_sr(Environment& env, double alpha, std::size_t budget) {
    require_level(alpha);
    const std::size_t K = env.size();
    const auto schedule = phase_schedule(K, budget);
    Run run(env);
    std::vector<std::size_t> active(K);
    std::iota(active.begin(), active.end(), 0);

    for (std::size_t p = 1; p < K; ++p) {
        for (std::size_t a : active) run.top_up(a, schedule[p - 1]);
        std::size_t worst = active.front();
        double worst_value = -INFINITY;
        for (std::size_t a : active) {
            const double v = risk::cvar_est(run.samples[a], alpha);
            if (v >= worst_value) {  // later (higher) index wins ties
                worst_value = v;
                worst = a;
            }
        }
        run.out.log.push_back({p, worst, false, worst_value});
        active.erase(std::find(active.begin(), active.end(), worst));
    }
    run.out.recommended = active;
    return run.out;
}

BaiOutcome run_qsar(Environment& env, double alpha, std::size_t m, std::size_t budget) {
    require_level(alpha);
    const std::size_t K = env.size();
    if (m < 1 || m >= K) throw DomainError("m must satisfy 1 <= m < K");
    const auto schedule = phase_schedule(K, budget);
    Run run(env);
    std::vector<std::size_t> active(K);
    std::iota(active.begin(), active.end(), 0);
    std::vector<std::size_t> accepted;

    for (std::size_t p = 1; p < K; ++p) {
        for (std::size_t a : active) run.top_up(a, schedule[p - 1]);

        struct Entry {
            std::size_t arm;
            double var;
        };
        std::vector<Entry> ranked;
        for (std::size_t a : active) ranked.push_back({a, risk::var_est(run.samples[a], alpha)});
        std::stable_sort(ranked.begin(), ranked.end(), [](const Entry& x, const Entry& y) { return x.var > y.var; });

        const std::size_t mp = m - accepted.size();
        std::size_t chosen = 0;
        bool accept = false;
        if (mp == 0) {
            chosen = ranked.size() - 1;
        } else if (mp >= ranked.size()) {
            chosen = 0;
            accept = true;
        } else {
            double best_gap = -INFINITY;
            for (std::size_t r = 0; r < ranked.size(); ++r) {
                const bool top = r < mp;
                const double gap = top ? ranked[r].var - ranked[mp].var : ranked[mp - 1].var - ranked[r].var;
                if (gap > best_gap || (gap == best_gap && ranked[r].arm > ranked[chosen].arm)) {
                    best_gap = gap;
                    chosen = r;
                    accept = top;
                }
            }
        }
        const Entry e = ranked[chosen];
        run.out.log.push_back({p, e.arm, accept, e.var});
        if (accept) accepted.push_back(e.arm);
        active.erase(std::find(active.begin(), active.end(), e.arm));
    }
    if (accepted.size() < m) accepted.push_back(active.front());
    std::sort(accepted.begin(), accepted.end());
    run.out.recommended = accepted;
    return run.out;
}

BaiOutcome run_uniform_bai(Environment& env, BaiTarget target, double alpha, std::size_t m, std::size_t budget) {
    require_level(alpha);
    const std::size_t K = env.size();
    if (m < 1 || m >= K) throw DomainError("m must satisfy 1 <= m < K");
    const std::size_t each = budget / K;
    if (each == 0) throw DomainError("budget too small: minimal feasible budget is " + std::to_string(K));
    Run run(env);
    std::vector<double> score(K);
    for (std::size_t a = 0; a < K; ++a) {
        run.top_up(a, each);
        // Lower score is better; VaR targets the highest values.
        score[a] = target == BaiTarget::LowestCvar ? risk::cvar_est(run.samples[a], alpha)
                                                   : -risk::var_est(run.samples[a], alpha);
    }
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return score[x] < score[y]; });
    run.out.recommended.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(run.out.recommended.begin(), run.out.recommended.end());
    return run.out;
}

}  // namespace riskbandit::bandit
