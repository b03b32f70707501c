#include "riskbandit/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "riskbandit/error.hpp"

namespace riskbandit::dist {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

ArmModel ArmModel::gaussian(double mean, double stddev) {
    if (!std::isfinite(mean) || !std::isfinite(stddev) || !(stddev > 0.0))
        throw DomainError("gaussian arm needs finite mean and stddev > 0");
    return ArmModel(Gaussian{mean, stddev});
}

ArmModel ArmModel::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli arm needs p in [0, 1]");
    return ArmModel(Bernoulli{p});
}

ArmModel ArmModel::uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
        throw DomainError("uniform arm needs finite bounds with hi > lo");
    return ArmModel(Uniform{lo, hi});
}

ArmModel ArmModel::empirical(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
        throw DomainError("empirical arm needs equally many values and probabilities");
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DomainError("empirical arm values must be finite");
        if (!(probs[i] >= 0.0)) throw DomainError("empirical arm probabilities must be non-negative");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("empirical arm probabilities must sum to 1");

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    Empirical e;
    for (std::size_t idx : order) {
        if (!e.values.empty() && e.values.back() == values[idx]) {
            e.probs.back() += probs[idx];
        } else {
            e.values.push_back(values[idx]);
            e.probs.push_back(probs[idx]);
        }
    }
    return ArmModel(std::move(e));
}

ArmModel ArmModel::point_mass(double value) { return empirical({value}, {1.0}); }

double ArmModel::subgaussian_proxy() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.stddev * g.stddev; },
                          [](const Bernoulli&) { return 0.25; },
                          [](const Uniform& u) { return 0.25 * (u.hi - u.lo) * (u.hi - u.lo); },
                          [](const Empirical& e) {
                              const double r = e.values.back() - e.values.front();
                              return 0.25 * r * r;
                          },
                      },
                      v_);
}

double ArmModel::mean() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.mean; },
                          [](const Bernoulli& b) { return b.p; },
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                          [](const Empirical& e) {
                              double m = 0.0;
                              for (std::size_t i = 0; i < e.values.size(); ++i) m += e.probs[i] * e.values[i];
                              return m;
                          },
                      },
                      v_);
}

double ArmModel::variance() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.stddev * g.stddev; },
                          [](const Bernoulli& b) { return b.p * (1.0 - b.p); },
                          [](const Uniform& u) { return (u.hi - u.lo) * (u.hi - u.lo) / 12.0; },
                          [this](const Empirical& e) {
                              const double m = mean();
                              double v = 0.0;
                              for (std::size_t i = 0; i < e.values.size(); ++i)
                                  v += e.probs[i] * (e.values[i] - m) * (e.values[i] - m);
                              return v;
                          },
                      },
                      v_);
}

double ArmModel::cdf(double x) const {
    return std::visit(overloaded{
                          [x](const Gaussian& g) { return normal_cdf((x - g.mean) / g.stddev); },
                          [x](const Bernoulli& b) { return x < 0.0 ? 0.0 : (x < 1.0 ? 1.0 - b.p : 1.0); },
                          [x](const Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
                          [x](const Empirical& e) {
                              double c = 0.0;
                              for (std::size_t i = 0; i < e.values.size() && e.values[i] <= x; ++i) c += e.probs[i];
                              return std::min(c, 1.0);
                          },
                      },
                      v_);
}

Empirical ArmModel::atoms() const {
    if (const auto* b = std::get_if<Bernoulli>(&v_)) return Empirical{{0.0, 1.0}, {1.0 - b->p, b->p}};
    if (const auto* e = std::get_if<Empirical>(&v_)) return *e;
    throw DomainError("continuous arm has no atoms");
}

std::string ArmModel::describe() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return "gaussian(" + fmt_num(g.mean) + "," + fmt_num(g.stddev) + ")"; },
                          [](const Bernoulli& b) { return "bernoulli(" + fmt_num(b.p) + ")"; },
                          [](const Uniform& u) { return "uniform(" + fmt_num(u.lo) + "," + fmt_num(u.hi) + ")"; },
                          [](const Empirical& e) {
                              std::string s = "empirical(";
                              for (std::size_t i = 0; i < e.values.size(); ++i) {
                                  if (i) s += ' ';
                                  s += fmt_num(e.values[i]) + ":" + fmt_num(e.probs[i]);
                              }
                              return s + ")";
                          },
                      },
                      v_);
}

double draw(const ArmModel& model, RngStream& rng) {
    return std::visit(overloaded{
                          [&](const Gaussian& g) { return rng.normal(g.mean, g.stddev); },
                          [&](const Bernoulli& b) { return rng.uniform() < b.p ? 1.0 : 0.0; },
                          [&](const Uniform& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
                          [&](const Empirical& e) {
                              const double u = rng.uniform();
                              double c = 0.0;
                              for (std::size_t i = 0; i + 1 < e.values.size(); ++i) {
                                  c += e.probs[i];
                                  if (u < c) return e.values[i];
                              }
                              return e.values.back();
                          },
                      },
                      model.variant());
}

std::vector<double> sample(const ArmModel& model, RngStream& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = draw(model, rng);
    return out;
}

}  // namespace riskbandit::dist
