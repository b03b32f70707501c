#include <algorithm>
#include <cmath>

#include "riskbandit/dist.hpp"
#include "riskbandit/error.hpp"
#include "riskbandit/numeric.hpp"

namespace riskbandit::dist {

Edf::Edf(std::vector<double> samples) : Edf(SortedTag{}, [&] {
    std::sort(samples.begin(), samples.end());
    return std::move(samples);
}()) {}

Edf Edf::from_sorted(std::vector<double> sorted) {
    if (!std::is_sorted(sorted.begin(), sorted.end())) throw DomainError("samples are not sorted");
    return Edf(SortedTag{}, std::move(sorted));
}

Edf::Edf(SortedTag, std::vector<double> sorted) : x_(std::move(sorted)) {
    if (x_.empty()) throw DomainError("empty sample");
    for (double v : x_)
        if (!std::isfinite(v)) throw DomainError("non-finite sample");
}

double Edf::cdf(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<double>(it - x_.begin()) / static_cast<double>(x_.size());
}

double Edf::quantile(double beta) const {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("quantile level out of range");
    const std::size_t k = std::clamp<std::size_t>(detail::ceil_index(beta * static_cast<double>(x_.size())), 1,
                                                  x_.size());
    return x_[k - 1];
}

double Edf::order_statistic(std::size_t k) const {
    if (k < 1 || k > x_.size()) throw DomainError("order statistic index out of range");
    return x_[k - 1];
}

double wasserstein1(const Edf& a, const Edf& b) {
    const auto xa = a.sorted();
    const auto xb = b.sorted();
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double prev = std::min(xa.front(), xb.front());
    double total = 0.0;
    // Between consecutive breakpoints both CDFs are constant at i/na and j/nb.
    while (i < xa.size() || j < xb.size()) {
        const double next = (j == xb.size() || (i < xa.size() && xa[i] <= xb[j])) ? xa[i] : xb[j];
        total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
        while (i < xa.size() && xa[i] == next) ++i;
        while (j < xb.size() && xb[j] == next) ++j;
        prev = next;
    }
    return total;
}

}  // namespace riskbandit::dist
