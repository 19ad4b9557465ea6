#include "mgarch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgarch {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double chi2_sf(double x, int df) {
    if (df < 1) throw std::invalid_argument("chi2_sf: df must be >= 1");
    if (!(x > 0.0)) return 1.0;
    const double h = x / 2.0;
    if (df % 2 == 0) {
        // Q(k, h) = e^{-h} sum_{j<k} h^j / j!   with k = df/2
        const int k = df / 2;
        double term = 1.0, sum = 1.0;
        for (int j = 1; j < k; ++j) {
            term *= h / j;
            sum += term;
        }
        return std::exp(-h) * sum;
    }
    // Half-integer shape: Q(1/2, h) = erfc(sqrt(h)),
    // Q(a+1, h) = Q(a, h) + h^a e^{-h} / Gamma(a+1).
    double a = 0.5;
    double q = std::erfc(std::sqrt(h));
    double term = std::exp(a * std::log(h) - h - std::lgamma(a + 1.0));
    const int steps = (df - 1) / 2;
    for (int j = 0; j < steps; ++j) {
        q += term;
        a += 1.0;
        term *= h / a;
    }
    return std::min(1.0, std::max(0.0, q));
}

double quantile_type7(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    if (p <= 0.0) return *std::min_element(v.begin(), v.end());
    if (p >= 1.0) return *std::max_element(v.begin(), v.end());
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace mgarch
