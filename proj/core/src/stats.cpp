#include <phychal/stats.hpp>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phychal {

namespace {

// GSL aborts on range errors by default; disable once, handle returns locally.
const auto gsl_handler_off = [] {
    gsl_set_error_handler_off();
    return true;
}();

void check_order(int order) {
    if (order < 1) throw std::invalid_argument("order must be >= 1");
}

} // namespace

double bessel_i0(double x) {
    x = std::abs(x);
    if (x > 700.0) return std::numeric_limits<double>::infinity();
    return gsl_sf_bessel_I0(x);
}

double bessel_i1(double x) {
    if (std::abs(x) > 700.0)
        return std::copysign(std::numeric_limits<double>::infinity(), x);
    return gsl_sf_bessel_I1(x);
}

double log_bessel_i0(double x) {
    x = std::abs(x);
    return std::log(gsl_sf_bessel_I0_scaled(x)) + x;
}

double log_bessel_in(int n, double x) {
    if (n < 0) throw std::invalid_argument("log_bessel_in: n must be >= 0");
    x = std::abs(x);
    if (n == 0) return log_bessel_i0(x);
    const double scaled = gsl_sf_bessel_In_scaled(n, x);
    if (scaled > 0.0) return std::log(scaled) + x;
    // Scaled value underflowed (x tiny relative to n); leading series term
    // I_n(x) ~ (x/2)^n / n! is accurate there.
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    return n * std::log(0.5 * x) - gsl_sf_lngamma(n + 1.0);
}

double marcum_q(int order, double a, double b) {
    check_order(order);
    if (std::isnan(a) || std::isnan(b) || a < 0.0 || b < 0.0)
        throw std::invalid_argument("marcum_q: a, b must be >= 0");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return gsl_sf_gamma_inc_Q(order, b);
    // Poisson mixture: Q_J(a,b) = sum_k e^{-a} a^k / k! * Q(J + k, b),
    // truncated to the window carrying all but ~1e-14 of the Poisson mass.
    const double half_width = 8.0 * std::sqrt(a + 1.0) + 20.0;
    const long k_lo = std::max(0L, static_cast<long>(std::floor(a - half_width)));
    const long k_hi = static_cast<long>(std::ceil(a + half_width));
    double sum = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) {
        const double log_pois = k * std::log(a) - a - gsl_sf_lngamma(k + 1.0);
        const double tail = gsl_sf_gamma_inc_Q(order + static_cast<double>(k), b);
        sum += std::exp(log_pois) * tail;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double noncentral_chi_square_pdf(double x, int order,
                                 const noncentral_chi_square& p) {
    check_order(order);
    if (!(p.sigma2 > 0.0) || p.lambda < 0.0)
        throw std::invalid_argument("noncentral_chi_square_pdf: bad parameters");
    if (x < 0.0) return 0.0;
    const int j = order;
    const double s2 = p.sigma2;
    if (p.lambda < 1e-300) {
        // Central limit: f(x) = x^{J-1} e^{-x/s2} / (s2^J Gamma(J)).
        if (x == 0.0) return j == 1 ? 1.0 / s2 : 0.0;
        return std::exp((j - 1) * std::log(x) - x / s2 - j * std::log(s2) -
                        gsl_sf_lngamma(j));
    }
    if (x == 0.0) return j == 1 ? std::exp(-p.lambda / s2) / s2 : 0.0;
    const double arg = 2.0 * std::sqrt(x * p.lambda) / s2;
    const double log_f = -(x + p.lambda) / s2 +
                         0.5 * (j - 1) * std::log(x / p.lambda) +
                         log_bessel_in(j - 1, arg) - std::log(s2);
    return std::exp(log_f);
}

double noncentral_chi_square_cdf(double x, int order,
                                 const noncentral_chi_square& p) {
    check_order(order);
    if (!(p.sigma2 > 0.0) || p.lambda < 0.0)
        throw std::invalid_argument("noncentral_chi_square_cdf: bad parameters");
    if (x <= 0.0) return 0.0;
    return 1.0 - marcum_q(order, p.lambda / p.sigma2, x / p.sigma2);
}

noncentral_chi_square fit_noncentral_chi_square(std::span<const double> samples,
                                                int order) {
    check_order(order);
    if (samples.empty())
        throw std::invalid_argument("fit_noncentral_chi_square: empty sample");
    const auto m = compute_moments(samples);
    const double j = order;
    const double disc = m.mean * m.mean - j * m.variance;
    noncentral_chi_square fit;
    if (disc > 0.0) {
        fit.lambda = std::sqrt(disc);
        fit.sigma2 = (m.mean - fit.lambda) / j;
    } else {
        fit.lambda = 0.0;
        fit.sigma2 = m.mean / j; // central fallback matching the mean
    }
    if (!(fit.sigma2 > 0.0))
        throw std::domain_error("fit_noncentral_chi_square: degenerate sample");
    return fit;
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, k = 0;
    double d = 0.0;
    while (i < a.size() && k < b.size()) {
        const double x = std::min(a[i], b[k]);
        while (i < a.size() && a[i] <= x) ++i;
        while (k < b.size() && b[k] <= x) ++k;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(k) / nb));
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ks_critical_value: alpha must be in (0,1)");
    if (n == 0) throw std::invalid_argument("ks_critical_value: n must be > 0");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) /
           std::sqrt(static_cast<double>(n));
}

sample_moments compute_moments(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("compute_moments: empty sample");
    // Welford, for stable variance on large samples.
    double mean = 0.0, m2 = 0.0;
    double count = 0.0;
    for (double x : samples) {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }
    return {mean, m2 / count};
}

double empirical_upper_quantile(std::vector<double> samples, double tail) {
    if (samples.empty())
        throw std::invalid_argument("empirical_upper_quantile: empty sample");
    if (!(tail >= 0.0 && tail <= 1.0))
        throw std::invalid_argument("empirical_upper_quantile: tail must be in [0,1]");
    std::sort(samples.begin(), samples.end());
    const auto n = samples.size();
    const auto k = static_cast<std::size_t>(tail * static_cast<double>(n));
    if (k == 0)
        return std::nextafter(samples.back(), std::numeric_limits<double>::infinity());
    return samples[n - k];
}

} // namespace phychal
