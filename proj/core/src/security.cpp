#include <phychal/security.hpp>

#include <phychal/stats.hpp>
#include <phychal/tikhonov.hpp>

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace phychal {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double log2e = std::numbers::log2e;

void check_args(double beta, int modulation_order) {
    if (std::isnan(beta) || beta < 0.0)
        throw std::invalid_argument("security: beta must be >= 0");
    if (modulation_order < 2)
        throw std::invalid_argument("security: modulation_order must be >= 2");
}

struct integrand_params {
    double beta;
    int modulation_order;
};

// f(u) * log2( sum_m exp(beta (cos(u - 2 pi m / M) - cos u)) ), the
// per-symbol equivocation integrand; its integral over the circle is the
// bound, and coherent_mi = log2 M - bound.
double equivocation_integrand(double u, void* raw) {
    const auto* p = static_cast<const integrand_params*>(raw);
    const double beta = p->beta;
    const int m_order = p->modulation_order;
    const double base = std::cos(u);
    double mix = 0.0;
    for (int m = 0; m < m_order; ++m)
        mix += std::exp(beta * (std::cos(u - two_pi * m / m_order) - base));
    const double density = std::exp(beta * base - std::log(two_pi) - log_bessel_i0(beta));
    return density * std::log2(mix);
}

} // namespace

double coherent_mi(double beta, int modulation_order, double* abs_error) {
    check_args(beta, modulation_order);
    const double log2m = std::log2(static_cast<double>(modulation_order));
    if (std::isinf(beta)) {
        if (abs_error != nullptr) *abs_error = 0.0;
        return log2m; // noiseless phases reveal the symbol exactly
    }
    integrand_params params{beta, modulation_order};
    gsl_function f;
    f.function = &equivocation_integrand;
    f.params = &params;
    constexpr std::size_t limit = 512;
    std::unique_ptr<gsl_integration_workspace,
                    decltype(&gsl_integration_workspace_free)>
        workspace(gsl_integration_workspace_alloc(limit),
                  &gsl_integration_workspace_free);
    if (workspace == nullptr)
        throw std::runtime_error("coherent_mi: workspace allocation failed");
    double bound = 0.0, err = 0.0;
    const int status =
        gsl_integration_qag(&f, -pi, pi, 1e-12, 1e-12, limit,
                            GSL_INTEG_GAUSS61, workspace.get(), &bound, &err);
    if (status != 0 && err > 1e-8)
        throw std::runtime_error("coherent_mi: quadrature failed to converge");
    if (abs_error != nullptr) *abs_error = err;
    const double mi = log2m - bound;
    return mi < 0.0 ? 0.0 : mi;
}

equivocation_result key_equivocation_bound(double beta, int modulation_order) {
    equivocation_result r;
    r.beta = beta;
    r.modulation_order = modulation_order;
    r.coherent_mi = coherent_mi(beta, modulation_order, &r.quadrature_error);
    r.bound = std::log2(static_cast<double>(modulation_order)) - r.coherent_mi;
    return r;
}

double noncoherent_log_density(std::span<const double> observed,
                               std::span<const int> key_block,
                               int modulation_order, double beta) {
    check_args(beta, modulation_order);
    if (std::isinf(beta))
        throw std::invalid_argument("noncoherent_log_density: beta must be finite");
    if (observed.size() != key_block.size() || observed.empty())
        throw std::invalid_argument("noncoherent_log_density: length mismatch");
    // Marginalizing the uniform common rotation c out of
    // prod_k f_beta(z_k - phase_k - c) leaves I0(beta R)/(2 pi I0(beta))^L,
    // R = |sum_k e^{j(z_k - phase_k)}|.
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const double d =
            observed[k] - two_pi * key_block[k] / modulation_order;
        re += std::cos(d);
        im += std::sin(d);
    }
    const double resultant = std::hypot(re, im);
    const auto length = static_cast<double>(observed.size());
    return log_bessel_i0(beta * resultant) -
           length * (std::log(two_pi) + log_bessel_i0(beta));
}

mi_estimate mi_noncoherent_estimate(double beta, int modulation_order,
                                    int block_length, int trials, rng_t& rng) {
    check_args(beta, modulation_order);
    if (std::isinf(beta))
        throw std::invalid_argument("mi_noncoherent_estimate: beta must be finite");
    if (block_length < 1)
        throw std::invalid_argument("mi_noncoherent_estimate: block_length must be >= 1");
    if (trials < 2)
        throw std::invalid_argument("mi_noncoherent_estimate: trials must be >= 2");
    double key_count = 1.0;
    for (int k = 0; k < block_length; ++k) {
        key_count *= modulation_order;
        if (key_count > (1 << 20))
            throw std::invalid_argument(
                "mi_noncoherent_estimate: key space too large to enumerate");
    }
    const auto total_keys = static_cast<std::uint64_t>(key_count);
    const double log_keys = std::log(key_count);

    std::vector<int> key(static_cast<std::size_t>(block_length));
    std::vector<int> other(static_cast<std::size_t>(block_length));
    std::vector<double> z(static_cast<std::size_t>(block_length));
    std::vector<double> log_terms(total_keys);

    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        for (auto& s : key)
            s = static_cast<int>(sample_below(
                rng, static_cast<std::uint64_t>(modulation_order)));
        const double rotation = pi - two_pi * u01(rng);
        for (int k = 0; k < block_length; ++k)
            z[static_cast<std::size_t>(k)] = wrap_angle(
                two_pi * key[static_cast<std::size_t>(k)] / modulation_order +
                tikhonov_sample(rng, beta) + rotation);

        const double log_p_given_key =
            noncoherent_log_density(z, key, modulation_order, beta);
        // log p(z) = logsumexp over all keys - log(M^L), by exhaustive
        // enumeration of the mixture.
        for (std::uint64_t idx = 0; idx < total_keys; ++idx) {
            std::uint64_t rest = idx;
            for (int k = 0; k < block_length; ++k) {
                other[static_cast<std::size_t>(k)] =
                    static_cast<int>(rest % modulation_order);
                rest /= modulation_order;
            }
            log_terms[idx] =
                noncoherent_log_density(z, other, modulation_order, beta);
        }
        double max_term = log_terms[0];
        for (double v : log_terms) max_term = std::max(max_term, v);
        double accum = 0.0;
        for (double v : log_terms) accum += std::exp(v - max_term);
        const double log_marginal = max_term + std::log(accum) - log_keys;

        const double info_bits = (log_p_given_key - log_marginal) * log2e;
        sum += info_bits;
        sum_sq += info_bits * info_bits;
    }

    mi_estimate est;
    est.trials = trials;
    est.value = sum / trials;
    const double var = std::max(sum_sq / trials - est.value * est.value, 0.0);
    est.std_error = std::sqrt(var / trials);
    return est;
}

} // namespace phychal
