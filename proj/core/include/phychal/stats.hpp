#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace phychal {

// Modified Bessel functions of the first kind (thin wrappers with range
// handling suited to the magnitudes this library produces).
double bessel_i0(double x);
double bessel_i1(double x);
double log_bessel_i0(double x);
double log_bessel_in(int n, double x);

// Generalized Marcum Q_J(a, b) in the convention
//   Q_J(a,b) = integral_b^inf (x/a)^{(J-1)/2} e^{-(x+a)} I_{J-1}(2 sqrt(a x)) dx,
// i.e. the tail of a noncentral chi-square with 2J degrees of freedom,
// noncentrality 2a, in units where each complex dimension has unit variance
// (evaluate at b = x/sigma2). Computed as a Poisson mixture of regularized
// upper incomplete gamma tails; absolute accuracy ~1e-12.
double marcum_q(int order, double a, double b);

// Distribution model for the verification statistic: sum of J squared
// magnitudes of complex Gaussians with common per-complex-dimension variance
// sigma2 and total mean-power lambda.
//   E{zeta} = lambda + J sigma2,  Var{zeta} = J sigma2^2 + 2 lambda sigma2.
struct noncentral_chi_square {
    double lambda = 0.0; // noncentrality (sum of squared means)
    double sigma2 = 0.0; // variance per complex dimension
};

double noncentral_chi_square_pdf(double x, int order, const noncentral_chi_square& p);
double noncentral_chi_square_cdf(double x, int order, const noncentral_chi_square& p);

// Moment fit inverting the mean/variance relations above; the order-1 case
// reduces to lambda = sqrt(2 m1^2 - m2), sigma2 = m1 - lambda.
noncentral_chi_square fit_noncentral_chi_square(std::span<const double> samples, int order);

// One-sample Kolmogorov–Smirnov statistic against a cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov–Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Asymptotic critical value c(alpha)/sqrt(n), c = sqrt(-ln(alpha/2)/2).
double ks_critical_value(double alpha, std::size_t n);

// Sample mean and (biased, 1/n) variance.
struct sample_moments {
    double mean = 0.0;
    double variance = 0.0;
};
sample_moments compute_moments(std::span<const double> samples);

// Empirical upper quantile for an inclusive decision rule (x >= threshold):
// returns the k-th largest sample with k = floor(tail * n), so the rule fires
// on exactly k/n <= tail of the sample; for k == 0, just above the maximum.
double empirical_upper_quantile(std::vector<double> samples, double tail);

} // namespace phychal
