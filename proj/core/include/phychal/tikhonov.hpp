#pragma once

#include <phychal/rng.hpp>

namespace phychal {

// Wrap an angle to (-pi, pi].
double wrap_angle(double x);

// Circular density e^{beta cos x} / (2 pi I0(beta)) on (-pi, pi].
// beta == 0 is the uniform density; beta == +inf degenerates to a point mass
// at 0 (pdf is not defined there and throws).
double tikhonov_pdf(double x, double beta);

// Log of the density; avoids overflow for large beta.
double tikhonov_log_pdf(double x, double beta);

// Cumulative distribution on (-pi, x]; numeric, for goodness-of-fit tests.
double tikhonov_cdf(double x, double beta);

// Draw one variate. beta == 0 returns a uniform angle, beta == +inf returns
// exactly 0 (the no-noise mode). Otherwise Best–Fisher rejection sampling
// with the wrapped-Cauchy envelope.
double tikhonov_sample(rng_t& rng, double beta);

// Mean resultant length E{cos x} = I1(beta)/I0(beta).
double tikhonov_mean_resultant(double beta);

} // namespace phychal
