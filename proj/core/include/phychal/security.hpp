#pragma once

#include <span>

#include <phychal/rng.hpp>

namespace phychal {

// Mutual information (bits/symbol) of the coherent single-symbol channel
// z = 2 pi kappa / M + upsilon (mod 2 pi), kappa uniform M-ary, upsilon
// Tikhonov(beta): the most an eavesdropper with perfect channel knowledge
// can learn per subcarrier. Adaptive quadrature; abs_error reports the
// integration error estimate.
double coherent_mi(double beta, int modulation_order, double* abs_error = nullptr);

struct equivocation_result {
    double bound = 0.0;       // normalized key equivocation lower bound, bits/symbol
    double coherent_mi = 0.0; // bits/symbol
    double beta = 0.0;
    int modulation_order = 2;
    double quadrature_error = 0.0;
};

// Lower bound on (1/L) H(key | eavesdropper observation) in the worst case:
// log2 M minus the coherent mutual information.
equivocation_result key_equivocation_bound(double beta, int modulation_order);

struct mi_estimate {
    double value = 0.0;     // bits
    double std_error = 0.0;
    int trials = 0;
};

// Monte Carlo estimate of the noncoherent block mutual information
// I(z; key) for a length-L block observed through artificial noise and a
// uniform global phase rotation (worst case: channel known to the
// eavesdropper). Exact enumeration over the M^L keys in the mixture.
mi_estimate mi_noncoherent_estimate(double beta, int modulation_order, int block_length,
                                    int trials, rng_t& rng);

// Conditional density of the rotated phase vector given the key, used by the
// estimator and unit-tested against direct numeric marginalization:
// p(z | key) = I0(beta R) / (2 pi I0(beta))^L with
// R = |sum_k e^{j(z_k - phase_k)}|.
double noncoherent_log_density(std::span<const double> observed, std::span<const int> key_block,
                               int modulation_order, double beta);

} // namespace phychal
