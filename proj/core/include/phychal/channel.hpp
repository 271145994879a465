#pragma once

#include <complex>
#include <span>
#include <vector>

#include <phychal/rng.hpp>

namespace phychal {

using cplx = std::complex<double>;

// Multipath Rayleigh model: path delays uniform on [0, guard_length] (in
// samples, continuous), complex Gaussian gains with exponentially decaying
// power-delay profile e^{-delay/delay_rms}, tap variances normalized so the
// mean subcarrier power E|h_k|^2 is 1.
struct multipath_model {
    int fft_size = 2048;
    double guard_length = 128.0;
    double delay_rms = 10.0;
    int path_count = 20;
};

struct channel_realization {
    std::vector<double> delays;  // samples
    std::vector<cplx> gains;
    int fft_size = 0;
};

channel_realization sample_realization(rng_t& rng, const multipath_model& model);

// Frequency response at subcarrier k: h_k = sum_i gain_i e^{-j 2 pi k delay_i / N}.
cplx subcarrier_gain(const channel_realization& r, int subcarrier);
std::vector<cplx> subcarrier_gains(const channel_realization& r, std::span<const int> subcarriers);

// Closed-form normalized correlation between subcarriers spaced delta_l apart.
cplx subchannel_correlation(const multipath_model& model, int delta_l);

// Clarke model coherence time sqrt(9/(16 pi)) / f_D at the given carrier
// frequency and mobile speed.
double coherence_time(double carrier_hz, double speed_mps);

} // namespace phychal
