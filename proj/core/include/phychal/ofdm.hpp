#pragma once

#include <complex>
#include <span>
#include <vector>

#include <phychal/channel.hpp>

namespace phychal {

struct ofdm_config {
    int fft_size = 2048;
    int guard_length = 128;
    double bandwidth_hz = 20e6;

    int symbol_length() const { return fft_size + guard_length; }
    double sample_period() const { return 1.0 / bandwidth_hz; }
    double useful_period() const { return fft_size * sample_period(); }
};

// Equispaced subcarrier allocation with a band-edge clamp: indices
// 0, dl, 2dl, ... and the final index capped at fft_size-1, giving
// floor(N/dl)+1 subcarriers for dl < N and a single one otherwise.
struct subchannel_plan {
    std::vector<int> subcarriers;
    int delta_l = 0;

    int count() const { return static_cast<int>(subcarriers.size()); }
};

subchannel_plan allocate_equispaced(int fft_size, int delta_l);

// Unitary transform pair: modulate fills the time symbol
// s_n = (1/sqrt N) sum_k X_k e^{+j 2 pi n k / N} and prepends the cyclic
// prefix; demodulate drops the prefix (with an optional window shift) and
// applies y_k = (1/sqrt N) sum_n r_n e^{-j 2 pi n k / N}. With this scaling a
// white time-domain noise of variance v stays variance v per subcarrier.
std::vector<cplx> modulate(std::span<const cplx> subcarrier_values, const ofdm_config& cfg);

// Time-domain stream for one symbol plus a cyclic suffix pad of `pad`
// samples, so demodulation windows shifted by up to +/- pad samples stay in
// the cyclically consistent region.
std::vector<cplx> modulate_padded(std::span<const cplx> subcarrier_values, const ofdm_config& cfg,
                                  int pad);

std::vector<cplx> demodulate(std::span<const cplx> stream, const ofdm_config& cfg,
                             int window_offset = 0);

// Receiver carrier frequency offset theta = df * T_u: rotates sample n by
// e^{j 2 pi theta n / N}, n counted from the start of the stream.
void apply_carrier_offset(std::span<cplx> stream, double theta, const ofdm_config& cfg);

// Amplitude attenuation of the matched subcarrier under carrier offset:
// sin(pi theta) / (N sin(pi theta / N)).
double carrier_offset_attenuation(double theta, int fft_size);

// Leaked (interchannel) power for a unit-power subcarrier under carrier
// offset; small-offset approximation (pi^2 / 3) theta^2.
double carrier_offset_leak_power(double theta);

// Sampling-clock offset varsigma = (Ts' - Ts)/Ts applied in its equivalent
// per-subcarrier form: subcarrier l gets attenuation
// sin(pi l varsigma)/(N sin(pi l varsigma / N)) and phase ramp
// e^{j 2 pi l varsigma (guard + (N-1)/2) / N}.
void apply_clock_offset(std::span<cplx> subcarrier_values, std::span<const int> subcarriers,
                        double varsigma, const ofdm_config& cfg);

} // namespace phychal
