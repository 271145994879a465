#include <phychal/ofdm.hpp>

#include "fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phychal {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

void validate(const ofdm_config& cfg) {
    if (cfg.fft_size < 2) throw std::invalid_argument("ofdm: fft_size must be >= 2");
    if (cfg.guard_length < 0 || cfg.guard_length > cfg.fft_size)
        throw std::invalid_argument("ofdm: guard_length must be in [0, fft_size]");
    if (!(cfg.bandwidth_hz > 0.0))
        throw std::invalid_argument("ofdm: bandwidth_hz must be > 0");
}
} // namespace

subchannel_plan allocate_equispaced(int fft_size, int delta_l) {
    if (fft_size < 2) throw std::invalid_argument("allocate_equispaced: fft_size must be >= 2");
    if (delta_l < 1) throw std::invalid_argument("allocate_equispaced: delta_l must be >= 1");
    subchannel_plan plan;
    plan.delta_l = delta_l;
    const int count = delta_l < fft_size ? fft_size / delta_l + 1 : 1;
    plan.subcarriers.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        plan.subcarriers.push_back(std::min(k * delta_l, fft_size - 1));
    return plan;
}

std::vector<cplx> modulate(std::span<const cplx> subcarrier_values,
                           const ofdm_config& cfg) {
    return modulate_padded(subcarrier_values, cfg, 0);
}

std::vector<cplx> modulate_padded(std::span<const cplx> subcarrier_values,
                                  const ofdm_config& cfg, int pad) {
    validate(cfg);
    if (static_cast<int>(subcarrier_values.size()) != cfg.fft_size)
        throw std::invalid_argument("modulate: need fft_size subcarrier values");
    if (pad < 0 || pad > cfg.fft_size - cfg.guard_length)
        throw std::invalid_argument("modulate: pad must be in [0, fft_size - guard_length]");
    const auto n = static_cast<std::size_t>(cfg.fft_size);
    const auto guard = static_cast<std::size_t>(cfg.guard_length);
    std::vector<cplx> body(n);
    detail::fft_unitary_backward(subcarrier_values, body);
    std::vector<cplx> stream(guard + n + static_cast<std::size_t>(pad));
    // Cyclic prefix, body, then a cyclic suffix continuing the periodic signal.
    for (std::size_t i = 0; i < guard; ++i) stream[i] = body[n - guard + i];
    for (std::size_t i = 0; i < n; ++i) stream[guard + i] = body[i];
    for (std::size_t i = 0; i < static_cast<std::size_t>(pad); ++i)
        stream[guard + n + i] = body[i];
    return stream;
}

std::vector<cplx> demodulate(std::span<const cplx> stream, const ofdm_config& cfg,
                             int window_offset) {
    validate(cfg);
    const long start = cfg.guard_length + window_offset;
    if (start < 0 ||
        start + cfg.fft_size > static_cast<long>(stream.size()))
        throw std::invalid_argument("demodulate: window outside the stream");
    std::vector<cplx> bins(static_cast<std::size_t>(cfg.fft_size));
    detail::fft_unitary_forward(
        stream.subspan(static_cast<std::size_t>(start),
                       static_cast<std::size_t>(cfg.fft_size)),
        bins);
    return bins;
}

void apply_carrier_offset(std::span<cplx> stream, double theta,
                          const ofdm_config& cfg) {
    validate(cfg);
    if (theta == 0.0) return;
    const double step = two_pi * theta / cfg.fft_size;
    for (std::size_t n = 0; n < stream.size(); ++n)
        stream[n] *= std::polar(1.0, step * static_cast<double>(n));
}

double carrier_offset_attenuation(double theta, int fft_size) {
    if (fft_size < 2)
        throw std::invalid_argument("carrier_offset_attenuation: fft_size must be >= 2");
    const double x = std::numbers::pi * theta;
    if (std::abs(std::sin(x / fft_size)) < 1e-300) return 1.0;
    return std::sin(x) / (fft_size * std::sin(x / fft_size));
}

double carrier_offset_leak_power(double theta) {
    return std::numbers::pi * std::numbers::pi * theta * theta / 3.0;
}

void apply_clock_offset(std::span<cplx> subcarrier_values,
                        std::span<const int> subcarriers, double varsigma,
                        const ofdm_config& cfg) {
    validate(cfg);
    if (subcarrier_values.size() != subcarriers.size())
        throw std::invalid_argument("apply_clock_offset: size mismatch");
    if (varsigma == 0.0) return;
    const double center = cfg.guard_length + (cfg.fft_size - 1) / 2.0;
    for (std::size_t i = 0; i < subcarriers.size(); ++i) {
        const double l = subcarriers[i];
        const double att = carrier_offset_attenuation(l * varsigma, cfg.fft_size);
        const double phase = two_pi * l * varsigma * center / cfg.fft_size;
        subcarrier_values[i] *= att * std::polar(1.0, phase);
    }
}

} // namespace phychal
