#include <phychal/channel.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phychal {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double light_speed = 299792458.0;

void validate(const multipath_model& m) {
    if (m.fft_size < 2) throw std::invalid_argument("channel: fft_size must be >= 2");
    if (!(m.guard_length > 0.0))
        throw std::invalid_argument("channel: guard_length must be > 0");
    if (!(m.delay_rms > 0.0))
        throw std::invalid_argument("channel: delay_rms must be > 0");
    if (m.path_count < 1)
        throw std::invalid_argument("channel: path_count must be >= 1");
}
} // namespace

channel_realization sample_realization(rng_t& rng, const multipath_model& model) {
    validate(model);
    channel_realization r;
    r.fft_size = model.fft_size;
    const auto paths = static_cast<std::size_t>(model.path_count);
    r.delays.resize(paths);
    r.gains.resize(paths);
    for (auto& d : r.delays) d = model.guard_length * u01(rng);
    // Tap variances follow the power-delay profile with a deterministic
    // scale chosen so E|h_k|^2 = 1 in expectation over the delay draw;
    // normalizing by the realized weight sum instead would bias the
    // inter-subcarrier correlation away from its closed form.
    const double mean_weight = model.delay_rms / model.guard_length *
                               (1.0 - std::exp(-model.guard_length / model.delay_rms));
    const double scale = 2.0 * static_cast<double>(paths) * mean_weight;
    for (std::size_t i = 0; i < paths; ++i) {
        const double sigma =
            std::sqrt(std::exp(-r.delays[i] / model.delay_rms) / scale);
        r.gains[i] = cplx(sigma * sample_normal(rng), sigma * sample_normal(rng));
    }
    return r;
}

cplx subcarrier_gain(const channel_realization& r, int subcarrier) {
    if (r.fft_size < 2 || r.delays.size() != r.gains.size() || r.delays.empty())
        throw std::invalid_argument("subcarrier_gain: malformed realization");
    cplx h = 0.0;
    const double w = two_pi * subcarrier / r.fft_size;
    for (std::size_t i = 0; i < r.delays.size(); ++i)
        h += r.gains[i] * std::polar(1.0, -w * r.delays[i]);
    return h;
}

std::vector<cplx> subcarrier_gains(const channel_realization& r,
                                   std::span<const int> subcarriers) {
    std::vector<cplx> out;
    out.reserve(subcarriers.size());
    for (int k : subcarriers) out.push_back(subcarrier_gain(r, k));
    return out;
}

cplx subchannel_correlation(const multipath_model& model, int delta_l) {
    validate(model);
    // rho(dl) = [int_0^G e^{-t/tau} e^{-j 2 pi dl t / N} dt] / [int_0^G e^{-t/tau} dt]
    const double tau = model.delay_rms;
    const double guard = model.guard_length;
    const cplx a(1.0 / tau, two_pi * delta_l / model.fft_size);
    const cplx numerator = (1.0 - std::exp(-guard * a)) / a;
    const double denominator = tau * (1.0 - std::exp(-guard / tau));
    return numerator / denominator;
}

double coherence_time(double carrier_hz, double speed_mps) {
    if (!(carrier_hz > 0.0) || !(speed_mps > 0.0))
        throw std::invalid_argument("coherence_time: arguments must be > 0");
    const double doppler = speed_mps * carrier_hz / light_speed;
    return std::sqrt(9.0 / (16.0 * std::numbers::pi)) / doppler;
}

} // namespace phychal
