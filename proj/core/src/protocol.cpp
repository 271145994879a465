#include <phychal/protocol.hpp>

#include <phychal/tikhonov.hpp>

#include "fft.hpp"

#include <openssl/hmac.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace phychal {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

void check_key_shape(int length, int modulation_order, int slots) {
    if (length < 1) throw std::invalid_argument("key: length must be >= 1");
    if (modulation_order < 2)
        throw std::invalid_argument("key: modulation_order must be >= 2");
    if (slots < 1) throw std::invalid_argument("key: slots must be >= 1");
    if (length % slots != 0)
        throw std::invalid_argument("key: length must be divisible by slots");
}

void check_key_block(std::span<const int> block, int modulation_order) {
    if (block.empty()) throw std::invalid_argument("key block must be nonempty");
    if (modulation_order < 2)
        throw std::invalid_argument("modulation_order must be >= 2");
    for (int s : block)
        if (s < 0 || s >= modulation_order)
            throw std::invalid_argument("key symbol outside modulation alphabet");
}

void check_plan(const subchannel_plan& plan, const ofdm_config& cfg) {
    if (plan.count() < 1) throw std::invalid_argument("plan: empty allocation");
    for (int l : plan.subcarriers)
        if (l < 0 || l >= cfg.fft_size)
            throw std::invalid_argument("plan: subcarrier outside [0, fft_size)");
}

// Pulls uniformly distributed symbols below `bound` out of a byte stream by
// rejection on fixed-width bit groups.
class symbol_extractor {
public:
    explicit symbol_extractor(int bound)
        : bound_(bound),
          width_(std::bit_width(static_cast<unsigned>(bound - 1))) {}

    void feed(const unsigned char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i)
            for (int b = 7; b >= 0; --b)
                bits_.push_back((data[i] >> b) & 1u);
    }

    bool next(int& symbol) {
        while (cursor_ + width_ <= bits_.size()) {
            int value = 0;
            for (std::size_t b = 0; b < width_; ++b)
                value = (value << 1) | bits_[cursor_ + b];
            cursor_ += width_;
            if (value < bound_) {
                symbol = value;
                return true;
            }
        }
        return false;
    }

private:
    int bound_;
    std::size_t width_;
    std::vector<unsigned char> bits_;
    std::size_t cursor_ = 0;
};

key_material expand_key(std::span<const std::uint8_t> master_key,
                        std::span<const std::uint8_t> rand_nonce,
                        std::span<const std::uint8_t> sequence,
                        std::span<const std::uint8_t> manage_field,
                        std::uint8_t label, int length, int modulation_order,
                        int slots) {
    key_material key;
    key.modulation_order = modulation_order;
    key.slots = slots;
    key.symbols.reserve(static_cast<std::size_t>(length));

    std::vector<std::uint8_t> message;
    message.push_back(label);
    message.insert(message.end(), rand_nonce.begin(), rand_nonce.end());
    message.insert(message.end(), sequence.begin(), sequence.end());
    message.insert(message.end(), manage_field.begin(), manage_field.end());
    const std::size_t counter_at = message.size();
    message.resize(counter_at + 4);

    symbol_extractor extractor(modulation_order);
    std::uint32_t counter = 0;
    while (static_cast<int>(key.symbols.size()) < length) {
        message[counter_at + 0] = static_cast<std::uint8_t>(counter >> 24);
        message[counter_at + 1] = static_cast<std::uint8_t>(counter >> 16);
        message[counter_at + 2] = static_cast<std::uint8_t>(counter >> 8);
        message[counter_at + 3] = static_cast<std::uint8_t>(counter);
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int digest_len = 0;
        if (HMAC(EVP_sha256(), master_key.data(),
                 static_cast<int>(master_key.size()), message.data(),
                 message.size(), digest, &digest_len) == nullptr)
            throw std::runtime_error("key derivation: HMAC failed");
        extractor.feed(digest, digest_len);
        int symbol = 0;
        while (static_cast<int>(key.symbols.size()) < length &&
               extractor.next(symbol))
            key.symbols.push_back(symbol);
        ++counter;
    }
    return key;
}

double draw_carrier_offset(rng_t& rng, double bound) {
    if (bound == 0.0) return 0.0;
    return bound * (2.0 * u01(rng) - 1.0);
}

int draw_sample_offset(rng_t& rng, int bound) {
    if (bound == 0) return 0;
    return static_cast<int>(
               sample_below(rng, static_cast<std::uint64_t>(2 * bound + 1))) -
           bound;
}

// Extracts the receive window at guard + offset, adds circular white Gaussian
// noise of the given variance, and applies the unitary transform.
std::vector<cplx> receive_window(std::span<const cplx> stream,
                                 const ofdm_config& cfg, int offset,
                                 double noise_var, rng_t& rng) {
    const long start = cfg.guard_length + offset;
    if (start < 0 || start + cfg.fft_size > static_cast<long>(stream.size()))
        throw std::invalid_argument("receive_window: window outside the stream");
    const auto n = static_cast<std::size_t>(cfg.fft_size);
    std::vector<cplx> window(n);
    const double sigma = std::sqrt(0.5 * noise_var);
    for (std::size_t i = 0; i < n; ++i) {
        window[i] = stream[static_cast<std::size_t>(start) + i] +
                    cplx(sigma * sample_normal(rng), sigma * sample_normal(rng));
    }
    std::vector<cplx> bins(n);
    detail::fft_unitary_forward(window, bins);
    return bins;
}

void validate_scenario(const scenario_config& sc) {
    check_plan(sc.plan, sc.ofdm);
    if (sc.slots < 1) throw std::invalid_argument("scenario: slots must be >= 1");
    if (!(sc.snr > 0.0)) throw std::invalid_argument("scenario: snr must be > 0");
    if (std::isnan(sc.beta) || sc.beta < 0.0)
        throw std::invalid_argument("scenario: beta must be >= 0");
    if (sc.modulation_order < 2)
        throw std::invalid_argument("scenario: modulation_order must be >= 2");
    if (sc.search_grid_size < 1)
        throw std::invalid_argument("scenario: search_grid_size must be >= 1");
    if (sc.search_ramp_max < 0.0)
        throw std::invalid_argument("scenario: search_ramp_max must be >= 0");
    const auto& imp = sc.impairments;
    if (imp.carrier_offset_max < 0.0)
        throw std::invalid_argument("scenario: carrier_offset_max must be >= 0");
    if (imp.sample_offset_max < 0 || imp.sample_offset_max > sc.ofdm.guard_length ||
        imp.sample_offset_max > sc.ofdm.fft_size - sc.ofdm.guard_length)
        throw std::invalid_argument("scenario: sample_offset_max out of range");
}

} // namespace

double key_material::phase(int k) const {
    return two_pi * symbols[static_cast<std::size_t>(k)] / modulation_order;
}

session_keys derive_session_keys(std::span<const std::uint8_t> master_key,
                                 std::span<const std::uint8_t> rand_nonce,
                                 std::span<const std::uint8_t> sequence,
                                 std::span<const std::uint8_t> manage_field,
                                 int length, int modulation_order, int slots) {
    check_key_shape(length, modulation_order, slots);
    if (master_key.empty())
        throw std::invalid_argument("derive_session_keys: empty master key");
    session_keys keys;
    keys.initiator = expand_key(master_key, rand_nonce, sequence, manage_field,
                                0x01, length, modulation_order, slots);
    keys.responder = expand_key(master_key, rand_nonce, sequence, manage_field,
                                0x02, length, modulation_order, slots);
    return keys;
}

key_material random_key(rng_t& rng, int length, int modulation_order, int slots) {
    check_key_shape(length, modulation_order, slots);
    key_material key;
    key.modulation_order = modulation_order;
    key.slots = slots;
    key.symbols.resize(static_cast<std::size_t>(length));
    for (auto& s : key.symbols)
        s = static_cast<int>(
            sample_below(rng, static_cast<std::uint64_t>(modulation_order)));
    return key;
}

std::vector<cplx> challenge_values(const ofdm_config& cfg,
                                   const subchannel_plan& plan) {
    check_plan(plan, cfg);
    std::vector<cplx> values(static_cast<std::size_t>(cfg.fft_size), 0.0);
    for (int l : plan.subcarriers) values[static_cast<std::size_t>(l)] = 1.0;
    return values;
}

challenge_observation estimate_phases(std::span<const cplx> received_bins,
                                      int slot) {
    if (received_bins.empty())
        throw std::invalid_argument("estimate_phases: empty input");
    challenge_observation obs;
    obs.slot = slot;
    obs.estimated_phases.reserve(received_bins.size());
    for (const cplx& y : received_bins) {
        // arg(0) is 0 by convention; otherwise already in (-pi, pi] up to the
        // -pi boundary, which wrap_angle folds.
        obs.estimated_phases.push_back(y == 0.0 ? 0.0 : wrap_angle(std::arg(y)));
    }
    return obs;
}

std::vector<cplx> response_values(std::span<const int> key_block,
                                  int modulation_order,
                                  const challenge_observation& obs, double beta,
                                  rng_t& rng) {
    check_key_block(key_block, modulation_order);
    if (obs.estimated_phases.size() != key_block.size())
        throw std::invalid_argument("response_values: length mismatch");
    std::vector<cplx> values;
    values.reserve(key_block.size());
    for (std::size_t k = 0; k < key_block.size(); ++k) {
        const double key_phase = two_pi * key_block[k] / modulation_order;
        const double noise = tikhonov_sample(rng, beta);
        values.push_back(
            std::polar(1.0, key_phase - obs.estimated_phases[k] + noise));
    }
    return values;
}

double verify_statistic(std::span<const cplx> received_bins,
                        std::span<const int> key_block, int modulation_order) {
    check_key_block(key_block, modulation_order);
    if (received_bins.size() != key_block.size())
        throw std::invalid_argument("verify_statistic: length mismatch");
    cplx acc = 0.0;
    for (std::size_t k = 0; k < key_block.size(); ++k) {
        const double key_phase = two_pi * key_block[k] / modulation_order;
        acc += received_bins[k] * std::polar(1.0, -key_phase);
    }
    return std::norm(acc);
}

double verify_time_separated(std::span<const std::vector<cplx>> received_slots,
                             const key_material& key) {
    check_key_shape(key.length(), key.modulation_order, key.slots);
    if (static_cast<int>(received_slots.size()) != key.slots)
        throw std::invalid_argument("verify_time_separated: slot count mismatch");
    double zeta = 0.0;
    for (int m = 0; m < key.slots; ++m)
        zeta += verify_statistic(received_slots[static_cast<std::size_t>(m)],
                                 key.block(m), key.modulation_order);
    return zeta;
}

verification_outcome verify_ramp_search(
    std::span<const std::vector<cplx>> received_slots, const key_material& key,
    double ramp_max, int grid_size) {
    check_key_shape(key.length(), key.modulation_order, key.slots);
    if (static_cast<int>(received_slots.size()) != key.slots)
        throw std::invalid_argument("verify_ramp_search: slot count mismatch");
    if (grid_size < 1)
        throw std::invalid_argument("verify_ramp_search: grid_size must be >= 1");
    if (ramp_max < 0.0)
        throw std::invalid_argument("verify_ramp_search: ramp_max must be >= 0");
    const int block = key.block_length();
    for (const auto& slot : received_slots)
        if (static_cast<int>(slot.size()) != block)
            throw std::invalid_argument("verify_ramp_search: block length mismatch");

    verification_outcome out;
    if (grid_size == 1 || ramp_max == 0.0) {
        out.statistic = verify_time_separated(received_slots, key);
        out.searched_ramp = 0.0;
        return out;
    }
    const double step = 2.0 * ramp_max / grid_size;
    out.statistic = -1.0;
    for (int i = 0; i < grid_size; ++i) {
        const double ramp = -ramp_max + i * step;
        double zeta = 0.0;
        for (int m = 0; m < key.slots; ++m) {
            const auto y = std::span<const cplx>(
                received_slots[static_cast<std::size_t>(m)]);
            const auto symbols = key.block(m);
            cplx acc = 0.0;
            for (int k = 0; k < block; ++k) {
                const double key_phase =
                    two_pi * symbols[static_cast<std::size_t>(k)] /
                    key.modulation_order;
                acc += y[static_cast<std::size_t>(k)] *
                       std::polar(1.0, -key_phase - k * ramp);
            }
            zeta += std::norm(acc);
        }
        if (zeta > out.statistic) {
            out.statistic = zeta;
            out.searched_ramp = wrap_angle(ramp);
        }
    }
    return out;
}

double choose_threshold(const noncentral_chi_square& h0_fit, double target_pf,
                        int order) {
    if (order < 1) throw std::invalid_argument("choose_threshold: order must be >= 1");
    if (!(h0_fit.sigma2 > 0.0) || h0_fit.lambda < 0.0)
        throw std::invalid_argument("choose_threshold: bad distribution fit");
    if (!(target_pf > 0.0 && target_pf <= 1.0))
        throw std::invalid_argument("choose_threshold: target_pf must be in (0,1]");
    const double a = h0_fit.lambda / h0_fit.sigma2;
    const auto tail = [&](double iota) {
        return marcum_q(order, a, iota / h0_fit.sigma2);
    };
    double lo = 0.0;
    if (tail(lo) <= target_pf) return 0.0;
    double hi = h0_fit.sigma2 * (a + order + 1.0);
    for (int i = 0; i < 200 && tail(hi) > target_pf; ++i) hi *= 2.0;
    if (tail(hi) > target_pf)
        throw std::domain_error("choose_threshold: bracket failure");
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) <= target_pf)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double detection_probability(const noncentral_chi_square& h1_fit,
                             double threshold, int order) {
    if (order < 1)
        throw std::invalid_argument("detection_probability: order must be >= 1");
    if (!(h1_fit.sigma2 > 0.0) || h1_fit.lambda < 0.0)
        throw std::invalid_argument("detection_probability: bad distribution fit");
    if (threshold < 0.0)
        throw std::invalid_argument("detection_probability: threshold must be >= 0");
    return marcum_q(order, h1_fit.lambda / h1_fit.sigma2,
                    threshold / h1_fit.sigma2);
}

double default_search_ramp(const subchannel_plan& plan, const ofdm_config& ofdm,
                           int sample_offset_max) {
    if (sample_offset_max < 0)
        throw std::invalid_argument("default_search_ramp: offset bound must be >= 0");
    return two_pi * 2.0 * sample_offset_max * plan.delta_l / ofdm.fft_size;
}

double run_protocol_trial(const scenario_config& sc, hypothesis hyp, rng_t& rng) {
    validate_scenario(sc);
    const int lp = sc.plan.count();
    const double noise_var = 1.0 / sc.snr;
    const int pad = sc.impairments.sample_offset_max;

    // Receiver imperfections are constant over the session: the responder's
    // receiver handles the challenge, the verifier's the response.
    const double cfo_responder =
        draw_carrier_offset(rng, sc.impairments.carrier_offset_max);
    const int off_responder =
        draw_sample_offset(rng, sc.impairments.sample_offset_max);
    const double cfo_verifier =
        draw_carrier_offset(rng, sc.impairments.carrier_offset_max);
    const int off_verifier =
        draw_sample_offset(rng, sc.impairments.sample_offset_max);

    const key_material verifier_key =
        random_key(rng, sc.key_length(), sc.modulation_order, sc.slots);
    key_material responder_key = verifier_key;
    if (hyp == hypothesis::impersonation)
        responder_key =
            random_key(rng, sc.key_length(), sc.modulation_order, sc.slots);

    std::vector<std::vector<cplx>> received(static_cast<std::size_t>(sc.slots));
    for (int m = 0; m < sc.slots; ++m) {
        // Link between the verifier and whoever responds (the impersonator
        // only ever sees its own link): fresh fade each slot, held at the
        // configured received power over the allocated band.
        const auto realization = sample_realization(rng, sc.channel);
        auto h = subcarrier_gains(realization, sc.plan.subcarriers);
        double band_power = 0.0;
        for (const cplx& g : h) band_power += std::norm(g);
        const double agc = std::sqrt(lp / std::max(band_power, 1e-300));
        for (cplx& g : h) g *= agc;

        // Challenge leg: equal-phase tones through the channel into the
        // responder's (imperfect) receiver.
        std::vector<cplx> tx(static_cast<std::size_t>(sc.ofdm.fft_size), 0.0);
        for (int k = 0; k < lp; ++k)
            tx[static_cast<std::size_t>(sc.plan.subcarriers[k])] = h[k];
        auto stream = modulate_padded(tx, sc.ofdm, pad);
        apply_carrier_offset(stream, cfo_responder, sc.ofdm);
        const auto challenge_bins =
            receive_window(stream, sc.ofdm, off_responder, noise_var, rng);
        std::vector<cplx> challenge_alloc(static_cast<std::size_t>(lp));
        for (int k = 0; k < lp; ++k)
            challenge_alloc[static_cast<std::size_t>(k)] =
                challenge_bins[static_cast<std::size_t>(sc.plan.subcarriers[k])];
        const auto obs = estimate_phases(challenge_alloc, m);

        // Response leg: keyed, pre-compensated, noise-tagged phases back
        // through the reciprocal channel into the verifier's receiver. The
        // responder's oscillator adds an unknown common phase each slot.
        const auto resp = response_values(responder_key.block(m),
                                          sc.modulation_order, obs, sc.beta, rng);
        const double oscillator = pi - two_pi * u01(rng);
        std::vector<cplx> tx2(static_cast<std::size_t>(sc.ofdm.fft_size), 0.0);
        for (int k = 0; k < lp; ++k)
            tx2[static_cast<std::size_t>(sc.plan.subcarriers[k])] =
                resp[static_cast<std::size_t>(k)] * std::polar(1.0, oscillator) *
                h[static_cast<std::size_t>(k)];
        auto stream2 = modulate_padded(tx2, sc.ofdm, pad);
        apply_carrier_offset(stream2, cfo_verifier, sc.ofdm);
        const auto response_bins =
            receive_window(stream2, sc.ofdm, off_verifier, noise_var, rng);
        std::vector<cplx> y(static_cast<std::size_t>(lp));
        for (int k = 0; k < lp; ++k)
            y[static_cast<std::size_t>(k)] =
                response_bins[static_cast<std::size_t>(sc.plan.subcarriers[k])];
        apply_clock_offset(y, sc.plan.subcarriers, sc.impairments.clock_offset,
                           sc.ofdm);
        received[static_cast<std::size_t>(m)] = std::move(y);
    }

    return verify_ramp_search(received, verifier_key, sc.search_ramp_max,
                              sc.search_grid_size)
        .statistic;
}

} // namespace phychal
