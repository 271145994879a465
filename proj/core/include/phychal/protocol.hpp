#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <phychal/channel.hpp>
#include <phychal/ofdm.hpp>
#include <phychal/stats.hpp>

namespace phychal {

// Session key: length-L vector of M-ary symbols, split into `slots` blocks
// of equal size for time-separated transmission.
struct key_material {
    std::vector<int> symbols;
    int modulation_order = 2;
    int slots = 1;

    int length() const { return static_cast<int>(symbols.size()); }
    int block_length() const { return length() / slots; }
    std::span<const int> block(int slot) const {
        return {symbols.data() + static_cast<std::size_t>(slot) * block_length(),
                static_cast<std::size_t>(block_length())};
    }
    double phase(int k) const; // 2 pi symbols[k] / M
};

// Deterministic expansion of a long-term secret and public nonces into the
// two session keys (keyed hash in counter mode; stand-in for the operator's
// key-derivation functions).
struct session_keys {
    key_material initiator;
    key_material responder;
};
session_keys derive_session_keys(std::span<const std::uint8_t> master_key,
                                 std::span<const std::uint8_t> rand_nonce,
                                 std::span<const std::uint8_t> sequence,
                                 std::span<const std::uint8_t> manage_field, int length,
                                 int modulation_order, int slots = 1);

// Uniform random key (the impersonator's best strategy).
key_material random_key(rng_t& rng, int length, int modulation_order, int slots = 1);

struct challenge_observation {
    std::vector<double> estimated_phases; // one per allocated subcarrier, (-pi, pi]
    int slot = 0;
};

// Subcarrier values for the equal-phase challenge: 1 on allocated bins.
std::vector<cplx> challenge_values(const ofdm_config& cfg, const subchannel_plan& plan);

challenge_observation estimate_phases(std::span<const cplx> received_bins, int slot = 0);

// Response bin values e^{j(phase_k - estimate_k + noise_k)} with
// noise ~ Tikhonov(beta); beta = +inf disables the artificial noise.
std::vector<cplx> response_values(std::span<const int> key_block, int modulation_order,
                                  const challenge_observation& obs, double beta, rng_t& rng);

// Basic verification statistic zeta = |sum_k conj(key_k) y_k|^2.
double verify_statistic(std::span<const cplx> received_bins, std::span<const int> key_block,
                        int modulation_order);

// Time-separated combining zeta = sum_m |K_m^dag y(t_m)|^2.
double verify_time_separated(std::span<const std::vector<cplx>> received_slots,
                             const key_material& key);

struct verification_outcome {
    double statistic = 0.0;
    double searched_ramp = 0.0; // argmax ramp (radians per subcarrier step)
    double threshold = 0.0;
    bool accept = false;
};

// Frequency-searched combining: maximize over a grid of per-subcarrier phase
// ramps; grid_i = -ramp_max + i * (2 ramp_max / grid_size) wrapped onto the
// circle, always containing 0. grid_size == 1 or ramp_max == 0 reduce to
// verify_time_separated.
verification_outcome verify_ramp_search(std::span<const std::vector<cplx>> received_slots,
                                        const key_material& key, double ramp_max, int grid_size);

// Threshold with Q_J(lambda/sigma2, iota/sigma2) <= target false-alarm rate
// (monotone bisection on the tail), and the matching detection probability.
double choose_threshold(const noncentral_chi_square& h0_fit, double target_pf, int order);
double detection_probability(const noncentral_chi_square& h1_fit, double threshold, int order);

struct impairment_ranges {
    double carrier_offset_max = 0.0; // |theta| bound, theta = df * T_u
    int sample_offset_max = 0;       // |n_eps| bound, integer samples
    double clock_offset = 0.0;       // varsigma, applied deterministically
};

enum class hypothesis { genuine = 1, impersonation = 0 };

struct scenario_config {
    ofdm_config ofdm;
    subchannel_plan plan;        // per-slot allocation
    multipath_model channel;
    double snr = 10.0;           // linear, per subcarrier, at the receiver
    double beta = 1.5;           // artificial-noise concentration; +inf = off
    int modulation_order = 2;
    int slots = 1;
    impairment_ranges impairments;
    int search_grid_size = 1;       // ramp-search resolution for verification
    double search_ramp_max = 0.0;   // search half-range (rad per allocated step);
                                    // a verifier design choice, independent of the
                                    // offsets actually drawn

    int key_length() const { return plan.count() * slots; }
};

// Search half-range covering the worst combined window offset of the two
// receivers: 2 pi * 2 n_eps_max * delta_l / N.
double default_search_ramp(const subchannel_plan& plan, const ofdm_config& ofdm,
                           int sample_offset_max);

// One end-to-end protocol trial: challenge, phase estimation, tagged
// response, reciprocal channel, receiver impairments, demodulation,
// ramp-searched verification. Under `impersonation` the responder estimates
// and pre-compensates its own independent channel and uses a fresh random
// key. Returns the verification statistic.
double run_protocol_trial(const scenario_config& scenario, hypothesis hyp, rng_t& rng);

} // namespace phychal
