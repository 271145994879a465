#include <phychal/protocol.hpp>
#include <phychal/tikhonov.hpp>

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace phychal;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<std::uint8_t> bytes(std::initializer_list<int> v) {
    std::vector<std::uint8_t> out;
    for (int x : v) out.push_back(static_cast<std::uint8_t>(x));
    return out;
}

scenario_config scenario_one() {
    scenario_config sc;
    sc.plan = allocate_equispaced(sc.ofdm.fft_size, 32); // 65 subcarriers
    return sc;
}

std::vector<cplx> key_tones(const key_material& key, int slot) {
    std::vector<cplx> y;
    for (int s : key.block(slot))
        y.push_back(std::polar(1.0, two_pi * s / key.modulation_order));
    return y;
}
} // namespace

TEST_CASE("session key derivation is deterministic and label-separated") {
    const auto master = bytes({1, 2, 3, 4, 5, 6, 7, 8});
    const auto rand = bytes({9, 10, 11, 12});
    const auto sqn = bytes({0, 0, 1});
    const auto amf = bytes({0x7f, 0x00});
    const auto a = derive_session_keys(master, rand, sqn, amf, 65, 2, 1);
    const auto b = derive_session_keys(master, rand, sqn, amf, 65, 2, 1);
    CHECK(a.initiator.symbols == b.initiator.symbols);
    CHECK(a.responder.symbols == b.responder.symbols);
    CHECK(a.initiator.symbols != a.responder.symbols);
    CHECK(a.initiator.length() == 65);
    for (int s : a.initiator.symbols) {
        CHECK(s >= 0);
        CHECK(s < 2);
    }
    const auto q = derive_session_keys(master, rand, sqn, amf, 68, 4, 4);
    CHECK(q.responder.length() == 68);
    CHECK(q.responder.block_length() == 17);
    for (int s : q.responder.symbols) {
        CHECK(s >= 0);
        CHECK(s < 4);
    }
    CHECK_THROWS_AS(derive_session_keys(master, rand, sqn, amf, 65, 2, 2),
                    std::invalid_argument); // 65 % 2 != 0
    CHECK_THROWS_AS(derive_session_keys({}, rand, sqn, amf, 4, 2, 1),
                    std::invalid_argument);
}

TEST_CASE("flipping one nonce bit changes about half the key symbols") {
    const auto master = bytes({42, 42, 42, 42});
    const auto sqn = bytes({1});
    const auto amf = bytes({2});
    const int trials = 1000, length = 65;
    double diff_total = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::array<std::uint8_t, 4> rand{
            static_cast<std::uint8_t>(t & 0xff),
            static_cast<std::uint8_t>((t >> 8) & 0xff), 0, 0};
        auto flipped = rand;
        flipped[3] ^= 0x01;
        const auto a = derive_session_keys(
            master, std::span<const std::uint8_t>(rand), sqn, amf, length, 2, 1);
        const auto b = derive_session_keys(
            master, std::span<const std::uint8_t>(flipped), sqn, amf, length, 2,
            1);
        int diff = 0;
        for (int k = 0; k < length; ++k)
            if (a.responder.symbols[static_cast<std::size_t>(k)] !=
                b.responder.symbols[static_cast<std::size_t>(k)])
                ++diff;
        diff_total += static_cast<double>(diff) / length;
    }
    CHECK(diff_total / trials == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("random keys are uniform over the alphabet") {
    rng_t rng(55);
    const auto key = random_key(rng, 10000, 4, 1);
    std::array<int, 4> counts{};
    for (int s : key.symbols) ++counts[static_cast<std::size_t>(s)];
    for (int c : counts)
        CHECK(static_cast<double>(c) / 10000 == doctest::Approx(0.25).epsilon(0.1));
    CHECK_THROWS_AS(random_key(rng, 0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(random_key(rng, 8, 1, 1), std::invalid_argument);
}

TEST_CASE("challenge occupies exactly the allocated subcarriers") {
    const ofdm_config cfg;
    const auto plan = allocate_equispaced(cfg.fft_size, 128);
    const auto x = challenge_values(cfg, plan);
    REQUIRE(static_cast<int>(x.size()) == cfg.fft_size);
    double on = 0.0, off = 0.0;
    for (int k = 0; k < cfg.fft_size; ++k) {
        const bool allocated =
            std::find(plan.subcarriers.begin(), plan.subcarriers.end(), k) !=
            plan.subcarriers.end();
        (allocated ? on : off) += std::abs(x[static_cast<std::size_t>(k)] -
                                           (allocated ? cplx(1.0) : cplx(0.0)));
    }
    CHECK(on == 0.0);
    CHECK(off == 0.0);
}

TEST_CASE("phase estimation is exact without noise and 1/(2 snr) with it") {
    std::vector<cplx> clean{std::polar(2.0, 0.7), std::polar(0.5, -3.0),
                            cplx(0.0, 0.0)};
    const auto obs = estimate_phases(clean, 3);
    CHECK(obs.slot == 3);
    CHECK(obs.estimated_phases[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(obs.estimated_phases[1] == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(obs.estimated_phases[2] == 0.0);

    rng_t rng(60);
    const double snr = 100.0;
    const int n = 20000;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx y = 1.0 + std::sqrt(0.5 / snr) *
                                 cplx(sample_normal(rng), sample_normal(rng));
        const double err = std::arg(y);
        var += err * err;
    }
    var /= n;
    CHECK(var == doctest::Approx(1.0 / (2.0 * snr)).epsilon(0.1));
}

TEST_CASE("response with artificial noise off reproduces reciprocal tagging") {
    rng_t rng(61);
    const auto key = random_key(rng, 65, 2, 1);
    std::vector<cplx> h(65);
    for (auto& g : h)
        g = std::polar(0.5 + u01(rng), two_pi * u01(rng) - std::numbers::pi);
    const auto obs = estimate_phases(h, 0);
    const auto resp = response_values(key.block(0), 2, obs, inf, rng);
    // response through the reciprocal channel leaves |h_k| e^{j phase_k}
    std::vector<cplx> y(65);
    for (int k = 0; k < 65; ++k)
        y[static_cast<std::size_t>(k)] = resp[static_cast<std::size_t>(k)] *
                                         h[static_cast<std::size_t>(k)];
    double sum_mag = 0.0;
    for (const auto& g : h) sum_mag += std::abs(g);
    CHECK(verify_statistic(y, key.block(0), 2) ==
          doctest::Approx(sum_mag * sum_mag).epsilon(1e-9));
}

TEST_CASE("verification statistic matches the worked examples") {
    rng_t rng(62);
    const auto key = random_key(rng, 65, 2, 1);
    CHECK(verify_statistic(key_tones(key, 0), key.block(0), 2) ==
          doctest::Approx(4225.0).epsilon(1e-12));

    const auto key4 = random_key(rng, 68, 2, 4); // 4 slots of 17
    std::vector<std::vector<cplx>> slots;
    for (int m = 0; m < 4; ++m) slots.push_back(key_tones(key4, m));
    CHECK(verify_time_separated(slots, key4) ==
          doctest::Approx(1156.0).epsilon(1e-12));

    std::vector<cplx> wrong(64);
    CHECK_THROWS_AS(verify_statistic(wrong, key.block(0), 2),
                    std::invalid_argument);
}

TEST_CASE("statistic is invariant to global and per-slot phases") {
    rng_t rng(63);
    const auto key = random_key(rng, 68, 4, 4);
    std::vector<std::vector<cplx>> slots;
    for (int m = 0; m < 4; ++m) {
        auto y = key_tones(key, m);
        for (auto& v : y)
            v *= std::polar(1.0, 0.3 * u01(rng)) *
                 (0.8 + 0.4 * u01(rng)); // arbitrary distortion
        slots.push_back(y);
    }
    const double base = verify_time_separated(slots, key);
    auto rotated = slots;
    const double common = 1.234;
    for (auto& slot : rotated)
        for (auto& v : slot) v *= std::polar(1.0, common);
    CHECK(verify_time_separated(rotated, key) ==
          doctest::Approx(base).epsilon(1e-12));
    auto per_slot = slots;
    const std::array<double, 4> ph{0.1, -2.0, 3.0, 0.77};
    for (int m = 0; m < 4; ++m)
        for (auto& v : per_slot[static_cast<std::size_t>(m)])
            v *= std::polar(1.0, ph[static_cast<std::size_t>(m)]);
    CHECK(verify_time_separated(per_slot, key) ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ramp search reduces, recovers, and dominates") {
    rng_t rng(64);
    const auto key = random_key(rng, 68, 2, 4);
    std::vector<std::vector<cplx>> slots;
    for (int m = 0; m < 4; ++m) {
        auto y = key_tones(key, m);
        for (auto& v : y) v += 0.05 * cplx(sample_normal(rng), sample_normal(rng));
        slots.push_back(y);
    }
    const double plain = verify_time_separated(slots, key);
    // grid of one point or zero range: identical to the time-separated form
    CHECK(verify_ramp_search(slots, key, 0.5, 1).statistic ==
          doctest::Approx(plain).epsilon(1e-12));
    CHECK(verify_ramp_search(slots, key, 0.0, 100).statistic ==
          doctest::Approx(plain).epsilon(1e-12));

    // apply a ramp that lies exactly on the search grid and recover it
    const double ramp_max = 0.8;
    const int grid = 64;
    const double step = 2.0 * ramp_max / grid;
    const double true_ramp = -ramp_max + 40 * step;
    auto ramped = slots;
    for (auto& slot : ramped) {
        for (std::size_t k = 0; k < slot.size(); ++k)
            slot[k] *= std::polar(1.0, static_cast<double>(k) * true_ramp);
    }
    const auto found = verify_ramp_search(ramped, key, ramp_max, grid);
    CHECK(found.statistic == doctest::Approx(plain).epsilon(1e-9));
    CHECK(found.searched_ramp ==
          doctest::Approx(wrap_angle(true_ramp)).epsilon(1e-12));
    // search only ever improves on any single candidate it contains
    CHECK(found.statistic + 1e-9 >=
          verify_ramp_search(ramped, key, ramp_max, 1).statistic);
    // a wrapped alias of the true ramp scores identically (integer positions)
    auto aliased = slots;
    for (auto& slot : aliased)
        for (std::size_t k = 0; k < slot.size(); ++k)
            slot[k] *= std::polar(1.0, static_cast<double>(k) *
                                           (true_ramp + two_pi));
    CHECK(verify_ramp_search(aliased, key, ramp_max, grid).statistic ==
          doctest::Approx(found.statistic).epsilon(1e-9));
}

TEST_CASE("threshold selection and detection probability") {
    // central case: iota = -sigma2 ln(pf)
    const noncentral_chi_square h0{0.0, 2.0};
    const double pf = std::exp(-1.0);
    CHECK(choose_threshold(h0, pf, 1) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(detection_probability({0.0, 1.0}, 1.0, 1) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    // the chosen threshold is the smallest meeting the target
    const noncentral_chi_square g{12.0, 1.7};
    for (double target : {1e-1, 1e-2, 1e-3}) {
        const double iota = choose_threshold(g, target, 2);
        CHECK(marcum_q(2, g.lambda / g.sigma2, iota / g.sigma2) <= target);
        CHECK(marcum_q(2, g.lambda / g.sigma2, iota * (1.0 - 1e-6) / g.sigma2) >
              target);
    }
    CHECK(choose_threshold(g, 1.0, 2) == 0.0);
    CHECK_THROWS_AS(choose_threshold(g, 0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(detection_probability(g, -1.0, 2), std::invalid_argument);
}

TEST_CASE("protocol trial is deterministic and separates hypotheses") {
    const auto sc = scenario_one();
    rng_t a(77), b(77);
    const double za = run_protocol_trial(sc, hypothesis::genuine, a);
    const double zb = run_protocol_trial(sc, hypothesis::genuine, b);
    CHECK(za == zb);

    const int trials = 2000;
    double mean_h1 = 0.0, mean_h0 = 0.0;
    for (int t = 0; t < trials; ++t) {
        rng_t r1 = make_trial_rng(900, 1, 0, static_cast<std::uint64_t>(t));
        rng_t r0 = make_trial_rng(900, 1, 1, static_cast<std::uint64_t>(t));
        mean_h1 += run_protocol_trial(sc, hypothesis::genuine, r1);
        mean_h0 += run_protocol_trial(sc, hypothesis::impersonation, r0);
    }
    mean_h1 /= trials;
    mean_h0 /= trials;
    // impersonation mean: slots * subcarriers * mean received power per bin
    const double expected_h0 =
        sc.slots * sc.plan.count() * (1.0 + 1.0 / sc.snr);
    CHECK(mean_h0 == doctest::Approx(expected_h0).epsilon(0.08));
    CHECK(mean_h1 > 10.0 * mean_h0);
}

TEST_CASE("scenario validation") {
    auto sc = scenario_one();
    rng_t rng(1);
    sc.snr = 0.0;
    CHECK_THROWS_AS(run_protocol_trial(sc, hypothesis::genuine, rng),
                    std::invalid_argument);
    sc = scenario_one();
    sc.beta = -0.1;
    CHECK_THROWS_AS(run_protocol_trial(sc, hypothesis::genuine, rng),
                    std::invalid_argument);
    sc = scenario_one();
    sc.impairments.sample_offset_max = sc.ofdm.guard_length + 1;
    CHECK_THROWS_AS(run_protocol_trial(sc, hypothesis::genuine, rng),
                    std::invalid_argument);
    sc = scenario_one();
    sc.search_grid_size = 0;
    CHECK_THROWS_AS(run_protocol_trial(sc, hypothesis::genuine, rng),
                    std::invalid_argument);
}

TEST_CASE("default search ramp covers both receivers' offsets") {
    const ofdm_config cfg;
    const auto plan = allocate_equispaced(cfg.fft_size, 128);
    CHECK(default_search_ramp(plan, cfg, 10) ==
          doctest::Approx(two_pi * 2.0 * 10.0 * 128.0 / 2048.0).epsilon(1e-12));
    CHECK(default_search_ramp(plan, cfg, 0) == 0.0);
}
