#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <phychal/config.hpp>
#include <phychal/protocol.hpp>

namespace phychal {

enum class experiment_kind {
    correlation,     // subchannel correlation: closed form vs Monte Carlo
    equivocation,    // key-equivocation bound over a beta grid
    zeta_pdf,        // verification-statistic samples and distribution fits
    roc,             // detection/false-alarm tradeoff over an SNR grid
    impairment_roc,  // roc under receiver offsets, with zero-offset baseline
};

experiment_kind parse_experiment_kind(const std::string& name);
std::string to_string(experiment_kind kind);

struct experiment_request {
    experiment_kind kind = experiment_kind::roc;
    config cfg;
    std::uint64_t master_seed = 1;
    std::string output_dir;
    int trials_override = 0;  // 0 = use config
    int threads = 1;
};

struct experiment_result {
    std::vector<std::string> output_files; // paths written, manifest last
    double elapsed_seconds = 0.0;
};

// Runs the experiment, writes its CSV outputs plus run_manifest.json into
// output_dir, and returns the list of files. Identical (config, seed)
// produce byte-identical CSV output for any thread count.
experiment_result run_experiment(const experiment_request& request);

// Scenario assembled from a config's [ofdm]/[plan]/[channel]/[scenario]/
// [impairments] sections with Scenario-1 defaults (N=2048, guard 128,
// 20 MHz, delta_l=32, SNR 10 dB, beta 1.5).
scenario_config scenario_from_config(const config& cfg);

// Monte Carlo batch used by experiments and the acceptance harness: returns
// `trials` verification statistics for the hypothesis, trial t seeded by
// derive_seed(master, experiment_id, sweep_index, t); deterministic for any
// thread count.
std::vector<double> collect_statistics(const scenario_config& scenario, hypothesis hyp,
                                       int trials, std::uint64_t master_seed,
                                       std::uint64_t experiment_id, std::uint64_t sweep_index,
                                       int threads);

} // namespace phychal
