#include <phychal/experiment.hpp>

#include <phychal/security.hpp>
#include <phychal/stats.hpp>
#include <phychal/version.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace phychal {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hypothesis_name(hypothesis hyp) {
    return hyp == hypothesis::genuine ? "genuine" : "impersonation";
}

std::uint64_t experiment_id_of(experiment_kind kind) {
    return static_cast<std::uint64_t>(kind) + 1;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name,
                      std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write output file: " + name);
    return out;
}

int resolve_trials(const experiment_request& req) {
    const int trials =
        req.trials_override > 0
            ? req.trials_override
            : static_cast<int>(req.cfg.get_int("scenario", "trials", 10000));
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    return trials;
}

// json has no infinity; keep beta readable either way.
json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json resolved_scenario_json(const scenario_config& sc) {
    json j;
    j["fft_size"] = sc.ofdm.fft_size;
    j["guard_length"] = sc.ofdm.guard_length;
    j["bandwidth_hz"] = sc.ofdm.bandwidth_hz;
    j["delta_l"] = sc.plan.delta_l;
    j["subcarriers_per_slot"] = sc.plan.count();
    j["delay_rms"] = sc.channel.delay_rms;
    j["path_count"] = sc.channel.path_count;
    j["snr_linear"] = sc.snr;
    j["snr_db"] = 10.0 * std::log10(sc.snr);
    j["beta"] = json_number(sc.beta);
    j["modulation_order"] = sc.modulation_order;
    j["slots"] = sc.slots;
    j["key_length"] = sc.key_length();
    j["carrier_offset_max"] = sc.impairments.carrier_offset_max;
    j["sample_offset_max"] = sc.impairments.sample_offset_max;
    j["clock_offset"] = sc.impairments.clock_offset;
    j["search_grid_size"] = sc.search_grid_size;
    j["search_ramp_max"] = sc.search_ramp_max;
    return j;
}

void write_manifest(const experiment_request& req, const scenario_config& sc,
                    int trials, const json& extra,
                    std::vector<std::string>& outputs) {
    json manifest;
    manifest["kind"] = to_string(req.kind);
    manifest["master_seed"] = req.master_seed;
    manifest["trials"] = trials;
    manifest["scenario"] = resolved_scenario_json(sc);
    manifest["sweep"] = extra;
    manifest["outputs"] = outputs;
    manifest["version"] = version_string;
    auto out = open_output(req.output_dir, "run_manifest.json");
    out << manifest.dump(2) << "\n";
    outputs.push_back("run_manifest.json");
}

std::vector<int> int_list(const config& cfg, const std::string& section,
                          const std::string& key, std::vector<int> fallback) {
    if (!cfg.has(section, key)) return fallback;
    std::vector<int> out;
    for (double v : cfg.get_double_list(section, key, {})) {
        const int i = static_cast<int>(std::llround(v));
        if (std::abs(v - i) > 1e-9)
            throw config_error("[" + section + "] " + key + " must be integers");
        out.push_back(i);
    }
    return out;
}

struct roc_row {
    double pf, pd, snr_db, beta;
    int nw;
};

void write_roc_csv(std::ofstream& out, const std::vector<roc_row>& rows) {
    out << "pf,pd,snr_db,beta,nw\n";
    for (const auto& r : rows)
        out << format_double(r.pf) << ',' << format_double(r.pd) << ','
            << format_double(r.snr_db) << ',' << format_double(r.beta) << ','
            << r.nw << "\n";
}

// Detection rate of the inclusive rule zeta >= threshold.
double detection_rate(const std::vector<double>& h1, double threshold) {
    std::size_t hits = 0;
    for (double z : h1)
        if (z >= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(h1.size());
}

experiment_result run_correlation(const experiment_request& req) {
    experiment_result result;
    scenario_config sc = scenario_from_config(req.cfg);
    const int realizations = static_cast<int>(
        req.cfg.get_int("experiment", "realizations", resolve_trials(req)));
    const std::vector<int> grid = int_list(
        req.cfg, "experiment", "delta_l_grid",
        {1, 2, 4, 8, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512, 768,
         1024, 1536, 2047});
    auto out = open_output(req.output_dir, "correlation.csv");
    out << "delta_l,separation,rho_abs_closed,rho_abs_mc,trials\n";
    const std::uint64_t exp_id = experiment_id_of(experiment_kind::correlation);
    for (std::size_t pt = 0; pt < grid.size(); ++pt) {
        const int dl = grid[pt];
        const double closed = std::abs(subchannel_correlation(sc.channel, dl));
        cplx cross = 0.0;
        double p0 = 0.0, pd = 0.0;
        for (int r = 0; r < realizations; ++r) {
            rng_t rng = make_trial_rng(req.master_seed, exp_id, pt,
                                       static_cast<std::uint64_t>(r));
            const auto real = sample_realization(rng, sc.channel);
            const cplx h0 = subcarrier_gain(real, 0);
            const cplx hd = subcarrier_gain(real, dl);
            cross += h0 * std::conj(hd);
            p0 += std::norm(h0);
            pd += std::norm(hd);
        }
        const double mc = std::abs(cross) / std::sqrt(p0 * pd);
        out << dl << ','
            << format_double(static_cast<double>(dl) / sc.ofdm.fft_size) << ','
            << format_double(closed) << ',' << format_double(mc) << ','
            << realizations << "\n";
    }
    out.close();
    result.output_files.push_back("correlation.csv");
    json sweep;
    sweep["delta_l_grid"] = grid;
    sweep["realizations"] = realizations;
    write_manifest(req, sc, realizations, sweep, result.output_files);
    return result;
}

experiment_result run_equivocation(const experiment_request& req) {
    experiment_result result;
    scenario_config sc = scenario_from_config(req.cfg);
    std::vector<double> betas =
        req.cfg.get_double_list("experiment", "beta_grid", {});
    if (betas.empty())
        for (double b = 0.0; b <= 5.0 + 1e-9; b += 0.25) betas.push_back(b);
    const std::vector<int> orders =
        int_list(req.cfg, "experiment", "modulation_orders", {2, 4});
    auto out = open_output(req.output_dir, "equivocation.csv");
    out << "beta,modulation_order,bound,coherent_mi\n";
    for (int m : orders) {
        for (double b : betas) {
            const auto r = key_equivocation_bound(b, m);
            out << format_double(b) << ',' << m << ',' << format_double(r.bound)
                << ',' << format_double(r.coherent_mi) << "\n";
        }
    }
    out.close();
    result.output_files.push_back("equivocation.csv");
    json sweep;
    sweep["beta_grid"] = betas;
    sweep["modulation_orders"] = orders;
    write_manifest(req, sc, 0, sweep, result.output_files);
    return result;
}

experiment_result run_zeta_pdf(const experiment_request& req) {
    experiment_result result;
    scenario_config sc = scenario_from_config(req.cfg);
    const int trials = resolve_trials(req);
    const std::uint64_t exp_id = experiment_id_of(experiment_kind::zeta_pdf);
    const auto h1 = collect_statistics(sc, hypothesis::genuine, trials,
                                       req.master_seed, exp_id, 0, req.threads);
    const auto h0 = collect_statistics(sc, hypothesis::impersonation, trials,
                                       req.master_seed, exp_id, 1, req.threads);
    auto samples_out = open_output(req.output_dir, "zeta.csv");
    samples_out << "hypothesis,zeta\n";
    for (double z : h1) samples_out << "genuine," << format_double(z) << "\n";
    for (double z : h0)
        samples_out << "impersonation," << format_double(z) << "\n";
    samples_out.close();
    result.output_files.push_back("zeta.csv");

    auto fit_out = open_output(req.output_dir, "zeta_fit.csv");
    fit_out << "hypothesis,lambda,sigma2,ks_distance,ks_critical_1pct,trials\n";
    for (const auto& [name, samples] :
         {std::pair<std::string, const std::vector<double>&>{"genuine", h1},
          {"impersonation", h0}}) {
        const auto fit = fit_noncentral_chi_square(samples, sc.slots);
        const double d = ks_statistic(samples, [&](double x) {
            return noncentral_chi_square_cdf(x, sc.slots, fit);
        });
        fit_out << name << ',' << format_double(fit.lambda) << ','
                << format_double(fit.sigma2) << ',' << format_double(d) << ','
                << format_double(ks_critical_value(0.01, samples.size())) << ','
                << samples.size() << "\n";
    }
    fit_out.close();
    result.output_files.push_back("zeta_fit.csv");
    write_manifest(req, sc, trials, json::object(), result.output_files);
    return result;
}

experiment_result run_roc(const experiment_request& req) {
    experiment_result result;
    scenario_config base = scenario_from_config(req.cfg);
    const int trials = resolve_trials(req);
    const std::vector<double> snr_grid = req.cfg.get_double_list(
        "experiment", "snr_grid_db", {10.0 * std::log10(base.snr)});
    const std::vector<double> pf_grid =
        req.cfg.get_double_list("experiment", "pf_grid", {1e-3, 1e-2, 1e-1});
    const std::uint64_t exp_id = experiment_id_of(experiment_kind::roc);
    std::vector<roc_row> rows;
    for (std::size_t pt = 0; pt < snr_grid.size(); ++pt) {
        scenario_config sc = base;
        sc.snr = std::pow(10.0, snr_grid[pt] / 10.0);
        const auto h1 =
            collect_statistics(sc, hypothesis::genuine, trials, req.master_seed,
                               exp_id, 2 * pt, req.threads);
        const auto h0 = collect_statistics(sc, hypothesis::impersonation, trials,
                                           req.master_seed, exp_id, 2 * pt + 1,
                                           req.threads);
        for (double pf : pf_grid) {
            const double threshold = empirical_upper_quantile(h0, pf);
            rows.push_back({pf, detection_rate(h1, threshold), snr_grid[pt],
                            sc.beta, sc.search_grid_size});
        }
    }
    auto out = open_output(req.output_dir, "roc.csv");
    write_roc_csv(out, rows);
    out.close();
    result.output_files.push_back("roc.csv");
    json sweep;
    sweep["snr_grid_db"] = snr_grid;
    sweep["pf_grid"] = pf_grid;
    write_manifest(req, base, trials, sweep, result.output_files);
    return result;
}

experiment_result run_impairment_roc(const experiment_request& req) {
    experiment_result result;
    scenario_config impaired = scenario_from_config(req.cfg);
    const int trials = resolve_trials(req);
    const std::vector<int> grid_sizes =
        int_list(req.cfg, "experiment", "grid_sizes", {200, 40});
    const std::vector<double> pf_grid =
        req.cfg.get_double_list("experiment", "pf_grid", {1e-2});
    const std::uint64_t exp_id =
        experiment_id_of(experiment_kind::impairment_roc);

    // The baseline runs the very same searched verifier with ideal receivers;
    // max-over-grid statistics are only comparable under the same verifier.
    scenario_config baseline = impaired;
    baseline.impairments = impairment_ranges{};

    std::vector<roc_row> rows;
    auto ks_out = open_output(req.output_dir, "ks.csv");
    ks_out << "hypothesis,nw,ks_distance,ks_limit,trials\n";
    for (std::size_t gi = 0; gi < grid_sizes.size(); ++gi) {
        impaired.search_grid_size = grid_sizes[gi];
        baseline.search_grid_size = grid_sizes[gi];
        const std::uint64_t sweep = 8 * gi;
        const auto h1 =
            collect_statistics(impaired, hypothesis::genuine, trials,
                               req.master_seed, exp_id, sweep, req.threads);
        const auto h0 =
            collect_statistics(impaired, hypothesis::impersonation, trials,
                               req.master_seed, exp_id, sweep + 1, req.threads);
        const auto base_h1 =
            collect_statistics(baseline, hypothesis::genuine, trials,
                               req.master_seed, exp_id, sweep + 2, req.threads);
        const auto base_h0 =
            collect_statistics(baseline, hypothesis::impersonation, trials,
                               req.master_seed, exp_id, sweep + 3, req.threads);
        for (double pf : pf_grid) {
            const double threshold = empirical_upper_quantile(h0, pf);
            rows.push_back({pf, detection_rate(h1, threshold),
                            10.0 * std::log10(impaired.snr), impaired.beta,
                            grid_sizes[gi]});
        }
        ks_out << "genuine," << grid_sizes[gi] << ','
               << format_double(ks_statistic(h1, base_h1)) << ","
               << format_double(0.05) << ',' << trials << "\n";
        ks_out << "impersonation," << grid_sizes[gi] << ','
               << format_double(ks_statistic(h0, base_h0)) << ","
               << format_double(0.05) << ',' << trials << "\n";
    }
    ks_out.close();
    result.output_files.push_back("ks.csv");
    auto out = open_output(req.output_dir, "roc.csv");
    write_roc_csv(out, rows);
    out.close();
    result.output_files.push_back("roc.csv");
    json sweep_json;
    sweep_json["grid_sizes"] = grid_sizes;
    sweep_json["pf_grid"] = pf_grid;
    write_manifest(req, impaired, trials, sweep_json, result.output_files);
    return result;
}

} // namespace

experiment_kind parse_experiment_kind(const std::string& name) {
    if (name == "correlation") return experiment_kind::correlation;
    if (name == "equivocation") return experiment_kind::equivocation;
    if (name == "zeta-pdf" || name == "zeta_pdf") return experiment_kind::zeta_pdf;
    if (name == "roc") return experiment_kind::roc;
    if (name == "impairment-roc" || name == "impairment_roc")
        return experiment_kind::impairment_roc;
    throw std::invalid_argument("unknown experiment kind: " + name);
}

std::string to_string(experiment_kind kind) {
    switch (kind) {
        case experiment_kind::correlation: return "correlation";
        case experiment_kind::equivocation: return "equivocation";
        case experiment_kind::zeta_pdf: return "zeta-pdf";
        case experiment_kind::roc: return "roc";
        case experiment_kind::impairment_roc: return "impairment-roc";
    }
    throw std::invalid_argument("unknown experiment kind");
}

scenario_config scenario_from_config(const config& cfg) {
    validate_schema(cfg);
    scenario_config sc;
    sc.ofdm.fft_size = static_cast<int>(cfg.get_int("ofdm", "fft_size", 2048));
    sc.ofdm.guard_length =
        static_cast<int>(cfg.get_int("ofdm", "guard_length", 128));
    sc.ofdm.bandwidth_hz = cfg.get_double("ofdm", "bandwidth_hz", 20e6);
    sc.plan = allocate_equispaced(
        sc.ofdm.fft_size, static_cast<int>(cfg.get_int("plan", "delta_l", 32)));
    sc.channel.fft_size = sc.ofdm.fft_size;
    sc.channel.guard_length = static_cast<double>(sc.ofdm.guard_length);
    sc.channel.delay_rms = cfg.get_double("channel", "delay_rms", 10.0);
    sc.channel.path_count =
        static_cast<int>(cfg.get_int("channel", "path_count", 20));
    sc.snr = std::pow(10.0, cfg.get_double("scenario", "snr_db", 10.0) / 10.0);
    sc.beta = cfg.get_double("scenario", "beta", 1.5);
    if (std::isnan(sc.beta) || sc.beta < 0.0)
        throw config_error("[scenario] beta must be >= 0");
    sc.modulation_order =
        static_cast<int>(cfg.get_int("scenario", "modulation_order", 2));
    sc.slots = static_cast<int>(cfg.get_int("scenario", "slots", 1));
    sc.impairments.carrier_offset_max =
        cfg.get_double("impairments", "carrier_offset_max", 0.0);
    sc.impairments.sample_offset_max =
        static_cast<int>(cfg.get_int("impairments", "sample_offset_max", 0));
    sc.impairments.clock_offset =
        cfg.get_double("impairments", "clock_offset", 0.0);
    sc.search_grid_size =
        static_cast<int>(cfg.get_int("impairments", "search_grid_size", 1));
    sc.search_ramp_max =
        cfg.has("impairments", "search_ramp_max")
            ? cfg.get_double("impairments", "search_ramp_max", 0.0)
            : default_search_ramp(sc.plan, sc.ofdm,
                                  sc.impairments.sample_offset_max);
    return sc;
}

std::vector<double> collect_statistics(const scenario_config& scenario,
                                       hypothesis hyp, int trials,
                                       std::uint64_t master_seed,
                                       std::uint64_t experiment_id,
                                       std::uint64_t sweep_index, int threads) {
    if (trials < 1)
        throw std::invalid_argument("collect_statistics: trials must be >= 1");
    if (threads < 1)
        throw std::invalid_argument("collect_statistics: threads must be >= 1");
    std::vector<double> results(static_cast<std::size_t>(trials));
    // Each trial owns a seed derived from its coordinates, so the schedule
    // cannot influence the values, only who computes them.
    std::atomic<int> cursor{0};
    constexpr int chunk = 16;
    auto worker = [&] {
        for (;;) {
            const int begin = cursor.fetch_add(chunk);
            if (begin >= trials) return;
            const int end = std::min(begin + chunk, trials);
            for (int t = begin; t < end; ++t) {
                rng_t rng = make_trial_rng(master_seed, experiment_id,
                                           sweep_index,
                                           static_cast<std::uint64_t>(t));
                results[static_cast<std::size_t>(t)] =
                    run_protocol_trial(scenario, hyp, rng);
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

experiment_result run_experiment(const experiment_request& request) {
    if (request.output_dir.empty())
        throw std::invalid_argument("run_experiment: output_dir required");
    if (request.threads < 1)
        throw std::invalid_argument("run_experiment: threads must be >= 1");
    std::filesystem::create_directories(request.output_dir);
    const auto start = std::chrono::steady_clock::now();
    experiment_result result;
    switch (request.kind) {
        case experiment_kind::correlation: result = run_correlation(request); break;
        case experiment_kind::equivocation: result = run_equivocation(request); break;
        case experiment_kind::zeta_pdf: result = run_zeta_pdf(request); break;
        case experiment_kind::roc: result = run_roc(request); break;
        case experiment_kind::impairment_roc:
            result = run_impairment_roc(request);
            break;
    }
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

} // namespace phychal
