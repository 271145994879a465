#include <phychal/experiment.hpp>
#include <phychal/version.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"phychal: phase challenge-response authentication experiments"};
    app.set_version_flag("--version", phychal::version_string);

    std::string kind_name;
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    int trials = 0;
    int threads = 1;

    app.add_option("kind", kind_name,
                   "experiment kind: correlation | equivocation | zeta-pdf | "
                   "roc | impairment-roc")
        ->required();
    app.add_option("--config", config_path, "configuration file (key=value)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (64-bit)")->required();
    app.add_option("--out", output_dir, "output directory")->required();
    app.add_option("--trials", trials, "override trial count")
        ->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads (0 = hardware)")
        ->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        phychal::experiment_request request;
        request.kind = phychal::parse_experiment_kind(kind_name);
        request.cfg = phychal::config::parse_file(config_path);
        phychal::validate_schema(request.cfg);
        request.master_seed = seed;
        request.output_dir = output_dir;
        request.trials_override = trials;
        request.threads =
            threads > 0
                ? threads
                : std::max(1u, std::thread::hardware_concurrency());
        const auto result = phychal::run_experiment(request);
        for (const auto& file : result.output_files)
            std::printf("%s/%s\n", output_dir.c_str(), file.c_str());
        std::fprintf(stderr, "done in %.2f s\n", result.elapsed_seconds);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
