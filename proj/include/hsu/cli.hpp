#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsu::cli {

// Resolved settings for one command: defaults, then config-file keys, then
// command-line flags, each layer overriding the previous one.
struct RunConfig {
    // global
    std::uint64_t master_seed = 0;
    int threads = 0;
    std::string out_dir = "out";
    std::string library_path;
    std::string cube_path;
    std::string method = "sparse_distributed";
    std::size_t p = 0;  // endmember count; synth/sweep may take it from endmembers instead

    // [scene]
    std::size_t rows = 64, cols = 64, window = 3;
    std::optional<std::uint64_t> scene_seed;
    std::vector<std::string> endmembers;

    // [noise]
    double snr_db = 25.0;
    std::optional<std::uint64_t> noise_seed;

    // [algo]
    double mu = 0.01;
    double eta = 0.1;
    std::string lambda = "auto";  // "auto" or a nonnegative number
    std::size_t max_iter = 400;
    double rel_tol = 1e-6;
    double eps_floor = 1e-4;
    int connectivity = 4;
    std::string lambda_denom = "sqrtN_minus_1";  // or "sqrt_of_N_minus_1"
    std::optional<std::uint64_t> algo_seed;

    // [sweep]
    std::vector<double> snrs = {15.0, 20.0, 25.0, 30.0, 35.0};
    std::vector<std::string> methods = {"nmf", "l12_nmf", "distributed", "sparse_distributed"};
    std::size_t runs = 20;

    // [eval]
    std::string truth_signatures, truth_abundances, est_signatures, est_abundances;
    std::string mean = "arithmetic";  // or "rms"
};

// Applies one `section.key = value` pair; throws on unknown keys or bad values.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat `key = value` file with `[section]` headers; '#' and ';' comments.
void load_config_file(RunConfig& cfg, const std::string& path);

int cmd_synth(const RunConfig& cfg);
int cmd_unmix(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);

// Entry point used by the binary and by tests. args excludes argv[0].
int run(const std::vector<std::string>& args);

}  // namespace hsu::cli
