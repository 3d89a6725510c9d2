#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "hsu/cli.hpp"
#include "hsu/hyperdata.hpp"

namespace fs = std::filesystem;
using testutil::TempDir;

namespace {

int run_cli(const std::vector<std::string>& args) {
    return hsu::cli::run(args);
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), dir).string()] =
                testutil::slurp(entry.path().string());
    return files;
}

// sweep.csv minus its wall_seconds column (the one timing-dependent field)
std::string strip_wall_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out += line.substr(0, pos);
        out += '\n';
    }
    return out;
}

std::string write_demo_library(const TempDir& tmp) {
    auto lib = testutil::make_library(24, 4);
    const std::string path = tmp.file("library.csv");
    testutil::write_library_csv(lib, path);
    return path;
}

std::string write_config(const TempDir& tmp, const std::string& body) {
    const std::string path = tmp.file("run.cfg");
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("synth command") {
    TempDir tmp;
    const std::string lib = write_demo_library(tmp);
    const std::string out = tmp.file("out");

    SUBCASE("writes the five artifacts and a seed-bearing manifest") {
        REQUIRE(run_cli({"synth", "--library", lib, "--p", "3", "--out", out, "--seed", "5",
                         "--snr", "22"}) == 0);
        for (const char* name :
             {"clean.img", "clean.img.hdr", "noisy.img", "noisy.img.hdr",
              "signatures_true.csv", "abundances_true.img", "abundances_true.img.hdr",
              "manifest.txt"})
            CHECK(fs::exists(fs::path(out) / name));
        const std::string manifest = testutil::slurp(out + "/manifest.txt");
        CHECK(manifest.find("command = synth") != std::string::npos);
        CHECK(manifest.find("seed = 5") != std::string::npos);
        CHECK(manifest.find("result.pure_pixels") != std::string::npos);

        SUBCASE("rerun into a fresh directory is bit-identical") {
            auto first = snapshot_dir(out);
            fs::remove_all(out);
            REQUIRE(run_cli({"synth", "--library", lib, "--p", "3", "--out", out, "--seed",
                             "5", "--snr", "22"}) == 0);
            CHECK(snapshot_dir(out) == first);
        }

        SUBCASE("outputs are consistent: truth abundances pass validation") {
            auto cube = hsu::read_cube(out + "/abundances_true.img.hdr");
            CHECK(cube.bands() == 3);
            CHECK(cube.pixels() == 64 * 64);
        }
    }

    SUBCASE("missing library errors with the path") {
        CHECK(run_cli({"synth", "--p", "3", "--out", out}) != 0);
        CHECK(run_cli({"synth", "--library", tmp.file("nope.csv"), "--p", "3", "--out", out}) !=
              0);
    }
}

TEST_CASE("unmix command") {
    TempDir tmp;
    const std::string lib = write_demo_library(tmp);
    const std::string synth_out = tmp.file("scene");
    REQUIRE(run_cli({"synth", "--library", lib, "--p", "3", "--out", synth_out, "--seed", "9",
                     "--config",
                     write_config(tmp, "[scene]\nrows = 12\ncols = 12\nwindow = 3\n")}) == 0);

    SUBCASE("produces estimates that satisfy the abundance constraints") {
        const std::string out = tmp.file("est");
        REQUIRE(run_cli({"unmix", "--cube", synth_out + "/noisy.img.hdr", "--p", "3",
                         "--method", "sparse_distributed", "--max-iter", "25", "--out", out,
                         "--seed", "3"}) == 0);
        for (const char* name : {"signatures_est.csv", "abundances_est.img",
                                 "abundances_est.img.hdr", "objective_trace.csv", "summary.txt",
                                 "manifest.txt"})
            CHECK(fs::exists(fs::path(out) / name));

        auto est = hsu::read_cube(out + "/abundances_est.img.hdr");
        // float32 round trip: columns sum to 1 within float precision
        for (std::size_t k = 0; k < est.pixels(); ++k) {
            double sum = 0.0;
            for (std::size_t n = 0; n < est.bands(); ++n) {
                CHECK(est.data(n, k) >= 0.0);
                sum += est.data(n, k);
            }
            CHECK(std::fabs(sum - 1.0) <= 1e-5);
        }

        const std::string summary = testutil::slurp(out + "/summary.txt");
        CHECK(summary.find("method: sparse_distributed") != std::string::npos);
        CHECK(summary.find("lambda: ") != std::string::npos);
        CHECK(summary.find("iterations: 25") != std::string::npos);

        const std::string trace = testutil::slurp(out + "/objective_trace.csv");
        CHECK(trace.rfind("iteration,objective\n", 0) == 0);
    }

    SUBCASE("lambda flag set to zero is reported as zero") {
        const std::string out = tmp.file("est0");
        REQUIRE(run_cli({"unmix", "--cube", synth_out + "/noisy.img.hdr", "--p", "3",
                         "--method", "sparse_distributed", "--max-iter", "5", "--lambda", "0",
                         "--out", out}) == 0);
        const std::string summary = testutil::slurp(out + "/summary.txt");
        CHECK(summary.find("lambda: 0\n") != std::string::npos);
    }

    SUBCASE("unknown method lists the valid ones") {
        CHECK(run_cli({"unmix", "--cube", synth_out + "/noisy.img.hdr", "--p", "3", "--method",
                       "vca", "--out", tmp.file("x")}) != 0);
    }

    SUBCASE("missing inputs error") {
        CHECK(run_cli({"unmix", "--p", "3", "--out", tmp.file("x")}) != 0);
        CHECK(run_cli({"unmix", "--cube", synth_out + "/noisy.img.hdr", "--out",
                       tmp.file("x")}) != 0);
    }
}

TEST_CASE("sweep command") {
    TempDir tmp;
    const std::string lib = write_demo_library(tmp);
    const std::string cfg = write_config(tmp,
                                         "[scene]\nrows = 8\ncols = 8\nwindow = 3\n"
                                         "[algo]\nmax_iter = 10\n"
                                         "[sweep]\nsnrs = 20,30\n"
                                         "methods = nmf,distributed\nruns = 2\n");

    SUBCASE("row and aggregate shapes") {
        const std::string out = tmp.file("sw");
        REQUIRE(run_cli({"sweep", "--config", cfg, "--library", lib, "--p", "3", "--out", out,
                         "--seed", "4"}) == 0);
        const std::string raw = testutil::slurp(out + "/sweep.csv");
        const std::string agg = testutil::slurp(out + "/sweep_aggregate.csv");
        CHECK(raw.rfind("snr_db,method,seed,sad_mean,aad_mean,iterations,wall_seconds\n", 0) ==
              0);
        CHECK(std::count(raw.begin(), raw.end(), '\n') == 1 + 2 * 2 * 2);
        CHECK(agg.rfind("snr_db,method,runs,sad_mean,aad_mean,iterations_mean\n", 0) == 0);
        CHECK(std::count(agg.begin(), agg.end(), '\n') == 1 + 2 * 2);
    }

    SUBCASE("runs = 1 aggregate equals the raw rows") {
        const std::string out = tmp.file("sw1");
        REQUIRE(run_cli({"sweep", "--config", cfg, "--library", lib, "--p", "3", "--out", out,
                         "--seed", "4", "--runs", "1"}) == 0);
        std::istringstream raw(testutil::slurp(out + "/sweep.csv"));
        std::istringstream agg(testutil::slurp(out + "/sweep_aggregate.csv"));
        std::string rline, aline;
        std::getline(raw, rline);
        std::getline(agg, aline);
        while (std::getline(raw, rline) && std::getline(agg, aline)) {
            // snr, method and the two metric fields agree between the files
            std::vector<std::string> rf, af;
            std::stringstream rs(rline), as(aline);
            std::string tok;
            while (std::getline(rs, tok, ',')) rf.push_back(tok);
            while (std::getline(as, tok, ',')) af.push_back(tok);
            CHECK(rf[0] == af[0]);
            CHECK(rf[1] == af[1]);
            CHECK(rf[3] == af[3]);
            CHECK(rf[4] == af[4]);
        }
    }

    SUBCASE("reruns are bit-identical apart from wall time, including parallel") {
        const std::string out = tmp.file("swd");
        REQUIRE(run_cli({"sweep", "--config", cfg, "--library", lib, "--p", "3", "--out", out,
                         "--seed", "4", "--threads", "2"}) == 0);
        auto first = snapshot_dir(out);
        fs::remove_all(out);
        REQUIRE(run_cli({"sweep", "--config", cfg, "--library", lib, "--p", "3", "--out", out,
                         "--seed", "4", "--threads", "2"}) == 0);
        auto second = snapshot_dir(out);
        REQUIRE(first.size() == second.size());
        for (const auto& [name, content] : first) {
            if (name == "sweep.csv")
                CHECK(strip_wall_column(content) == strip_wall_column(second[name]));
            else
                CHECK(content == second[name]);
        }
    }

    SUBCASE("empty methods list is a usage error") {
        const std::string bad = write_config(tmp, "[sweep]\nmethods =\n");
        CHECK(run_cli({"sweep", "--config", bad, "--library", lib, "--p", "3", "--out",
                       tmp.file("x")}) != 0);
    }
}

TEST_CASE("eval command") {
    TempDir tmp;
    const std::string lib = write_demo_library(tmp);
    const std::string scene = tmp.file("scene");
    REQUIRE(run_cli({"synth", "--library", lib, "--p", "3", "--out", scene, "--seed", "2",
                     "--config",
                     write_config(tmp, "[scene]\nrows = 8\ncols = 8\nwindow = 3\n")}) == 0);

    auto eval_args = [&](const std::string& est_sig, const std::string& est_ab,
                         const std::string& out) {
        return std::vector<std::string>{
            "eval",
            "--out", out,
            "--config",
            write_config(tmp, "[eval]\ntruth_signatures = " + scene +
                                  "/signatures_true.csv\ntruth_abundances = " + scene +
                                  "/abundances_true.img.hdr\nest_signatures = " + est_sig +
                                  "\nest_abundances = " + est_ab + "\n")};
    };

    SUBCASE("truth against itself is an all-zero report") {
        const std::string out = tmp.file("ev");
        REQUIRE(run_cli(eval_args(scene + "/signatures_true.csv",
                                  scene + "/abundances_true.img.hdr", out)) == 0);
        const std::string report = testutil::slurp(out + "/eval_report.txt");
        CHECK(report.find("sad_mean: 0\n") != std::string::npos);
        CHECK(report.find("aad_mean: 0\n") != std::string::npos);
        CHECK(report.find("matching: 0->0 1->1 2->2") != std::string::npos);
    }

    SUBCASE("permuted truth scores zero with the permutation reported") {
        // rewrite the truth CSV with materials swapped
        auto truth = hsu::load_spectral_library(scene + "/signatures_true.csv");
        hsu::Matrix cols(truth.bands(), 3);
        std::vector<std::string> names = {truth.materials[1].name, truth.materials[2].name,
                                          truth.materials[0].name};
        for (std::size_t i = 0; i < truth.bands(); ++i) {
            cols(i, 0) = truth.materials[1].reflectance[i];
            cols(i, 1) = truth.materials[2].reflectance[i];
            cols(i, 2) = truth.materials[0].reflectance[i];
        }
        hsu::save_spectral_csv(tmp.file("perm_sig.csv"), truth.wavelengths, names, cols);

        auto ab = hsu::read_cube(scene + "/abundances_true.img.hdr");
        hsu::Cube perm_ab = ab;
        for (std::size_t k = 0; k < ab.pixels(); ++k) {
            perm_ab.data(0, k) = ab.data(1, k);
            perm_ab.data(1, k) = ab.data(2, k);
            perm_ab.data(2, k) = ab.data(0, k);
        }
        hsu::write_cube(perm_ab, tmp.file("perm_ab.img.hdr"));

        const std::string out = tmp.file("evp");
        REQUIRE(run_cli(eval_args(tmp.file("perm_sig.csv"), tmp.file("perm_ab.img.hdr"),
                                  out)) == 0);
        const std::string report = testutil::slurp(out + "/eval_report.txt");
        CHECK(report.find("sad_mean: 0\n") != std::string::npos);
        CHECK(report.find("aad_mean: 0\n") != std::string::npos);
        CHECK(report.find("matching: 0->1 1->2 2->0") != std::string::npos);
    }

    SUBCASE("mismatched endmember count errors") {
        auto truth = hsu::load_spectral_library(scene + "/signatures_true.csv");
        hsu::Matrix two(truth.bands(), 2);
        for (std::size_t i = 0; i < truth.bands(); ++i) {
            two(i, 0) = truth.materials[0].reflectance[i];
            two(i, 1) = truth.materials[1].reflectance[i];
        }
        hsu::save_spectral_csv(tmp.file("two.csv"), truth.wavelengths, {"a", "b"}, two);
        CHECK(run_cli(eval_args(tmp.file("two.csv"), scene + "/abundances_true.img.hdr",
                                tmp.file("x"))) != 0);
    }

    SUBCASE("missing paths error") {
        CHECK(run_cli({"eval", "--out", tmp.file("x")}) != 0);
    }
}

TEST_CASE("config file handling") {
    TempDir tmp;

    SUBCASE("flags override config keys") {
        hsu::cli::RunConfig cfg;
        hsu::cli::load_config_file(
            cfg, write_config(tmp, "seed = 10\n[algo]\nmu = 0.5\nmax_iter = 7\n"));
        CHECK(cfg.master_seed == 10);
        CHECK(cfg.mu == 0.5);
        CHECK(cfg.max_iter == 7);
        hsu::cli::apply_key(cfg, "algo.mu", "0.25");
        CHECK(cfg.mu == 0.25);
    }

    SUBCASE("comments and blank lines are ignored") {
        hsu::cli::RunConfig cfg;
        hsu::cli::load_config_file(
            cfg, write_config(tmp, "# comment\n; also comment\n\nseed = 3\n"));
        CHECK(cfg.master_seed == 3);
    }

    SUBCASE("unknown keys are rejected") {
        hsu::cli::RunConfig cfg;
        CHECK_THROWS_WITH_AS(hsu::cli::apply_key(cfg, "scene.rws", "4"),
                             doctest::Contains("unknown config key"), std::runtime_error);
        CHECK_THROWS(hsu::cli::load_config_file(
            cfg, write_config(tmp, "[scene]\nrows equals 4\n")));
    }

    SUBCASE("flag values are validated") {
        hsu::cli::RunConfig cfg;
        CHECK_THROWS(hsu::cli::apply_key(cfg, "seed", "-3"));
        CHECK_THROWS(hsu::cli::apply_key(cfg, "algo.mu", "fast"));
    }

    SUBCASE("no subcommand is an error") {
        CHECK(run_cli({}) != 0);
    }

    SUBCASE("flag overrides are visible in the manifest") {
        const std::string lib = write_demo_library(tmp);
        const std::string out = tmp.file("ov");
        REQUIRE(run_cli({"synth", "--library", lib, "--p", "3", "--out", out, "--seed", "1",
                         "--config", write_config(tmp, "[scene]\nrows = 8\ncols = 8\n"),
                         "--connectivity", "8", "--mu", "0.02", "--eta", "0.3", "--max-iter",
                         "11"}) == 0);
        const std::string manifest = testutil::slurp(out + "/manifest.txt");
        CHECK(manifest.find("algo.connectivity = 8") != std::string::npos);
        CHECK(manifest.find("algo.mu = 0.02") != std::string::npos);
        CHECK(manifest.find("algo.eta = 0.29999999999999999") != std::string::npos);
        CHECK(manifest.find("algo.max_iter = 11") != std::string::npos);
    }
}
