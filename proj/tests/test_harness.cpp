// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rowcol/analysis.hpp"
#include "rowcol/io.hpp"

using namespace rowcol;
namespace fs = std::filesystem;

namespace {

FluxImage test_image_8x8() {
    Matrix<double> m(8, 8, 0.05);
    for (uint32_t i = 2; i < 6; ++i) {
        for (uint32_t j = 2; j < 6; ++j) m(i, j) = 1.0;
    }
    m(0, 7) = 0.7;
    m(7, 0) = 0.7;
    return FluxImage(m);
}

std::vector<EstimatorSpec> specs(std::initializer_list<const char*> names) {
    std::vector<EstimatorSpec> out;
    for (const char* n : names) out.push_back(parse_estimator(n));
    return out;
}

}  // namespace

TEST_CASE("argmin refinement on an exact parabola") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 + (v - 3.4) * (v - 3.4));
    CHECK(refine_argmin(x, y) == doctest::Approx(3.4).epsilon(1e-12));

    // Edge minimum stays on the grid.
    const std::vector<double> rising{1.0, 2.0, 4.0, 8.0, 16.0};
    CHECK(refine_argmin(x, rising) == 1.0);
}

TEST_CASE("reconstruction runs every estimator and is reproducible") {
    ExperimentConfig config;
    config.frames = 3000;
    config.trials = 3;
    config.ppf = 1.5;
    config.seed = 11;
    config.estimators =
        specs({"naive", "spe", "random", "unambiguous", "oracle", "me2", "me4"});

    const FluxImage truth = test_image_8x8();
    const auto a = run_reconstruction(truth, config);
    const auto b = run_reconstruction(truth, config);
    REQUIRE(a.size() == 7);
    for (size_t e = 0; e < a.size(); ++e) {
        CHECK(a[e].mean_mse == b[e].mean_mse);
        CHECK(a[e].mean_psnr == b[e].mean_psnr);
        CHECK(a[e].mean_image == b[e].mean_image);
        CHECK(a[e].mean_mse >= 0.0);
        CHECK(std::isfinite(a[e].mean_psnr));
    }

    // The oracle sees the truth and should beat the readout estimators here.
    const double oracle_mse = a[4].mean_mse;
    for (size_t e = 0; e < a.size(); ++e) {
        CHECK(oracle_mse <= a[e].mean_mse + 1e-12);
    }
}

TEST_CASE("dark flux reconstruction reports the undefined-psnr sentinel") {
    ExperimentConfig config;
    config.frames = 100;
    config.trials = 2;
    config.estimators = specs({"naive", "spe", "me4"});
    const FluxImage dark(Matrix<double>(4, 4, 0.0));
    const auto results = run_reconstruction(dark, config);
    for (const auto& r : results) {
        CHECK(r.mean_mse == 0.0);
        CHECK(std::isinf(r.mean_psnr));
        for (double v : r.mean_image.values()) CHECK(v == 0.0);
    }
}

TEST_CASE("ppf sweep writes a parseable report and respects the grid") {
    ExperimentConfig config;
    config.frames = 1500;
    config.trials = 2;
    config.seed = 5;
    config.ppf_grid = {0.5, 1.0, 1.5, 2.0};
    config.estimators = specs({"spe", "me4"});
    config.out_dir = (fs::temp_directory_path() / "rowcol_sweep_test").string();

    const SweepResult result = sweep_ppf(test_image_8x8(), config);
    CHECK(result.axis.size() == 4);
    REQUIRE(result.curves.size() == 2);
    for (const auto& curve : result.curves) {
        CHECK(curve.mse.size() == 4);
        for (double v : curve.stderr_mse) CHECK(v >= 0.0);
        CHECK(curve.argmin_axis >= 0.5);
        CHECK(curve.argmin_axis <= 2.0);
    }

    std::ifstream report(fs::path(config.out_dir) / "sweep_ppf.tsv");
    REQUIRE(report.good());
    std::string line;
    std::getline(report, line);
    CHECK(line.rfind("# seed = 5", 0) == 0);
    fs::remove_all(config.out_dir);

    ExperimentConfig bad = config;
    bad.out_dir.clear();
    bad.ppf_grid = {1.0, 1.0};
    CHECK_THROWS(sweep_ppf(test_image_8x8(), bad));
}

TEST_CASE("frames-to-target driver finds thresholds in grid order") {
    ExperimentConfig config;
    config.trials = 3;
    config.ppf = 1.2;
    config.seed = 17;
    config.frame_grid = {250, 500, 1000, 2000, 4000};
    config.estimators = specs({"spe", "me4", "oracle"});
    config.target_mse = 0.02;

    const FramesToTargetResult result = frames_to_target_mse(test_image_8x8(), config);
    REQUIRE(result.sweep.curves.size() == 3);
    for (const auto& curve : result.sweep.curves) {
        CHECK(curve.mse.size() == 5);
        // More frames should not make things worse on average, up to noise;
        // require the last point to be no worse than the first.
        CHECK(curve.mse.back() <= curve.mse.front() + 1e-9);
    }
    // The oracle reaches any reachable target no later than the others.
    const auto& needed = result.frames_needed;
    if (needed[0] && needed[2]) CHECK(*needed[2] <= *needed[0]);
    if (needed[1] && needed[2]) CHECK(*needed[2] <= *needed[1]);
}

TEST_CASE("array-size sweep scales per-pixel flux with the budget") {
    ExperimentConfig config;
    config.frames = 1200;
    config.trials = 2;
    config.seed = 23;
    config.size_grid = {4, 8};
    config.ppf_grid = {0.8, 1.6, 2.4};
    config.flux_budget = 4.0;
    config.estimators = specs({"spe", "me4"});

    const SizeSweepResult result = sweep_array_size(test_image_8x8(), config);
    CHECK(result.sizes == std::vector<uint32_t>{4, 8});
    REQUIRE(result.best_mse.size() == 2);
    for (size_t e = 0; e < 2; ++e) {
        for (double v : result.best_mse[e]) CHECK(v >= 0.0);
        for (double v : result.best_ppf[e]) {
            CHECK(v >= 0.8);
            CHECK(v <= 2.4);
        }
    }
}

TEST_CASE("crb comparison aligns the bound with estimator error") {
    ExperimentConfig config;
    config.frames = 400;
    config.trials = 60;
    config.seed = 29;
    config.ppf_grid = {0.4, 0.8, 1.2};
    config.estimators = specs({"spe", "me4"});

    const SweepResult result = crb_comparison(resolve_image("uniform2x2"), config);
    REQUIRE(result.bound.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(result.bound[i] > 0.0);
        for (const auto& curve : result.curves) {
            // Estimator MSE cannot sit far below the bound.
            CHECK(curve.mse[i] > 0.25 * result.bound[i]);
        }
    }
    CHECK_THROWS(crb_comparison(test_image_8x8(), config));
}

TEST_CASE("standard errors shrink like one over sqrt trials") {
    ExperimentConfig small, large;
    small.frames = large.frames = 300;
    small.ppf = large.ppf = 1.0;
    small.seed = large.seed = 31;
    small.estimators = large.estimators = specs({"spe"});
    small.trials = 64;
    large.trials = 256;

    const FluxImage truth = resolve_image("uniform2x2");
    const auto rs = run_reconstruction(truth, small);
    const auto rl = run_reconstruction(truth, large);
    const double ratio = rs[0].stderr_mse / rl[0].stderr_mse;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.25));
}
