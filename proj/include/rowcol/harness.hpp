// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rowcol/estimators.hpp"
#include "rowcol/model.hpp"
#include "rowcol/types.hpp"

namespace rowcol {

struct ExperimentConfig {
    std::string image;  // file path or built-in id; resolved by the caller
    uint64_t frames = 100000;
    uint32_t trials = 20;
    std::vector<EstimatorSpec> estimators;
    double ppf = 3.0;                  // single-point drivers
    std::vector<double> ppf_grid;      // sweep drivers
    std::vector<uint64_t> frame_grid;  // frames-to-target driver
    std::vector<uint32_t> size_grid;   // array-size driver
    double target_mse = 0.01;
    uint64_t seed = 1;
    std::string out_dir;
    double clamp_max = kDefaultFluxClamp;
    /// Total sensor flux for the size sweep (photons per frame before
    /// attenuation); photons per pixel scale inversely with pixel count.
    double flux_budget = 6.0;
    bool stamp = false;  // add a timestamp to report metadata (breaks
                         // byte-identical reruns; off by default)

    std::string canonical() const;
};

/// Per-estimator outcome of a fixed-attenuation reconstruction experiment.
struct ReconstructionResult {
    EstimatorSpec spec;
    double mean_mse = 0.0;  // display flux units, averaged over trials
    double stderr_mse = 0.0;
    double mean_psnr = 0.0;  // dB, averaged over trials
    double stderr_psnr = 0.0;
    uint64_t frames_discarded = 0;  // summed over trials
    Matrix<double> mean_image;      // display flux units
};

struct EstimatorCurve {
    EstimatorSpec spec;
    std::vector<double> mse;
    std::vector<double> stderr_mse;
    double argmin_axis = 0.0;   // parabola-refined location of the minimum
    double argmin_value = 0.0;  // smallest grid value
};

struct SweepResult {
    std::string axis_label;
    std::vector<double> axis;
    uint32_t trials = 0;
    std::vector<EstimatorCurve> curves;
    /// Cramer-Rao bound per axis point (CRB driver only).
    std::vector<double> bound;
};

struct FramesToTargetResult {
    SweepResult sweep;  // axis = frame counts, metric = display-flux MSE
    double target_mse = 0.0;
    /// Smallest grid frame count reaching the target, per estimator
    /// (nullopt = not reached).
    std::vector<std::optional<uint64_t>> frames_needed;
};

struct SizeSweepResult {
    std::vector<uint32_t> sizes;
    uint32_t trials = 0;
    std::vector<EstimatorSpec> estimators;
    /// [estimator][size]: MSE at the per-size optimal attenuation, and the
    /// PPF where it was attained.
    std::vector<std::vector<double>> best_mse;
    std::vector<std::vector<double>> best_ppf;
};

/// Calibrate attenuation to config.ppf, run trials batches of config.frames,
/// reconstruct with every requested estimator, and average PSNR over trials.
/// Writes images and a report into config.out_dir when set.
std::vector<ReconstructionResult> run_reconstruction(const FluxImage& truth,
                                                     const ExperimentConfig& config);

/// MSE-versus-PPF curves with per-estimator optimum locations.
SweepResult sweep_ppf(const FluxImage& truth, const ExperimentConfig& config);

/// Smallest frame count per estimator reaching config.target_mse at the
/// configured PPF.
FramesToTargetResult frames_to_target_mse(const FluxImage& truth,
                                          const ExperimentConfig& config);

/// Fixed-total-flux array-size sweep with per-size attenuation optimization.
SizeSweepResult sweep_array_size(const FluxImage& truth, const ExperimentConfig& config);

/// 2x2 ground truth: Cramer-Rao bound and probability-domain estimator MSE
/// across the PPF grid.
SweepResult crb_comparison(const FluxImage& truth, const ExperimentConfig& config);

/// Quadratic refinement of the minimum location over the bracket around the
/// smallest sample; falls back to the grid point at the edges.
double refine_argmin(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rowcol
