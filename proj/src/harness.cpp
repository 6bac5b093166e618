// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rowcol/analysis.hpp"
#include "rowcol/io.hpp"
#include "rowcol/kernels.hpp"
#include "rowcol/parallel.hpp"
#include "rowcol/rng.hpp"
#include "rowcol/tally.hpp"

namespace rowcol {

namespace {

double max_value(const FluxImage& img) {
    return *std::max_element(img.values().values().begin(), img.values().values().end());
}

double psnr_from_mse(double mse, double peak) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    if (!(peak > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return 10.0 * std::log10(peak * peak / mse);
}

void require_increasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw std::invalid_argument(std::string(what) + ": empty grid");
    for (size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument(std::string(what) + ": grid must be strictly increasing");
        }
    }
}

bool uses_tallies(EstimatorKind k) {
    return k == EstimatorKind::Naive || k == EstimatorKind::SinglePhoton ||
           k == EstimatorKind::Unambiguous || k == EstimatorKind::Multiphoton;
}

ProbEstimate estimate_from(const EstimatorSpec& spec, const FrameBatch& batch,
                           const FrameTallies& tallies, RandomSeed est_seed) {
    switch (spec.kind) {
        case EstimatorKind::Naive: return estimate_naive(tallies);
        case EstimatorKind::SinglePhoton: return estimate_single_photon(tallies);
        case EstimatorKind::Unambiguous: return estimate_unambiguous(tallies);
        case EstimatorKind::Multiphoton: return estimate_multiphoton(tallies, spec.k_max);
        case EstimatorKind::Randomized: return estimate_randomized(batch, est_seed);
        case EstimatorKind::FullReadout: return estimate_full_readout(batch);
    }
    throw std::logic_error("estimate_from: unreachable");
}

struct PointOutcome {
    std::vector<double> mean_mse, stderr_mse, mean_psnr, stderr_psnr;
    std::vector<uint64_t> discarded;
    std::vector<Matrix<double>> mean_image;  // filled when want_images
};

// Shared per-(attenuation, frames) experiment: trials simulations reused by
// every estimator, display-domain metrics per trial.
PointOutcome run_point(const FluxImage& truth, double scale, uint64_t frames,
                       uint32_t trials, const std::vector<EstimatorSpec>& estimators,
                       uint64_t point_seed, double clamp_max, bool want_images) {
    if (estimators.empty()) throw std::invalid_argument("run_point: no estimators");
    if (trials == 0) throw std::invalid_argument("run_point: trials must be >= 1");

    const uint32_t rows = truth.rows();
    const uint32_t cols = truth.cols();
    const size_t npx = truth.values().size();
    const double peak = max_value(truth);
    const double inv_scale = scale > 0 ? 1.0 / scale : 0.0;

    Matrix<double> scaled(rows, cols);
    for (size_t p = 0; p < npx; ++p) {
        scaled.values()[p] = truth.values().values()[p] * scale;
    }
    const DetectionProbMap q_sim = detection_prob_from_flux(FluxImage(std::move(scaled)));

    const bool need_truth =
        std::any_of(estimators.begin(), estimators.end(),
                    [](const EstimatorSpec& e) { return e.kind == EstimatorKind::FullReadout; });
    const bool need_tallies =
        std::any_of(estimators.begin(), estimators.end(),
                    [](const EstimatorSpec& e) { return uses_tallies(e.kind); });

    const size_t ne = estimators.size();
    std::vector<std::vector<double>> trial_mse(ne, std::vector<double>(trials, 0.0));
    std::vector<std::vector<double>> trial_psnr(ne, std::vector<double>(trials, 0.0));
    std::vector<std::vector<uint64_t>> trial_disc(ne, std::vector<uint64_t>(trials, 0));
    std::vector<std::vector<Matrix<double>>> trial_img;
    if (want_images) {
        trial_img.assign(ne, std::vector<Matrix<double>>(trials));
    }

    parallel_for(trials, [&](uint64_t begin, uint64_t end) {
        for (uint64_t trial = begin; trial < end; ++trial) {
            const uint64_t trial_seed =
                rng::derive_seed(point_seed, rng::kDeriveTrial, trial);
            const FrameBatch batch =
                simulate_batch_q(q_sim, frames, trial_seed, need_truth);
            FrameTallies tallies;
            if (need_tallies) tallies = tally_frames(batch);

            for (size_t e = 0; e < ne; ++e) {
                const ProbEstimate est = estimate_from(
                    estimators[e], batch, tallies,
                    rng::derive_seed(trial_seed, rng::kDeriveEstimator, e));
                const FluxImage lambda_sim = flux_from_detection_prob(est.q_hat, clamp_max);

                Matrix<double> display(rows, cols);
                for (size_t p = 0; p < npx; ++p) {
                    display.values()[p] = lambda_sim.values().values()[p] * inv_scale;
                }
                const double mse =
                    kernels::sum_sq_diff(display.values(), truth.values().values()) /
                    static_cast<double>(npx);
                trial_mse[e][trial] = mse;
                trial_psnr[e][trial] = psnr_from_mse(mse, peak);
                trial_disc[e][trial] = est.frames_discarded;
                if (want_images) trial_img[e][trial] = std::move(display);
            }
        }
    });

    PointOutcome out;
    out.mean_mse.resize(ne);
    out.stderr_mse.resize(ne);
    out.mean_psnr.resize(ne);
    out.stderr_psnr.resize(ne);
    out.discarded.resize(ne);
    if (want_images) out.mean_image.resize(ne);

    const double inv_trials = 1.0 / static_cast<double>(trials);
    for (size_t e = 0; e < ne; ++e) {
        double sum = 0, sum2 = 0, psum = 0, psum2 = 0;
        uint64_t disc = 0;
        for (uint32_t t = 0; t < trials; ++t) {
            sum += trial_mse[e][t];
            sum2 += trial_mse[e][t] * trial_mse[e][t];
            psum += trial_psnr[e][t];
            psum2 += trial_psnr[e][t] * trial_psnr[e][t];
            disc += trial_disc[e][t];
        }
        out.mean_mse[e] = sum * inv_trials;
        out.mean_psnr[e] = psum * inv_trials;
        out.discarded[e] = disc;
        if (trials > 1) {
            const double var_m =
                std::max(0.0, (sum2 - sum * sum * inv_trials) / (trials - 1));
            const double var_p =
                std::max(0.0, (psum2 - psum * psum * inv_trials) / (trials - 1));
            out.stderr_mse[e] = std::sqrt(var_m * inv_trials);
            out.stderr_psnr[e] = std::isfinite(var_p)
                                     ? std::sqrt(var_p * inv_trials)
                                     : 0.0;
        }
        if (want_images) {
            Matrix<double> mean(rows, cols, 0.0);
            for (uint32_t t = 0; t < trials; ++t) {
                for (size_t p = 0; p < npx; ++p) {
                    mean.values()[p] += trial_img[e][t].values()[p];
                }
            }
            for (size_t p = 0; p < npx; ++p) mean.values()[p] *= inv_trials;
            out.mean_image[e] = std::move(mean);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> base_metadata(
    const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> md;
    md.emplace_back("seed", std::to_string(config.seed));
    md.emplace_back("config_hash", std::to_string(config_hash(config.canonical())));
    if (config.stamp) {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        md.emplace_back(
            "timestamp",
            std::to_string(
                std::chrono::duration_cast<std::chrono::seconds>(now).count()));
    }
    return md;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
    std::ostringstream ss;
    ss << "image=" << image << ";frames=" << frames << ";trials=" << trials
       << ";estimators=";
    for (const auto& e : estimators) ss << estimator_name(e) << ',';
    ss << ";ppf=" << ppf << ";ppf_grid=";
    for (double v : ppf_grid) ss << v << ',';
    ss << ";frame_grid=";
    for (uint64_t v : frame_grid) ss << v << ',';
    ss << ";size_grid=";
    for (uint32_t v : size_grid) ss << v << ',';
    ss << ";target_mse=" << target_mse << ";seed=" << seed << ";clamp=" << clamp_max
       << ";budget=" << flux_budget;
    return std::move(ss).str();
}

double refine_argmin(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t m = static_cast<size_t>(
        std::min_element(y.begin(), y.end()) - y.begin());
    if (m == 0 || m + 1 >= y.size()) return x[m];
    const double dx0 = x[m] - x[m - 1];
    const double dx1 = x[m] - x[m + 1];
    const double dy0 = y[m] - y[m - 1];
    const double dy1 = y[m] - y[m + 1];
    const double denom = dx0 * dy1 - dx1 * dy0;
    if (denom == 0.0) return x[m];
    const double vertex = x[m] - 0.5 * (dx0 * dx0 * dy1 - dx1 * dx1 * dy0) / denom;
    // A noisy bracket can throw the vertex outside it; stay on the grid then.
    if (vertex < x[m - 1] || vertex > x[m + 1]) return x[m];
    return vertex;
}

std::vector<ReconstructionResult> run_reconstruction(const FluxImage& truth,
                                                     const ExperimentConfig& config) {
    const bool dark = max_value(truth) == 0.0;
    const double alpha = dark ? 1.0 : calibrate_attenuation(truth, config.ppf);
    const PointOutcome out = run_point(
        truth, alpha, config.frames, config.trials, config.estimators,
        rng::derive_seed(config.seed, rng::kDeriveSweepPoint, 0), config.clamp_max, true);

    std::vector<ReconstructionResult> results;
    results.reserve(config.estimators.size());
    for (size_t e = 0; e < config.estimators.size(); ++e) {
        results.push_back(ReconstructionResult{config.estimators[e], out.mean_mse[e],
                                               out.stderr_mse[e], out.mean_psnr[e],
                                               out.stderr_psnr[e], out.discarded[e],
                                               out.mean_image[e]});
    }

    if (!config.out_dir.empty()) {
        const std::filesystem::path dir(config.out_dir);
        save_flux_image(truth, dir / "truth.pgm", ImageFormat::Pgm);
        save_flux_image(truth, dir / "truth.csv", ImageFormat::Csv);
        ReportTable table;
        table.metadata = base_metadata(config);
        table.metadata.emplace_back("attenuation", std::to_string(alpha));
        table.columns = {"estimator", "mean_mse", "stderr_mse",
                         "mean_psnr", "stderr_psnr", "frames_discarded"};
        const double peak = dark ? 1.0 : max_value(truth);
        for (const auto& r : results) {
            const std::string name = estimator_name(r.spec);
            const FluxImage img(r.mean_image);
            save_flux_image(img, dir / ("recon_" + name + ".pgm"), ImageFormat::Pgm, peak);
            save_flux_image(img, dir / ("recon_" + name + ".csv"), ImageFormat::Csv);
            table.add_row({name, r.mean_mse, r.stderr_mse, r.mean_psnr, r.stderr_psnr,
                           static_cast<int64_t>(r.frames_discarded)});
        }
        table.write(dir / "report.tsv");
    }
    return results;
}

SweepResult sweep_ppf(const FluxImage& truth, const ExperimentConfig& config) {
    require_increasing(config.ppf_grid, "sweep_ppf");
    SweepResult result;
    result.axis_label = "ppf";
    result.axis = config.ppf_grid;
    result.trials = config.trials;
    result.curves.resize(config.estimators.size());
    for (size_t e = 0; e < config.estimators.size(); ++e) {
        result.curves[e].spec = config.estimators[e];
        result.curves[e].mse.resize(config.ppf_grid.size());
        result.curves[e].stderr_mse.resize(config.ppf_grid.size());
    }

    for (size_t i = 0; i < config.ppf_grid.size(); ++i) {
        const double alpha = calibrate_attenuation(truth, config.ppf_grid[i]);
        const PointOutcome out = run_point(
            truth, alpha, config.frames, config.trials, config.estimators,
            rng::derive_seed(config.seed, rng::kDeriveSweepPoint, i), config.clamp_max,
            false);
        for (size_t e = 0; e < config.estimators.size(); ++e) {
            result.curves[e].mse[i] = out.mean_mse[e];
            result.curves[e].stderr_mse[i] = out.stderr_mse[e];
        }
    }
    for (auto& curve : result.curves) {
        curve.argmin_axis = refine_argmin(result.axis, curve.mse);
        curve.argmin_value = *std::min_element(curve.mse.begin(), curve.mse.end());
    }

    if (!config.out_dir.empty()) {
        ReportTable table;
        table.metadata = base_metadata(config);
        for (const auto& curve : result.curves) {
            table.metadata.emplace_back("argmin_ppf_" + estimator_name(curve.spec),
                                        std::to_string(curve.argmin_axis));
        }
        table.columns = {"ppf"};
        for (const auto& curve : result.curves) {
            const std::string name = estimator_name(curve.spec);
            table.columns.push_back("mse_" + name);
            table.columns.push_back("stderr_" + name);
        }
        for (size_t i = 0; i < result.axis.size(); ++i) {
            std::vector<ReportCell> row{result.axis[i]};
            for (const auto& curve : result.curves) {
                row.emplace_back(curve.mse[i]);
                row.emplace_back(curve.stderr_mse[i]);
            }
            table.add_row(std::move(row));
        }
        table.write(std::filesystem::path(config.out_dir) / "sweep_ppf.tsv");
    }
    return result;
}

FramesToTargetResult frames_to_target_mse(const FluxImage& truth,
                                          const ExperimentConfig& config) {
    if (config.frame_grid.empty()) {
        throw std::invalid_argument("frames_to_target_mse: empty frame grid");
    }
    for (size_t i = 1; i < config.frame_grid.size(); ++i) {
        if (config.frame_grid[i] <= config.frame_grid[i - 1]) {
            throw std::invalid_argument(
                "frames_to_target_mse: frame grid must be strictly increasing");
        }
    }
    if (!(config.target_mse > 0.0)) {
        throw std::invalid_argument("frames_to_target_mse: target_mse must be > 0");
    }

    const uint32_t rows = truth.rows();
    const uint32_t cols = truth.cols();
    const size_t npx = truth.values().size();
    const double alpha = calibrate_attenuation(truth, config.ppf);
    const double inv_scale = 1.0 / alpha;

    Matrix<double> scaled(rows, cols);
    for (size_t p = 0; p < npx; ++p) {
        scaled.values()[p] = truth.values().values()[p] * alpha;
    }
    const DetectionProbMap q_sim = detection_prob_from_flux(FluxImage(std::move(scaled)));

    const auto& grid = config.frame_grid;
    const size_t ne = config.estimators.size();
    const uint64_t t_max = grid.back();
    const bool need_truth =
        std::any_of(config.estimators.begin(), config.estimators.end(),
                    [](const EstimatorSpec& e) { return e.kind == EstimatorKind::FullReadout; });

    // mse[e][point][trial]
    std::vector<std::vector<std::vector<double>>> mse(
        ne, std::vector<std::vector<double>>(grid.size(),
                                             std::vector<double>(config.trials, 0.0)));

    const uint64_t point_seed = rng::derive_seed(config.seed, rng::kDeriveSweepPoint, 0);
    parallel_for(config.trials, [&](uint64_t begin, uint64_t end) {
        for (uint64_t trial = begin; trial < end; ++trial) {
            const uint64_t trial_seed =
                rng::derive_seed(point_seed, rng::kDeriveTrial, trial);
            const FrameBatch batch = simulate_batch_q(q_sim, t_max, trial_seed, need_truth);

            // Each grid point reuses the tallies of the previous one; a batch
            // prefix is itself a valid batch under the substream scheme.
            FrameTallies cumulative(rows, cols);
            Matrix<double> oracle_acc(rows, cols, 0.0);
            uint64_t done = 0;
            for (size_t k = 0; k < grid.size(); ++k) {
                cumulative.merge(tally_frames(batch, done, grid[k]));
                if (need_truth) {
                    for (uint64_t t = done; t < grid[k]; ++t) {
                        const auto words = batch.truth_bits(t);
                        for (size_t w = 0; w < words.size(); ++w) {
                            uint64_t bits = words[w];
                            while (bits != 0) {
                                oracle_acc.values()[w * 64 + std::countr_zero(bits)] += 1.0;
                                bits &= bits - 1;
                            }
                        }
                    }
                }
                done = grid[k];

                for (size_t e = 0; e < ne; ++e) {
                    const EstimatorSpec& spec = config.estimators[e];
                    ProbEstimate est = [&] {
                        if (spec.kind == EstimatorKind::FullReadout) {
                            Matrix<double> q(rows, cols);
                            const double inv = 1.0 / static_cast<double>(grid[k]);
                            for (size_t p = 0; p < npx; ++p) {
                                q.values()[p] = oracle_acc.values()[p] * inv;
                            }
                            return ProbEstimate{DetectionProbMap(std::move(q)), "oracle",
                                                grid[k], 0};
                        }
                        if (spec.kind == EstimatorKind::Randomized) {
                            throw std::invalid_argument(
                                "frames_to_target_mse: randomized estimator not supported");
                        }
                        return estimate_from(spec, batch, cumulative, 0);
                    }();
                    const FluxImage lambda_sim =
                        flux_from_detection_prob(est.q_hat, config.clamp_max);
                    Matrix<double> display(rows, cols);
                    for (size_t p = 0; p < npx; ++p) {
                        display.values()[p] =
                            lambda_sim.values().values()[p] * inv_scale;
                    }
                    mse[e][k][trial] =
                        kernels::sum_sq_diff(display.values(), truth.values().values()) /
                        static_cast<double>(npx);
                }
            }
        }
    });

    FramesToTargetResult result;
    result.target_mse = config.target_mse;
    result.sweep.axis_label = "frames";
    result.sweep.trials = config.trials;
    result.sweep.axis.assign(grid.begin(), grid.end());
    result.sweep.curves.resize(ne);
    result.frames_needed.assign(ne, std::nullopt);
    const double inv_trials = 1.0 / static_cast<double>(config.trials);
    for (size_t e = 0; e < ne; ++e) {
        auto& curve = result.sweep.curves[e];
        curve.spec = config.estimators[e];
        curve.mse.resize(grid.size());
        curve.stderr_mse.resize(grid.size());
        for (size_t k = 0; k < grid.size(); ++k) {
            double sum = 0, sum2 = 0;
            for (double v : mse[e][k]) {
                sum += v;
                sum2 += v * v;
            }
            curve.mse[k] = sum * inv_trials;
            curve.stderr_mse[k] =
                config.trials > 1
                    ? std::sqrt(std::max(0.0, (sum2 - sum * sum * inv_trials) /
                                                  (config.trials - 1)) *
                                inv_trials)
                    : 0.0;
            if (!result.frames_needed[e] && curve.mse[k] <= config.target_mse) {
                result.frames_needed[e] = grid[k];
            }
        }
        curve.argmin_axis = refine_argmin(result.sweep.axis, curve.mse);
        curve.argmin_value = *std::min_element(curve.mse.begin(), curve.mse.end());
    }

    if (!config.out_dir.empty()) {
        ReportTable table;
        table.metadata = base_metadata(config);
        table.metadata.emplace_back("target_mse", std::to_string(config.target_mse));
        for (size_t e = 0; e < ne; ++e) {
            table.metadata.emplace_back(
                "frames_needed_" + estimator_name(config.estimators[e]),
                result.frames_needed[e] ? std::to_string(*result.frames_needed[e])
                                        : "not_reached");
        }
        table.columns = {"frames"};
        for (const auto& curve : result.sweep.curves) {
            const std::string name = estimator_name(curve.spec);
            table.columns.push_back("mse_" + name);
            table.columns.push_back("stderr_" + name);
        }
        for (size_t k = 0; k < grid.size(); ++k) {
            std::vector<ReportCell> row{static_cast<int64_t>(grid[k])};
            for (const auto& curve : result.sweep.curves) {
                row.emplace_back(curve.mse[k]);
                row.emplace_back(curve.stderr_mse[k]);
            }
            table.add_row(std::move(row));
        }
        table.write(std::filesystem::path(config.out_dir) / "sweep_frames.tsv");
    }
    return result;
}

SizeSweepResult sweep_array_size(const FluxImage& truth, const ExperimentConfig& config) {
    if (config.size_grid.empty()) {
        throw std::invalid_argument("sweep_array_size: empty size grid");
    }
    std::vector<double> ppf_grid = config.ppf_grid;
    if (ppf_grid.empty()) {
        ppf_grid = {0.4, 0.8, 1.2, 1.6, 2.2, 3.0};
    }
    require_increasing(ppf_grid, "sweep_array_size");
    if (!(config.flux_budget > ppf_grid.back())) {
        throw std::invalid_argument(
            "sweep_array_size: flux budget must exceed the largest PPF target");
    }

    SizeSweepResult result;
    result.sizes = config.size_grid;
    result.trials = config.trials;
    result.estimators = config.estimators;
    result.best_mse.assign(config.estimators.size(),
                           std::vector<double>(config.size_grid.size(), 0.0));
    result.best_ppf = result.best_mse;

    for (size_t s = 0; s < config.size_grid.size(); ++s) {
        const uint32_t n = config.size_grid[s];
        const FluxImage display(resample_image(truth.values(), n, n));
        double total = 0.0;
        for (double v : display.values().values()) total += v;
        if (!(total > 0.0)) {
            throw std::invalid_argument("sweep_array_size: resampled truth is dark");
        }
        // Photons per pixel scale as 1/pixel-count under the fixed budget.
        const double budget_scale = config.flux_budget / total;

        std::vector<std::vector<double>> mse_grid(
            config.estimators.size(), std::vector<double>(ppf_grid.size(), 0.0));
        for (size_t i = 0; i < ppf_grid.size(); ++i) {
            Matrix<double> budgeted(n, n);
            for (size_t p = 0; p < budgeted.size(); ++p) {
                budgeted.values()[p] = display.values().values()[p] * budget_scale;
            }
            const double alpha =
                calibrate_attenuation(FluxImage(std::move(budgeted)), ppf_grid[i]);
            const PointOutcome out = run_point(
                display, alpha * budget_scale, config.frames, config.trials,
                config.estimators,
                rng::derive_seed(config.seed, rng::kDeriveSweepPoint,
                                 s * ppf_grid.size() + i),
                config.clamp_max, false);
            for (size_t e = 0; e < config.estimators.size(); ++e) {
                mse_grid[e][i] = out.mean_mse[e];
            }
        }
        for (size_t e = 0; e < config.estimators.size(); ++e) {
            const size_t m = static_cast<size_t>(
                std::min_element(mse_grid[e].begin(), mse_grid[e].end()) -
                mse_grid[e].begin());
            result.best_mse[e][s] = mse_grid[e][m];
            result.best_ppf[e][s] = refine_argmin(ppf_grid, mse_grid[e]);
        }
    }

    if (!config.out_dir.empty()) {
        ReportTable table;
        table.metadata = base_metadata(config);
        table.columns = {"size"};
        for (const auto& e : config.estimators) {
            const std::string name = estimator_name(e);
            table.columns.push_back("best_mse_" + name);
            table.columns.push_back("best_ppf_" + name);
        }
        for (size_t s = 0; s < config.size_grid.size(); ++s) {
            std::vector<ReportCell> row{static_cast<int64_t>(config.size_grid[s])};
            for (size_t e = 0; e < config.estimators.size(); ++e) {
                row.emplace_back(result.best_mse[e][s]);
                row.emplace_back(result.best_ppf[e][s]);
            }
            table.add_row(std::move(row));
        }
        table.write(std::filesystem::path(config.out_dir) / "sweep_size.tsv");
    }
    return result;
}

SweepResult crb_comparison(const FluxImage& truth, const ExperimentConfig& config) {
    if (truth.rows() != 2 || truth.cols() != 2) {
        throw std::invalid_argument("crb_comparison: ground truth must be 2x2");
    }
    require_increasing(config.ppf_grid, "crb_comparison");

    SweepResult result;
    result.axis_label = "ppf";
    result.axis = config.ppf_grid;
    result.trials = config.trials;
    result.bound.resize(config.ppf_grid.size());
    result.curves.resize(config.estimators.size());
    for (size_t e = 0; e < config.estimators.size(); ++e) {
        result.curves[e].spec = config.estimators[e];
        result.curves[e].mse.resize(config.ppf_grid.size());
        result.curves[e].stderr_mse.resize(config.ppf_grid.size());
    }

    const size_t ne = config.estimators.size();
    for (size_t i = 0; i < config.ppf_grid.size(); ++i) {
        const double alpha = calibrate_attenuation(truth, config.ppf_grid[i]);
        Matrix<double> scaled(2, 2);
        for (size_t p = 0; p < 4; ++p) {
            scaled.values()[p] = truth.values().values()[p] * alpha;
        }
        const DetectionProbMap q_true =
            detection_prob_from_flux(FluxImage(std::move(scaled)));
        result.bound[i] = crb_2x2(q_true, config.frames);

        const uint64_t point_seed =
            rng::derive_seed(config.seed, rng::kDeriveSweepPoint, i);
        std::vector<std::vector<double>> trial_mse(
            ne, std::vector<double>(config.trials, 0.0));
        const bool need_truth = std::any_of(
            config.estimators.begin(), config.estimators.end(),
            [](const EstimatorSpec& e) { return e.kind == EstimatorKind::FullReadout; });

        parallel_for(config.trials, [&](uint64_t begin, uint64_t end) {
            for (uint64_t trial = begin; trial < end; ++trial) {
                const uint64_t trial_seed =
                    rng::derive_seed(point_seed, rng::kDeriveTrial, trial);
                const FrameBatch batch =
                    simulate_batch_q(q_true, config.frames, trial_seed, need_truth);
                const FrameTallies tallies = tally_frames(batch);
                for (size_t e = 0; e < ne; ++e) {
                    const ProbEstimate est = estimate_from(
                        config.estimators[e], batch, tallies,
                        rng::derive_seed(trial_seed, rng::kDeriveEstimator, e));
                    double sum = 0.0;
                    for (size_t p = 0; p < 4; ++p) {
                        const double d =
                            est.q_hat.values().values()[p] - q_true.values().values()[p];
                        sum += d * d;
                    }
                    trial_mse[e][trial] = sum / 4.0;
                }
            }
        });

        const double inv_trials = 1.0 / static_cast<double>(config.trials);
        for (size_t e = 0; e < ne; ++e) {
            double sum = 0, sum2 = 0;
            for (double v : trial_mse[e]) {
                sum += v;
                sum2 += v * v;
            }
            result.curves[e].mse[i] = sum * inv_trials;
            result.curves[e].stderr_mse[i] =
                config.trials > 1
                    ? std::sqrt(std::max(0.0, (sum2 - sum * sum * inv_trials) /
                                                  (config.trials - 1)) *
                                inv_trials)
                    : 0.0;
        }
    }
    for (auto& curve : result.curves) {
        curve.argmin_axis = refine_argmin(result.axis, curve.mse);
        curve.argmin_value = *std::min_element(curve.mse.begin(), curve.mse.end());
    }

    if (!config.out_dir.empty()) {
        ReportTable table;
        table.metadata = base_metadata(config);
        table.columns = {"ppf", "crb"};
        for (const auto& curve : result.curves) {
            const std::string name = estimator_name(curve.spec);
            table.columns.push_back("mse_" + name);
            table.columns.push_back("stderr_" + name);
        }
        for (size_t i = 0; i < result.axis.size(); ++i) {
            std::vector<ReportCell> row{result.axis[i], result.bound[i]};
            for (const auto& curve : result.curves) {
                row.emplace_back(curve.mse[i]);
                row.emplace_back(curve.stderr_mse[i]);
            }
            table.add_row(std::move(row));
        }
        table.write(std::filesystem::path(config.out_dir) / "crb.tsv");
    }
    return result;
}

}  // namespace rowcol
