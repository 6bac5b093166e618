// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: simulate readout batches, reconstruct images, and
// drive the sweep experiments. Every run is reproducible from its flags and
// seed; reports carry the seed and a config hash.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "rowcol/analysis.hpp"
#include "rowcol/estimators.hpp"
#include "rowcol/harness.hpp"
#include "rowcol/io.hpp"
#include "rowcol/model.hpp"

namespace {

using namespace rowcol;

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    const size_t c1 = text.find(':');
    if (c1 != std::string::npos) {
        const size_t c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) {
            throw CLI::ValidationError("grid", "expected start:step:stop");
        }
        const double start = std::stod(text.substr(0, c1));
        const double step = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        const double stop = std::stod(text.substr(c2 + 1));
        if (step <= 0) throw CLI::ValidationError("grid", "step must be positive");
        for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
        return out;
    }
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

struct CliOptions {
    ExperimentConfig config;
    std::vector<std::string> estimator_names;
    std::string in_path;
    std::string out_path;
    std::string ppf_grid_text;
    std::string frame_grid_text;
    std::string size_grid_text;
    std::string config_path;
    uint32_t kmax_override = 0;
    bool keep_truth = false;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config files hold `key = value` lines ('#' comments) where keys are the
// long flag names. They supply defaults only: tokens are inserted for keys
// the command line does not already mention, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config requires a file path");
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);

    std::vector<std::string> extra;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(lineno) +
                             ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        }
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                given = true;
                break;
            }
        }
        if (given) continue;
        if (value == "true" || value == "yes" || value == "on") {
            extra.push_back(flag);
        } else {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }

    // Defaults go right after the subcommand token so they parse in scope.
    std::vector<std::string> out;
    out.reserve(args.size() + extra.size());
    if (!args.empty()) out.push_back(args.front());
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), args.begin() + (args.empty() ? 0 : 1), args.end());
    return out;
}

void add_common(CLI::App* cmd, CliOptions& opt, bool with_estimators = true) {
    cmd->add_option("--config", opt.config_path,
                    "config file with `key = value` defaults ('#' comments)");
    cmd->add_option("--image", opt.config.image,
                    "ground-truth image (.pgm/.csv) or built-in id");
    cmd->add_option("--frames", opt.config.frames, "frames per batch");
    cmd->add_option("--trials", opt.config.trials, "Monte Carlo trials");
    cmd->add_option("--ppf", opt.config.ppf, "target mean photons per frame");
    cmd->add_option("--seed", opt.config.seed, "master seed");
    cmd->add_option("--kmax", opt.kmax_override,
                    "override photon cap of multiphoton estimators");
    cmd->add_flag("--stamp", opt.config.stamp, "add a timestamp to report metadata");
    if (with_estimators) {
        cmd->add_option("--estimator", opt.estimator_names,
                        "estimator (repeatable): naive|spe|random|unambiguous|oracle|me2|me3|me4")
            ->check([](const std::string& name) -> std::string {
                try {
                    parse_estimator(name);
                    return {};
                } catch (const std::exception&) {
                    return "unknown estimator: " + name;
                }
            });
    }
}

std::vector<EstimatorSpec> resolve_estimators(const CliOptions& opt,
                                              std::vector<std::string> fallback) {
    std::vector<std::string> names =
        opt.estimator_names.empty() ? std::move(fallback) : opt.estimator_names;
    std::vector<EstimatorSpec> specs;
    specs.reserve(names.size());
    for (const auto& name : names) {
        EstimatorSpec spec = parse_estimator(name);
        if (opt.kmax_override >= 2 && spec.kind == EstimatorKind::Multiphoton) {
            spec.k_max = opt.kmax_override;
        }
        specs.push_back(spec);
    }
    return specs;
}

FluxImage load_truth(const CliOptions& opt) {
    if (opt.config.image.empty()) {
        throw std::runtime_error("--image is required for this subcommand");
    }
    return resolve_image(opt.config.image);
}

int cmd_simulate(CliOptions& opt) {
    const FluxImage truth = load_truth(opt);
    double alpha = 1.0;
    if (opt.config.ppf > 0) {
        alpha = calibrate_attenuation(truth, opt.config.ppf);
    }
    Matrix<double> scaled(truth.rows(), truth.cols());
    for (size_t p = 0; p < scaled.size(); ++p) {
        scaled.values()[p] = truth.values().values()[p] * alpha;
    }
    const FrameBatch batch = simulate_batch(FluxImage(std::move(scaled)),
                                            opt.config.frames, opt.config.seed,
                                            opt.keep_truth);
    encode_batch(batch, opt.out_path);
    std::cout << "wrote " << opt.out_path << " (" << batch.size() << " frames, "
              << batch.rows() << "x" << batch.cols() << ", attenuation " << alpha
              << ")\n";
    return 0;
}

int cmd_estimate(CliOptions& opt) {
    const FrameBatch batch = decode_batch(opt.in_path);
    const auto specs = resolve_estimators(opt, {"me4"});
    ReportTable report;
    report.metadata.emplace_back("seed", std::to_string(opt.config.seed));
    report.metadata.emplace_back("input", opt.in_path);
    report.columns = {"estimator", "frames_used", "frames_discarded", "mean_ppf"};

    const std::filesystem::path out(opt.out_path);
    for (size_t e = 0; e < specs.size(); ++e) {
        const ProbEstimate est = run_estimator(specs[e], batch, opt.config.seed);
        const FluxImage lambda = flux_from_detection_prob(est.q_hat, opt.config.clamp_max);
        std::filesystem::path path = out;
        if (specs.size() > 1) {
            path = out.parent_path() /
                   (out.stem().string() + "_" + est.estimator_id +
                    out.extension().string());
        }
        save_flux_image(lambda, path);
        report.add_row({est.estimator_id, static_cast<int64_t>(est.frames_used),
                        static_cast<int64_t>(est.frames_discarded),
                        mean_ppf(est.q_hat)});
        std::cout << "wrote " << path.string() << "\n";
    }
    if (!opt.config.out_dir.empty()) {
        report.write(std::filesystem::path(opt.config.out_dir) / "estimate_report.tsv");
    }
    return 0;
}

int cmd_reconstruct(CliOptions& opt) {
    const FluxImage truth = load_truth(opt);
    opt.config.estimators = resolve_estimators(opt, {"naive", "spe", "me4"});
    const auto results = run_reconstruction(truth, opt.config);
    for (const auto& r : results) {
        std::cout << estimator_name(r.spec) << ": psnr " << r.mean_psnr << " dB, mse "
                  << r.mean_mse << "\n";
    }
    return 0;
}

int cmd_sweep_ppf(CliOptions& opt) {
    const FluxImage truth = load_truth(opt);
    opt.config.estimators = resolve_estimators(opt, {"naive", "spe", "me2", "me3", "me4"});
    if (!opt.ppf_grid_text.empty()) opt.config.ppf_grid = parse_grid(opt.ppf_grid_text);
    if (opt.config.ppf_grid.empty()) {
        opt.config.ppf_grid = parse_grid("0.1:0.29:3.0");
    }
    const SweepResult result = sweep_ppf(truth, opt.config);
    for (const auto& curve : result.curves) {
        std::cout << estimator_name(curve.spec) << ": min mse " << curve.argmin_value
                  << " at ppf " << curve.argmin_axis << "\n";
    }
    return 0;
}

int cmd_sweep_frames(CliOptions& opt) {
    const FluxImage truth = load_truth(opt);
    opt.config.estimators = resolve_estimators(opt, {"naive", "spe", "me4", "oracle"});
    if (!opt.frame_grid_text.empty()) {
        opt.config.frame_grid.clear();
        for (double v : parse_grid(opt.frame_grid_text)) {
            opt.config.frame_grid.push_back(static_cast<uint64_t>(v));
        }
    }
    const FramesToTargetResult result = frames_to_target_mse(truth, opt.config);
    for (size_t e = 0; e < result.sweep.curves.size(); ++e) {
        std::cout << estimator_name(result.sweep.curves[e].spec) << ": ";
        if (result.frames_needed[e]) {
            std::cout << *result.frames_needed[e] << " frames to mse "
                      << result.target_mse << "\n";
        } else {
            std::cout << "target mse " << result.target_mse << " not reached\n";
        }
    }
    return 0;
}

int cmd_sweep_size(CliOptions& opt) {
    const FluxImage truth = load_truth(opt);
    opt.config.estimators = resolve_estimators(opt, {"spe", "me4"});
    if (!opt.size_grid_text.empty()) {
        opt.config.size_grid.clear();
        for (double v : parse_grid(opt.size_grid_text)) {
            opt.config.size_grid.push_back(static_cast<uint32_t>(v));
        }
    }
    if (opt.config.size_grid.empty()) opt.config.size_grid = {8, 16, 32, 64};
    if (!opt.ppf_grid_text.empty()) opt.config.ppf_grid = parse_grid(opt.ppf_grid_text);
    const SizeSweepResult result = sweep_array_size(truth, opt.config);
    for (size_t e = 0; e < result.estimators.size(); ++e) {
        std::cout << estimator_name(result.estimators[e]) << ":";
        for (size_t s = 0; s < result.sizes.size(); ++s) {
            std::cout << "  " << result.sizes[s] << "->" << result.best_mse[e][s];
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_crb(CliOptions& opt) {
    if (opt.config.image.empty()) opt.config.image = "uniform2x2";
    const FluxImage truth = load_truth(opt);
    opt.config.estimators = resolve_estimators(opt, {"naive", "spe", "me2", "me3", "me4"});
    if (!opt.ppf_grid_text.empty()) opt.config.ppf_grid = parse_grid(opt.ppf_grid_text);
    if (opt.config.ppf_grid.empty()) opt.config.ppf_grid = parse_grid("0.2:0.2:3.0");
    const SweepResult result = crb_comparison(truth, opt.config);
    for (size_t i = 0; i < result.axis.size(); ++i) {
        std::cout << "ppf " << result.axis[i] << ": crb " << result.bound[i];
        for (const auto& curve : result.curves) {
            std::cout << "  " << estimator_name(curve.spec) << " " << curve.mse[i];
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"row-column multiplexed single-photon array simulator and estimators"};
    app.require_subcommand(1);

    CliOptions opt;

    CLI::App* simulate = app.add_subcommand("simulate", "flux image -> batch file");
    add_common(simulate, opt, false);
    simulate->add_option("--out", opt.out_path, "output .rcfb path")->required();
    simulate->add_flag("--keep-truth", opt.keep_truth,
                       "retain incidence truth for the oracle estimator");

    CLI::App* estimate = app.add_subcommand("estimate", "batch file -> flux estimate");
    add_common(estimate, opt);
    estimate->add_option("--in", opt.in_path, "input .rcfb path")->required();
    estimate->add_option("--out", opt.out_path, "output image path (.csv/.pgm)")
        ->required();
    estimate->add_option("--report-dir", opt.config.out_dir, "report directory");

    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "calibrated simulate + estimate study");
    add_common(reconstruct, opt);
    reconstruct->add_option("--out", opt.config.out_dir, "output directory");

    CLI::App* sweep_ppf_cmd = app.add_subcommand("sweep-ppf", "MSE versus photons per frame");
    add_common(sweep_ppf_cmd, opt);
    sweep_ppf_cmd->add_option("--ppf-grid", opt.ppf_grid_text,
                              "grid: start:step:stop or comma list");
    sweep_ppf_cmd->add_option("--out", opt.config.out_dir, "output directory");

    CLI::App* sweep_frames_cmd =
        app.add_subcommand("sweep-frames", "frames needed to reach a target MSE");
    add_common(sweep_frames_cmd, opt);
    sweep_frames_cmd->add_option("--frame-grid", opt.frame_grid_text,
                                 "frame counts: comma list");
    sweep_frames_cmd->add_option("--target-mse", opt.config.target_mse, "target MSE");
    sweep_frames_cmd->add_option("--out", opt.config.out_dir, "output directory");

    CLI::App* sweep_size_cmd =
        app.add_subcommand("sweep-size", "array-size sweep at fixed flux budget");
    add_common(sweep_size_cmd, opt);
    sweep_size_cmd->add_option("--size-grid", opt.size_grid_text, "sizes: comma list");
    sweep_size_cmd->add_option("--ppf-grid", opt.ppf_grid_text, "attenuation search grid");
    sweep_size_cmd->add_option("--budget", opt.config.flux_budget,
                               "total sensor flux per frame");
    sweep_size_cmd->add_option("--out", opt.config.out_dir, "output directory");

    CLI::App* crb_cmd = app.add_subcommand("crb", "2x2 Cramer-Rao bound comparison");
    add_common(crb_cmd, opt);
    crb_cmd->add_option("--ppf-grid", opt.ppf_grid_text, "grid: start:step:stop or list");
    crb_cmd->add_option("--out", opt.config.out_dir, "output directory");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run '" << (argc > 0 ? argv[0] : "rowcol")
                  << " --help' for usage\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opt);
        if (estimate->parsed()) return cmd_estimate(opt);
        if (reconstruct->parsed()) return cmd_reconstruct(opt);
        if (sweep_ppf_cmd->parsed()) return cmd_sweep_ppf(opt);
        if (sweep_frames_cmd->parsed()) return cmd_sweep_frames(opt);
        if (sweep_size_cmd->parsed()) return cmd_sweep_size(opt);
        if (crb_cmd->parsed()) return cmd_crb(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
