#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xfid/explainers.hpp"
#include "xfid/metrics.hpp"
#include "xfid/model_gen.hpp"

namespace xfid {

/// Sweep configuration. Every derived task seed is a pure function of
/// (master seed, grid cell, model index, explainer, sample index).
struct ExperimentConfig {
    std::vector<int> d = {2, 4, 7, 16, 32, 64, 127, 256, 512, 1024};
    std::vector<double> n_dummy_frac = {0.0, 0.2375, 0.475, 0.7125, 0.95};
    std::vector<double> pct_nonlinear = {0.0, 0.375, 0.75, 1.125, 1.5};
    std::vector<double> pct_interact = {0.0, 0.167, 0.333, 0.5};
    std::vector<int> order_interact = {1, 2, 3};
    std::vector<std::string> explainers = {"pdp", "lime", "shap"};
    LimeOptions lime;
    ShapOptions shap;
    int background_k = 100;
    std::uint64_t seed = 0;
    double timeout_s = 120.0;
    int models_per_cell = 1;
    int samples_per_model = 100;  // capped at n; seeded subset
    int max_gen_rounds = 50;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

/// Grid selected by the config (cross product with the
/// order=1 <=> pct_interact=0 coupling, duplicates removed).
std::vector<GenParams> config_grid(const ExperimentConfig& cfg);

/// Derived seeds.
std::uint64_t model_task_seed(std::uint64_t master, const GenParams& cell, int model_index);
std::uint64_t explainer_task_seed(std::uint64_t master, const GenParams& cell,
                                  int model_index, const std::string& explainer);

/// Seeded subset of k sample indices out of n, sorted ascending.
std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, std::uint64_t seed);

/// Full sweep: generate -> sample -> explain -> align -> score -> persist.
/// Per-task failures become status rows; results.csv (and a timings.csv
/// sidecar) are written under out_dir. Completed tasks with checksum-valid
/// artifacts are skipped on rerun.
std::vector<MetricsRecord> run_sweep(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out_dir, int jobs = 1);

/// One (model, explainer) evaluation from files. Samples a dataset when no
/// dataset path is given. Writes explanation JSON, match JSON, and a one-row
/// metrics CSV next to out_dir.
MetricsRecord run_single(const std::filesystem::path& model_path,
                         const std::optional<std::filesystem::path>& dataset_path,
                         const std::string& explainer, std::uint64_t seed,
                         const std::filesystem::path& out_dir,
                         const ExperimentConfig& cfg = {});

/// FNV-1a, used for artifact checksums and explainer-name seed derivation.
std::uint64_t fnv1a(const std::string& text);

}  // namespace xfid
