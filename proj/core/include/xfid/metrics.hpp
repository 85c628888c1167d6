#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfid/alignment.hpp"
#include "xfid/equivalence.hpp"
#include "xfid/ground_truth.hpp"

namespace xfid {

/// Per-(model, explainer) infidelity scores and experiment metadata.
struct MetricsRecord {
    std::string model_id;
    std::string explainer_id;
    int d = 0;
    int n_dummy = 0;
    double pct_nonlinear = 0.0;
    double pct_interact = 0.0;
    int order_interact = 1;
    double maiou = 0.0;
    double mean_cosine = 0.0;
    double mean_euclidean = 0.0;
    double mean_nrmse = 0.0;
    double explainer_rmse = 0.0;
    long dropped_evals = 0;
    long wall_ms = 0;
    std::string status = "ok";
};

/// Matched comparison vectors at one explained sample: v[c] sums the group's
/// ground-truth contributions, vhat[c] the corrected explainer contributions
/// (empty explainer side contributes 0 before any expectation add-back).
std::pair<std::vector<double>, std::vector<double>> build_comparison_vectors(
    const MatchResult& match, const GroundTruthExplanation& gt,
    const AdjustedExplanation& adjusted, std::size_t sample_index,
    std::size_t explained_column);

/// 1 - cos(v, vhat). Conventions: both zero -> 0, exactly one zero -> 1.
double cosine_distance(std::span<const double> v, std::span<const double> vhat);

double euclidean_distance(std::span<const double> v, std::span<const double> vhat);

/// RMSE(a, b) / (Q3(a) - Q1(a)). Throws DegenerateIQR when Q3 == Q1.
double nrmse(std::span<const double> a, std::span<const double> b);

/// Spearman's rank correlation with average ranks for ties. Throws
/// ZeroVariance if either rank vector is constant.
double spearman_rho(std::span<const double> u, std::span<const double> w);

/// Full per-(model, explainer) evaluation over the explained samples.
/// Fills maiou, mean cosine/euclidean, per-group NRMSE mean (groups with a
/// degenerate ground-truth IQR are skipped) and the explainer-as-predictor
/// RMSE against the model output.
struct EvaluationInput {
    const GroundTruthExplanation& gt;
    const AdjustedExplanation& adjusted;
    std::span<const std::size_t> samples;       // dataset row indices
    std::span<const double> model_outputs;      // F(x_s) per explained sample
};

struct EvaluationScores {
    MatchResult match;
    double maiou = 0.0;
    double mean_cosine = 0.0;
    double mean_euclidean = 0.0;
    double mean_nrmse = 0.0;
    double explainer_rmse = 0.0;
};

EvaluationScores evaluate_explanation(const EvaluationInput& in);

/// Per-(explainer, grid cell) aggregate row.
struct SummaryRow {
    std::string cell;
    std::string explainer_id;
    int records = 0;
    int failures = 0;
    double mean_maiou = 0.0;
    double mean_cosine = 0.0;
    double mean_euclidean = 0.0;
    double mean_nrmse = 0.0;
    double mean_explainer_rmse = 0.0;
    std::optional<double> rho_perf;  // across explainers within the cell
};

/// Cell/explainer means plus, per cell, Spearman rho between mean cosine
/// similarity and negative explainer RMSE across explainers. Output sorted
/// by (cell, explainer).
std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records);

/// Results CSV (exact column order of the results contract).
std::string metrics_csv_header();
std::string metrics_record_to_csv(const MetricsRecord& r);
std::string summary_to_csv(const std::vector<SummaryRow>& rows);

}  // namespace xfid
