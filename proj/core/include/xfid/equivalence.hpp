#pragma once

#include <utility>
#include <vector>

#include "xfid/alignment.hpp"
#include "xfid/dataset.hpp"
#include "xfid/explainers.hpp"
#include "xfid/ground_truth.hpp"

namespace xfid {

/// Invert z-score normalization of surrogate coefficients:
/// theta_i' = theta_i / sigma_i, theta_0' = theta_0 - sum_i mu_i theta_i / sigma_i.
/// The surrogate's predictions are invariant under this map.
std::pair<double, std::vector<double>> lime_unnormalize(double theta0,
                                                        const std::vector<double>& theta,
                                                        const std::vector<double>& mu,
                                                        const std::vector<double>& sigma);

/// entry (i, s) = X(s, i) * theta'[i].
Matrix coefficients_to_contributions(const std::vector<double>& theta_prime,
                                     const Matrix& X);

/// Subtract each feature's dataset-mean PD value, turning PD evaluations into
/// mean-centered contributions that the expectation add-back applies to.
Matrix pdp_center(const Matrix& pd_values, const std::vector<double>& pd_mean);

/// Expectation add-back for centered payloads: per group,
/// sum of explainer attributions at the sample plus sum of ground-truth
/// expected contributions over the group's model side.
std::vector<double> shap_add_expectation(const std::vector<double>& group_attribution_sums,
                                         const MatchResult& match,
                                         const GroundTruthExplanation& gt);

/// Mask of effects that are present (max |contribution| over samples > atol).
std::vector<bool> zero_tolerance_filter(const Matrix& contributions, double atol = 1e-8);

/// Explainer raw payload converted to per-effect contributions at the
/// explained samples, directly comparable (per matched group) to ground truth.
struct AdjustedExplanation {
    std::vector<std::vector<int>> effects;  // post zero-tolerance filter
    Matrix contributions;                   // |effects| x |samples|
    bool add_expectation = false;           // true for shapley/pd payloads
    std::vector<double> intercepts;         // per-sample intercept (lime) / base (shap)
};

/// Applies the explainer-specific equivalence relation and the
/// zero-tolerance filter. `data` supplies feature values for surrogate
/// explainers.
AdjustedExplanation adjust_explanation(const Explanation& expl, const Dataset& data);

}  // namespace xfid
