#pragma once

#include <string>
#include <vector>

#include "xfid/dataset.hpp"
#include "xfid/expr.hpp"

namespace xfid {

/// Analytic per-effect contributions of the white box over a dataset.
struct GroundTruthExplanation {
    std::vector<std::vector<int>> effects;  // feature subsets D_j
    Matrix contributions;                   // m x n, entry (j, s) = C_j at sample s
    std::vector<double> expected;           // E[C_j] over the dataset
};

/// contributions[j][s] = f_j(x_s). Throws NonFiniteContribution if any entry
/// is non-finite (a validation gap upstream).
GroundTruthExplanation explain_ground_truth(const AdditiveModel& model,
                                            const Dataset& data);

/// JSON {effects: [[int]], expected: [float]}; contributions exported
/// separately as CSV (m columns x n rows).
std::string ground_truth_to_json(const GroundTruthExplanation& gt);
std::string ground_truth_contributions_csv(const GroundTruthExplanation& gt);

}  // namespace xfid
