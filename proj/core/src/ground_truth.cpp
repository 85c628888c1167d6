#include "xfid/ground_truth.hpp"

#include <cmath>

#include "xfid/errors.hpp"

#include <nlohmann/json.hpp>

namespace xfid {

GroundTruthExplanation explain_ground_truth(const AdditiveModel& model,
                                            const Dataset& data) {
    const std::size_t m = model.effects.size();
    const std::size_t n = data.n();
    GroundTruthExplanation gt;
    gt.effects.reserve(m);
    for (const Effect& e : model.effects) gt.effects.push_back(e.features);
    gt.contributions = Matrix(m, n);
    gt.expected.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const ExprNode& expr = *model.effects[j].expr;
        double sum = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const double c = eval_expr(expr, data.X.row(s));
            if (!std::isfinite(c))
                throw NonFiniteContribution(
                    "ground truth: non-finite contribution for effect " +
                    std::to_string(j) + " at sample " + std::to_string(s));
            gt.contributions.at(j, s) = c;
            sum += c;
        }
        gt.expected[j] = sum / static_cast<double>(n);
    }
    return gt;
}

std::string ground_truth_to_json(const GroundTruthExplanation& gt) {
    nlohmann::ordered_json j;
    j["effects"] = gt.effects;
    j["expected"] = gt.expected;
    return j.dump();
}

std::string ground_truth_contributions_csv(const GroundTruthExplanation& gt) {
    // m columns x n rows (one row per sample).
    const std::size_t m = gt.contributions.rows();
    const std::size_t n = gt.contributions.cols();
    Matrix t(n, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t s = 0; s < n; ++s) t.at(s, j) = gt.contributions.at(j, s);
    return matrix_to_csv(t);
}

}  // namespace xfid
