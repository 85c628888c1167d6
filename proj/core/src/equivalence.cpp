#include "xfid/equivalence.hpp"

#include <cmath>

#include "xfid/errors.hpp"

namespace xfid {

std::pair<double, std::vector<double>> lime_unnormalize(double theta0,
                                                        const std::vector<double>& theta,
                                                        const std::vector<double>& mu,
                                                        const std::vector<double>& sigma) {
    std::vector<double> out(theta.size());
    double t0 = theta0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out[i] = theta[i] / sigma[i];
        t0 -= mu[i] * theta[i] / sigma[i];
    }
    return {t0, out};
}

Matrix coefficients_to_contributions(const std::vector<double>& theta_prime,
                                     const Matrix& X) {
    const std::size_t d = theta_prime.size();
    const std::size_t n = X.rows();
    Matrix out(d, n);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t s = 0; s < n; ++s) out.at(i, s) = X.at(s, i) * theta_prime[i];
    return out;
}

Matrix pdp_center(const Matrix& pd_values, const std::vector<double>& pd_mean) {
    Matrix out = pd_values;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t s = 0; s < out.cols(); ++s) out.at(i, s) -= pd_mean[i];
    return out;
}

std::vector<double> shap_add_expectation(const std::vector<double>& group_attribution_sums,
                                         const MatchResult& match,
                                         const GroundTruthExplanation& gt) {
    std::vector<double> out(match.groups.size());
    for (std::size_t g = 0; g < match.groups.size(); ++g) {
        double v = group_attribution_sums[g];
        for (int j : match.groups[g].model_side)
            v += gt.expected[static_cast<std::size_t>(j)];
        out[g] = v;
    }
    return out;
}

std::vector<bool> zero_tolerance_filter(const Matrix& contributions, double atol) {
    std::vector<bool> present(contributions.rows(), false);
    for (std::size_t k = 0; k < contributions.rows(); ++k)
        for (std::size_t s = 0; s < contributions.cols(); ++s)
            if (std::fabs(contributions.at(k, s)) > atol) {
                present[k] = true;
                break;
            }
    return present;
}

AdjustedExplanation adjust_explanation(const Explanation& expl, const Dataset& data) {
    AdjustedExplanation adj;
    Matrix contributions;

    switch (expl.kind) {
        case PayloadKind::SurrogateCoefficients: {
            // Per-sample coefficient vectors, unnormalized then multiplied by
            // the explained sample's feature values. The intercept is kept
            // out of the per-effect comparison and reported separately.
            const std::size_t d = expl.effects.size();
            contributions = Matrix(d, expl.samples.size());
            adj.intercepts.resize(expl.samples.size());
            for (std::size_t t = 0; t < expl.samples.size(); ++t) {
                std::vector<double> theta(d);
                for (std::size_t i = 0; i < d; ++i) theta[i] = expl.payload.at(i, t);
                auto [t0, theta_prime] =
                    lime_unnormalize(expl.intercepts[t], theta, expl.mu, expl.sigma);
                adj.intercepts[t] = t0;
                const auto row = data.X.row(expl.samples[t]);
                for (std::size_t i = 0; i < d; ++i) {
                    const int f = expl.effects[i][0];
                    contributions.at(i, t) = row[static_cast<std::size_t>(f)] * theta_prime[i];
                }
            }
            adj.add_expectation = false;
            break;
        }
        case PayloadKind::ShapleyAttributions: {
            contributions = expl.payload;
            adj.intercepts = expl.intercepts;
            adj.add_expectation = true;
            break;
        }
        case PayloadKind::PdValues: {
            contributions = pdp_center(expl.payload, expl.pd_mean);
            adj.add_expectation = true;
            break;
        }
    }

    const std::vector<bool> present = zero_tolerance_filter(contributions);
    std::size_t kept = 0;
    for (bool p : present) kept += p ? 1 : 0;
    adj.contributions = Matrix(kept, contributions.cols());
    std::size_t out_k = 0;
    for (std::size_t k = 0; k < present.size(); ++k) {
        if (!present[k]) continue;
        adj.effects.push_back(expl.effects[k]);
        for (std::size_t s = 0; s < contributions.cols(); ++s)
            adj.contributions.at(out_k, s) = contributions.at(k, s);
        ++out_k;
    }
    return adj;
}

}  // namespace xfid
