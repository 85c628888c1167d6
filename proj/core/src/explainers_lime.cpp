#include <cmath>
#include <vector>

#include "xfid/errors.hpp"
#include "xfid/explainers.hpp"
#include "xfid/rng.hpp"
#include "xfid/wls.hpp"

namespace xfid {

LimeFit lime_fit(const BlackBox& model, const std::vector<FeatureStats>& stats,
                 std::span<const double> x, std::uint64_t seed, const LimeOptions& opts) {
    const std::size_t d = stats.size();
    for (const FeatureStats& s : stats)
        if (!(s.stddev > 0.0)) throw ConfigInvalid("lime: zero feature stddev");

    Rng rng(seed);
    const auto ns = static_cast<std::size_t>(opts.num_samples);

    // Neighborhood in z-score space around the data distribution.
    Matrix z(ns, d);
    std::vector<double> raw(d);
    std::vector<double> labels;
    std::vector<std::size_t> valid_rows;
    labels.reserve(ns);
    valid_rows.reserve(ns);
    LimeFit fit;
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t i = 0; i < d; ++i) {
            z.at(s, i) = rng.normal();
            raw[i] = z.at(s, i) * stats[i].stddev + stats[i].mean;
        }
        const double y = model(raw);
        if (std::isfinite(y)) {
            labels.push_back(y);
            valid_rows.push_back(s);
        } else {
            ++fit.dropped_evals;
        }
    }
    if (valid_rows.size() * 10 < ns)
        throw TooFewValidSamples("lime: < 10% of perturbations yielded finite labels");

    // Exponential kernel in z-space, centered at the explained instance.
    const double kappa = opts.kernel_width_factor * std::sqrt(static_cast<double>(d));
    std::vector<double> zx(d);
    for (std::size_t i = 0; i < d; ++i) zx[i] = (x[i] - stats[i].mean) / stats[i].stddev;
    std::vector<double> weights(valid_rows.size());
    Matrix design(valid_rows.size(), d + 1);
    for (std::size_t r = 0; r < valid_rows.size(); ++r) {
        const std::size_t s = valid_rows[r];
        double dist2 = 0.0;
        design.at(r, 0) = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double zi = z.at(s, i);
            design.at(r, i + 1) = zi;
            const double dlt = zi - zx[i];
            dist2 += dlt * dlt;
        }
        weights[r] = std::exp(-dist2 / (kappa * kappa));
    }

    const std::vector<double> theta =
        weighted_least_squares(design, labels, weights, opts.ridge, true);
    fit.theta0 = theta[0];
    fit.theta.assign(theta.begin() + 1, theta.end());
    return fit;
}

Explanation explain_lime(const BlackBox& model, const Dataset& data,
                         std::span<const std::size_t> samples, std::uint64_t seed,
                         const LimeOptions& opts) {
    const std::size_t d = data.d();
    Explanation e;
    e.kind = PayloadKind::SurrogateCoefficients;
    for (std::size_t i = 0; i < d; ++i) e.effects.push_back({static_cast<int>(i)});
    e.samples.assign(samples.begin(), samples.end());
    e.payload = Matrix(d, samples.size());
    e.intercepts.resize(samples.size());
    e.mu.resize(d);
    e.sigma.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        e.mu[i] = data.stats[i].mean;
        e.sigma[i] = data.stats[i].stddev;
    }
    for (std::size_t t = 0; t < samples.size(); ++t) {
        const LimeFit fit = lime_fit(model, data.stats, data.X.row(samples[t]),
                                     seed_combine(seed, samples[t]), opts);
        e.intercepts[t] = fit.theta0;
        for (std::size_t i = 0; i < d; ++i) e.payload.at(i, t) = fit.theta[i];
        e.dropped_evals += fit.dropped_evals;
    }
    return e;
}

}  // namespace xfid
