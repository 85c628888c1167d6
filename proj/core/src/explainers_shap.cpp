#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "xfid/errors.hpp"
#include "xfid/explainers.hpp"
#include "xfid/rng.hpp"
#include "xfid/wls.hpp"

namespace xfid {

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i)
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

/// Shapley kernel weight for a proper coalition of size s out of d players.
double shapley_kernel(int d, int s) {
    return static_cast<double>(d - 1) / (binomial(d, s) * s * (d - s));
}

struct ValueFunction {
    const BlackBox& model;
    std::span<const double> x;
    const Matrix& background;
    long dropped = 0;

    // Marginal (feature-independence) value: features outside the coalition
    // are replaced by background-row values and averaged.
    double operator()(const std::vector<bool>& in_coalition) {
        const std::size_t d = x.size();
        std::vector<double> probe(d);
        double sum = 0.0;
        std::size_t valid = 0;
        for (std::size_t b = 0; b < background.rows(); ++b) {
            const auto brow = background.row(b);
            for (std::size_t i = 0; i < d; ++i)
                probe[i] = in_coalition[i] ? x[i] : brow[i];
            const double y = model(probe);
            if (std::isfinite(y)) {
                sum += y;
                ++valid;
            } else {
                ++dropped;
            }
        }
        if (valid == 0)
            throw NonFiniteValueFunction(
                "kernelshap: all background evaluations non-finite for a coalition");
        return sum / static_cast<double>(valid);
    }
};

}  // namespace

ShapFit kernelshap_fit(const BlackBox& model, std::span<const double> x,
                       const Matrix& background, std::uint64_t seed,
                       const ShapOptions& opts) {
    const auto d = static_cast<int>(x.size());
    if (background.rows() == 0) throw ConfigInvalid("kernelshap: empty background");

    ValueFunction value{model, x, background};
    const std::vector<bool> none(static_cast<std::size_t>(d), false);
    const double v0 = value(none);
    const double vfull = model(x);
    if (!std::isfinite(vfull))
        throw NonFiniteValueFunction("kernelshap: model non-finite at the explained point");
    const double delta = vfull - v0;

    ShapFit fit;
    fit.base = v0;
    if (d == 1) {
        fit.phi = {delta};
        fit.dropped_evals = value.dropped;
        return fit;
    }

    const bool exact = opts.force_exact || d <= opts.exact_max_d;
    std::vector<std::vector<bool>> coalitions;
    std::vector<double> weights;
    if (exact) {
        const std::uint64_t total = (1ULL << d) - 2;  // proper, non-empty
        coalitions.reserve(total);
        weights.reserve(total);
        for (std::uint64_t mask = 1; mask <= total; ++mask) {
            std::vector<bool> s(static_cast<std::size_t>(d), false);
            int size = 0;
            for (int i = 0; i < d; ++i)
                if (mask & (1ULL << i)) {
                    s[static_cast<std::size_t>(i)] = true;
                    ++size;
                }
            coalitions.push_back(std::move(s));
            weights.push_back(shapley_kernel(d, size));
        }
    } else {
        // Coalition sizes follow the kernel-induced distribution, members are
        // uniform within a size; uniform regression weights then reproduce the
        // kernel-weighted objective in expectation.
        const long budget = opts.nsamples > 0 ? opts.nsamples : 2048 + 2L * d;
        std::vector<double> size_mass(static_cast<std::size_t>(d - 1));
        for (int s = 1; s < d; ++s)
            size_mass[static_cast<std::size_t>(s - 1)] =
                1.0 / (static_cast<double>(s) * static_cast<double>(d - s));
        Rng rng(seed);
        std::vector<int> idx(static_cast<std::size_t>(d));
        std::iota(idx.begin(), idx.end(), 0);
        coalitions.reserve(static_cast<std::size_t>(budget));
        weights.assign(static_cast<std::size_t>(budget), 1.0);
        for (long t = 0; t < budget; ++t) {
            const int size = 1 + static_cast<int>(rng.weighted(size_mass));
            rng.shuffle(idx);
            std::vector<bool> s(static_cast<std::size_t>(d), false);
            for (int i = 0; i < size; ++i) s[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;
            coalitions.push_back(std::move(s));
        }
    }
    fit.coalitions = static_cast<long>(coalitions.size());

    // Efficiency (sum phi = v(full) - v(empty)) is enforced exactly by
    // eliminating the last attribution variable.
    const std::size_t rows = coalitions.size();
    const auto q = static_cast<std::size_t>(d - 1);
    Matrix design(rows, q);
    std::vector<double> target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<bool>& s = coalitions[r];
        const double zd = s[static_cast<std::size_t>(d - 1)] ? 1.0 : 0.0;
        for (std::size_t i = 0; i < q; ++i)
            design.at(r, i) = (s[i] ? 1.0 : 0.0) - zd;
        target[r] = value(s) - v0 - zd * delta;
    }
    const std::vector<double> head =
        weighted_least_squares(design, target, weights, 0.0, false);
    fit.phi = head;
    double tail = delta;
    for (double p : head) tail -= p;
    fit.phi.push_back(tail);
    fit.dropped_evals = value.dropped;
    return fit;
}

Explanation explain_kernelshap(const BlackBox& model, const Dataset& data,
                               std::span<const std::size_t> samples,
                               const Matrix& background, std::uint64_t seed,
                               const ShapOptions& opts) {
    const std::size_t d = data.d();
    Explanation e;
    e.kind = PayloadKind::ShapleyAttributions;
    for (std::size_t i = 0; i < d; ++i) e.effects.push_back({static_cast<int>(i)});
    e.samples.assign(samples.begin(), samples.end());
    e.payload = Matrix(d, samples.size());
    e.intercepts.resize(samples.size());
    for (std::size_t t = 0; t < samples.size(); ++t) {
        const ShapFit fit = kernelshap_fit(model, data.X.row(samples[t]), background,
                                           seed_combine(seed, samples[t]), opts);
        e.intercepts[t] = fit.base;
        for (std::size_t i = 0; i < d; ++i) e.payload.at(i, t) = fit.phi[i];
        e.dropped_evals += fit.dropped_evals;
        e.coalitions += fit.coalitions;
    }
    return e;
}

std::vector<double> shapley_permutation_oracle(const BlackBox& model,
                                               std::span<const double> x,
                                               const Matrix& background) {
    const auto d = static_cast<int>(x.size());
    ValueFunction value{model, x, background};

    // Memoized v(S) over coalition bitmasks.
    std::vector<double> cache(1ULL << d, std::numeric_limits<double>::quiet_NaN());
    auto v = [&](std::uint64_t mask) {
        double& slot = cache[mask];
        if (std::isnan(slot)) {
            std::vector<bool> s(static_cast<std::size_t>(d), false);
            for (int i = 0; i < d; ++i)
                if (mask & (1ULL << i)) s[static_cast<std::size_t>(i)] = true;
            slot = value(s);
        }
        return slot;
    };

    std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t count = 0;
    do {
        std::uint64_t mask = 0;
        for (int i : perm) {
            const std::uint64_t next = mask | (1ULL << i);
            phi[static_cast<std::size_t>(i)] += v(next) - v(mask);
            mask = next;
        }
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& p : phi) p /= static_cast<double>(count);
    return phi;
}

}  // namespace xfid
