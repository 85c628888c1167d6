#include <algorithm>
#include <cmath>
#include <vector>

#include "xfid/errors.hpp"
#include "xfid/explainers.hpp"

namespace xfid {

PdCurves compute_pd_curves(const BlackBox& model, const Matrix& X, int grid_points) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    const auto g = static_cast<std::size_t>(grid_points);
    PdCurves curves;
    curves.grid_x = Matrix(d, g);
    curves.grid_y = Matrix(d, g);

    std::vector<double> col(n);
    std::vector<double> probe(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t r = 0; r < n; ++r) col[r] = X.at(r, i);
        std::sort(col.begin(), col.end());
        // Equally spaced percentiles of the feature's sample distribution.
        for (std::size_t t = 0; t < g; ++t)
            curves.grid_x.at(i, t) =
                quantile_sorted(col, static_cast<double>(t) / static_cast<double>(g - 1));
        for (std::size_t t = 0; t < g; ++t) {
            const double v = curves.grid_x.at(i, t);
            double sum = 0.0;
            std::size_t valid = 0;
            for (std::size_t r = 0; r < n; ++r) {
                const auto row = X.row(r);
                std::copy(row.begin(), row.end(), probe.begin());
                probe[i] = v;
                const double y = model(probe);
                if (std::isfinite(y)) {
                    sum += y;
                    ++valid;
                } else {
                    ++curves.dropped_evals;
                }
            }
            if (valid * 2 < n)
                throw DegeneratePD("pdp: > 50% non-finite evaluations for feature " +
                                   std::to_string(i) + " at grid point " + std::to_string(t));
            curves.grid_y.at(i, t) = sum / static_cast<double>(valid);
        }
    }
    return curves;
}

double pd_interpolate(std::span<const double> grid_x, std::span<const double> grid_y,
                      double v) {
    const std::size_t g = grid_x.size();
    if (g == 1) return grid_y[0];

    // Segment endpoints; equal grid knots (tied percentiles) are skipped so
    // the slope stays finite.
    auto segment = [&](std::size_t lo0) -> double {
        std::size_t lo = lo0;
        std::size_t hi = lo + 1;
        while (hi < g - 1 && grid_x[hi] == grid_x[lo]) ++hi;
        while (lo > 0 && grid_x[hi] == grid_x[lo]) --lo;
        if (grid_x[hi] == grid_x[lo]) return grid_y[lo];
        const double t = (v - grid_x[lo]) / (grid_x[hi] - grid_x[lo]);
        return grid_y[lo] + t * (grid_y[hi] - grid_y[lo]);
    };

    if (v <= grid_x[0]) return segment(0);           // linear extrapolation below
    if (v >= grid_x[g - 1]) return segment(g - 2);   // and above
    const auto it = std::upper_bound(grid_x.begin(), grid_x.end(), v);
    const auto hi = static_cast<std::size_t>(it - grid_x.begin());
    return segment(hi - 1);
}

Explanation explain_pdp(const BlackBox& model, const Dataset& data,
                        std::span<const std::size_t> samples) {
    const std::size_t d = data.d();
    const std::size_t n = data.n();
    const PdCurves curves = compute_pd_curves(model, data.X);

    Explanation e;
    e.kind = PayloadKind::PdValues;
    for (std::size_t i = 0; i < d; ++i) e.effects.push_back({static_cast<int>(i)});
    e.samples.assign(samples.begin(), samples.end());
    e.payload = Matrix(d, samples.size());
    e.pd_mean.assign(d, 0.0);
    e.dropped_evals = curves.dropped_evals;

    for (std::size_t i = 0; i < d; ++i) {
        const auto gx = curves.grid_x.row(i);
        const auto gy = curves.grid_y.row(i);
        for (std::size_t t = 0; t < samples.size(); ++t)
            e.payload.at(i, t) = pd_interpolate(gx, gy, data.X.at(samples[t], i));
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            sum += pd_interpolate(gx, gy, data.X.at(r, i));
        e.pd_mean[i] = sum / static_cast<double>(n);
    }
    return e;
}

}  // namespace xfid
