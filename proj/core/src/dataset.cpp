#include "xfid/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "xfid/errors.hpp"
#include "xfid/rng.hpp"

namespace xfid {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<FeatureStats> compute_stats(const Matrix& X) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    std::vector<FeatureStats> stats(d);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < d; ++i) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            col[r] = X.at(r, i);
            sum += col[r];
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dlt = col[r] - mean;
            ss += dlt * dlt;
        }
        std::sort(col.begin(), col.end());
        stats[i].mean = mean;
        stats[i].stddev = std::sqrt(ss / static_cast<double>(n));
        stats[i].q1 = quantile_sorted(col, 0.25);
        stats[i].q3 = quantile_sorted(col, 0.75);
    }
    return stats;
}

Dataset sample_dataset(int d, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(
        std::ceil(500.0 * std::sqrt(static_cast<double>(d))));
    Rng rng(seed);
    Dataset ds;
    ds.X = Matrix(n, static_cast<std::size_t>(d));
    for (std::size_t r = 0; r < n; ++r)
        for (int i = 0; i < d; ++i) ds.X.at(r, static_cast<std::size_t>(i)) = rng.uniform(-1.0, 1.0);
    // Degenerate columns (zero spread) are resampled; with continuous
    // uniforms this is unreachable in practice but keeps stddev > 0 a hard
    // guarantee for the z-score consumers.
    for (int i = 0; i < d && n >= 2; ++i) {
        bool degenerate = true;
        for (std::size_t r = 1; r < n && degenerate; ++r)
            degenerate = ds.X.at(r, static_cast<std::size_t>(i)) ==
                         ds.X.at(0, static_cast<std::size_t>(i));
        while (degenerate) {
            for (std::size_t r = 0; r < n; ++r)
                ds.X.at(r, static_cast<std::size_t>(i)) = rng.uniform(-1.0, 1.0);
            degenerate = false;
            for (std::size_t r = 1; r < n && !degenerate; ++r)
                degenerate = ds.X.at(r, static_cast<std::size_t>(i)) ==
                             ds.X.at(0, static_cast<std::size_t>(i));
        }
    }
    ds.stats = compute_stats(ds.X);
    return ds;
}

namespace {

std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> row) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        double dist = 0.0;
        const auto cr = centroids.row(c);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double dlt = row[j] - cr[j];
            dist += dlt * dlt;
        }
        if (dist < best_d) {
            best_d = dist;
            best = c;
        }
    }
    return best;
}

}  // namespace

Matrix summarize_background(const Matrix& X, int k, std::uint64_t seed) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    const auto kk = static_cast<std::size_t>(k);
    if (kk > n) throw ConfigInvalid("summarize_background: k exceeds sample count");

    // Init: k distinct random rows.
    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    Matrix centroids(kk, d);
    for (std::size_t c = 0; c < kk; ++c) {
        const auto src = X.row(idx[c]);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }

    std::vector<std::size_t> assign(n, 0);
    std::vector<std::size_t> counts(kk, 0);
    Matrix sums(kk, d);
    for (int iter = 0; iter < 100; ++iter) {
        std::fill(counts.begin(), counts.end(), 0);
        std::fill(sums.data().begin(), sums.data().end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t c = nearest_centroid(centroids, X.row(r));
            assign[r] = c;
            ++counts[c];
            auto srow = sums.row(c);
            const auto xrow = X.row(r);
            for (std::size_t j = 0; j < d; ++j) srow[j] += xrow[j];
        }
        double max_shift = 0.0;
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] == 0) continue;  // keep previous centroid
            double shift = 0.0;
            auto crow = centroids.row(c);
            const auto srow = sums.row(c);
            for (std::size_t j = 0; j < d; ++j) {
                const double nv = srow[j] / static_cast<double>(counts[c]);
                const double dlt = nv - crow[j];
                shift += dlt * dlt;
                crow[j] = nv;
            }
            max_shift = std::max(max_shift, std::sqrt(shift));
        }
        if (max_shift <= 1e-6) break;
    }
    return centroids;
}

double kmeans_inertia(const Matrix& X, const Matrix& centroids) {
    double total = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto row = X.row(r);
        const std::size_t c = nearest_centroid(centroids, row);
        const auto cr = centroids.row(c);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double dlt = row[j] - cr[j];
            total += dlt * dlt;
        }
    }
    return total;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string matrix_to_csv(const Matrix& m) {
    std::string out;
    out.reserve(m.rows() * m.cols() * 20);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c != 0) out += ',';
            out += format_double(m.at(r, c));
        }
        out += '\n';
    }
    return out;
}

Matrix matrix_from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigInvalid("CSV: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    return m;
}

}  // namespace xfid
