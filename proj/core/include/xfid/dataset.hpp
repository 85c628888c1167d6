#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xfid/matrix.hpp"

namespace xfid {

struct FeatureStats {
    double mean = 0.0;
    double stddev = 0.0;  // population convention (divide by n)
    double q1 = 0.0;
    double q3 = 0.0;
};

struct Dataset {
    Matrix X;
    std::vector<FeatureStats> stats;

    std::size_t n() const { return X.rows(); }
    std::size_t d() const { return X.cols(); }
};

/// Linear-interpolation quantile at position (n-1)*q of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q);

std::vector<FeatureStats> compute_stats(const Matrix& X);

/// n = ceil(500*sqrt(d)) i.i.d. U(-1,1) samples, deterministic per seed.
Dataset sample_dataset(int d, std::uint64_t seed);

/// Lloyd's k-means: seeded initialization from random distinct rows,
/// max 100 iterations, tolerance 1e-6 on centroid shift. Returns k x d
/// centroids. Emptied clusters keep their previous centroid.
Matrix summarize_background(const Matrix& X, int k, std::uint64_t seed);

/// Sum over rows of squared distance to the nearest centroid.
double kmeans_inertia(const Matrix& X, const Matrix& centroids);

/// CSV, row-major, 17-significant-digit floats (lossless round-trip).
std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(const std::string& text);

/// Lossless float-to-text used everywhere a double is persisted.
std::string format_double(double v);

}  // namespace xfid
