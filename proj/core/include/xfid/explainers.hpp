#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xfid/dataset.hpp"
#include "xfid/matrix.hpp"

namespace xfid {

/// Explainers see the model only through this callable.
using BlackBox = std::function<double(std::span<const double>)>;

enum class PayloadKind {
    SurrogateCoefficients,  // per-sample (theta_0, theta) in z-score space
    ShapleyAttributions,    // per-sample per-feature phi_i with base value
    PdValues,               // per-sample per-feature PD curve evaluations
};

const char* payload_kind_name(PayloadKind kind);
PayloadKind payload_kind_from_name(const std::string& name);

/// Raw output of one explainer over a set of explained samples. All three
/// explainers here emit singleton effects (one per feature).
struct Explanation {
    PayloadKind kind{};
    std::vector<std::vector<int>> effects;  // singleton feature subsets
    std::vector<std::size_t> samples;       // explained dataset row indices
    Matrix payload;                         // |effects| x |samples|
    std::vector<double> intercepts;         // theta_0 (lime) / base value (shap)
    std::vector<double> mu, sigma;          // z-score snapshots (lime)
    std::vector<double> pd_mean;            // dataset mean of each PD curve (pdp)
    long dropped_evals = 0;
    long coalitions = 0;
};

std::string explanation_to_json(const Explanation& e);
Explanation explanation_from_json(const std::string& text);

// ---- PDP -------------------------------------------------------------

/// Per-feature partial-dependence curves on a 100-point percentile grid.
struct PdCurves {
    Matrix grid_x;  // d x 100
    Matrix grid_y;  // d x 100
    long dropped_evals = 0;
};

PdCurves compute_pd_curves(const BlackBox& model, const Matrix& X, int grid_points = 100);

/// Piecewise-linear interpolation with two-point linear extrapolation
/// outside the grid range.
double pd_interpolate(std::span<const double> grid_x, std::span<const double> grid_y,
                      double v);

Explanation explain_pdp(const BlackBox& model, const Dataset& data,
                        std::span<const std::size_t> samples);

// ---- LIME-style local surrogate ---------------------------------------

struct LimeOptions {
    int num_samples = 5000;
    double ridge = 1.0;
    double kernel_width_factor = 0.75;  // kappa = factor * sqrt(d)
};

struct LimeFit {
    double theta0 = 0.0;
    std::vector<double> theta;  // z-space coefficients
    long dropped_evals = 0;
};

/// Gaussian neighborhood in z-score space around the dataset distribution,
/// exponential-kernel weights centered at x, weighted ridge fit.
LimeFit lime_fit(const BlackBox& model, const std::vector<FeatureStats>& stats,
                 std::span<const double> x, std::uint64_t seed,
                 const LimeOptions& opts = {});

Explanation explain_lime(const BlackBox& model, const Dataset& data,
                         std::span<const std::size_t> samples, std::uint64_t seed,
                         const LimeOptions& opts = {});

// ---- KernelSHAP --------------------------------------------------------

struct ShapOptions {
    int exact_max_d = 12;  // exact enumeration up to 2^12 - 2 coalitions
    long nsamples = 0;     // sampled mode budget; 0 means 2048 + 2d
    bool force_exact = false;
};

struct ShapFit {
    double base = 0.0;          // v(empty set)
    std::vector<double> phi;    // per-feature attributions
    long dropped_evals = 0;
    long coalitions = 0;
};

/// Feature-independence marginal value function over background rows;
/// Shapley-kernel weighted least squares with the efficiency constraint
/// enforced by variable elimination.
ShapFit kernelshap_fit(const BlackBox& model, std::span<const double> x,
                       const Matrix& background, std::uint64_t seed,
                       const ShapOptions& opts = {});

Explanation explain_kernelshap(const BlackBox& model, const Dataset& data,
                               std::span<const std::size_t> samples,
                               const Matrix& background, std::uint64_t seed,
                               const ShapOptions& opts = {});

/// Brute-force Shapley values by permutation enumeration over the same
/// marginal value function. Exponential; intended for oracle checks (d <= ~8).
std::vector<double> shapley_permutation_oracle(const BlackBox& model,
                                               std::span<const double> x,
                                               const Matrix& background);

}  // namespace xfid
