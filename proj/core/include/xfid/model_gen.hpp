#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xfid/expr.hpp"

namespace xfid {

struct GenParams {
    int d = 2;
    int n_dummy = 0;
    double pct_nonlinear = 0.0;
    double pct_interact = 0.0;  // in [0, 0.5]
    int order_interact = 1;
    std::uint64_t seed = 0;
};

void validate_params(const GenParams& params);

/// Compact parameter tag used for directories and model ids,
/// e.g. "d4_nd0_nl0.375_pi0.5_oi2".
std::string param_tag(const GenParams& params);

/// Random feature-additive model. Four phases in order: nonlinear main
/// effects, linear main effects, nonlinear interaction effects, linear
/// interaction effects. Fully deterministic given params.seed; rejected
/// candidates (domain failures on a stratified probe grid) are retried with
/// a per-round seed offset up to `max_rounds` times.
AdditiveModel generate_model(const GenParams& params, int max_rounds = 50);

/// Same retry loop, but candidates must additionally be finite on the given
/// sample matrix (the dataset the model will be explained on).
AdditiveModel generate_model_validated(const GenParams& params, const Matrix& samples,
                                       int max_rounds = 50);

/// Stratified U(-1,1) probe matrix used for domain validation:
/// 10*d rows, each feature column covering [-1,1] by jittered strata.
Matrix probe_grid(int d, std::uint64_t seed);

/// Near-uniform integer binning: `total` items into `bins` bins, remainders
/// assigned to the lowest-indexed bins.
std::vector<int> uniform_bins(int total, int bins);

/// Full parameter grid (cross product with the order=1 <=> pct_interact=0
/// coupling; fractional dummy counts rounded down).
std::vector<GenParams> parameter_grid();

}  // namespace xfid
