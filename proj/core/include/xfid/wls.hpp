#pragma once

#include <span>
#include <vector>

#include "xfid/matrix.hpp"

namespace xfid {

/// argmin_theta sum_s w_s (A_s . theta - b_s)^2 + ridge * ||theta_penalized||^2.
/// When `unpenalized_col0` is set, column 0 (the intercept) is excluded from
/// the ridge term. Solved via normal equations with an SPD factorization;
/// 1e-10 diagonal jitter is added only if the factorization fails. Throws
/// SingularSystem if it fails even with jitter.
std::vector<double> weighted_least_squares(const Matrix& A, std::span<const double> b,
                                           std::span<const double> w, double ridge,
                                           bool unpenalized_col0 = false);

}  // namespace xfid
