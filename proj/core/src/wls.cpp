#include "xfid/wls.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "xfid/errors.hpp"

namespace xfid {

std::vector<double> weighted_least_squares(const Matrix& A, std::span<const double> b,
                                           std::span<const double> w, double ridge,
                                           bool unpenalized_col0) {
    const auto p = static_cast<Eigen::Index>(A.rows());
    const auto q = static_cast<Eigen::Index>(A.cols());
    if (p < 1 || q < 1) throw ConfigInvalid("weighted_least_squares: empty system");
    if (b.size() != A.rows() || w.size() != A.rows())
        throw ConfigInvalid("weighted_least_squares: dimension mismatch");

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        Am(A.data().data(), p, q);
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), p);
    Eigen::Map<const Eigen::VectorXd> wm(w.data(), p);

    // Normal equations: (A^T W A + ridge I') theta = A^T W b.
    Eigen::MatrixXd lhs = Am.transpose() * wm.asDiagonal() * Am;
    Eigen::VectorXd rhs = Am.transpose() * (wm.array() * bm.array()).matrix();
    if (ridge > 0.0) {
        for (Eigen::Index j = unpenalized_col0 ? 1 : 0; j < q; ++j) lhs(j, j) += ridge;
    }

    auto try_solve = [&](const Eigen::MatrixXd& m,
                         Eigen::VectorXd& out) -> bool {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        out = ldlt.solve(rhs);
        return out.allFinite();
    };

    Eigen::VectorXd theta;
    if (!try_solve(lhs, theta)) {
        Eigen::MatrixXd jittered = lhs;
        jittered.diagonal().array() += 1e-10;
        if (!try_solve(jittered, theta))
            throw SingularSystem("weighted_least_squares: factorization failed");
    }
    return {theta.data(), theta.data() + q};
}

}  // namespace xfid
