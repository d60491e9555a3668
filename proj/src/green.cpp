#include "lab/green.hpp"

#include <Eigen/Cholesky>

#include "lab/errors.hpp"

namespace lab {

GreenOperator green(const FormMatrix& form) {
    const int n = form.size();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(form.B);
    if (ldlt.info() != Eigen::Success) throw ValidationError("form not transient");
    const Eigen::VectorXd D = ldlt.vectorD();
    const double dmax = D.maxCoeff();
    const double dmin = D.minCoeff();
    if (!(dmin > 0.0) || dmax / dmin > 1e12) throw ValidationError("form not transient");

    GreenOperator g{form.space, ldlt.solve(Eigen::MatrixXd::Identity(n, n))};
    g.G = 0.5 * (g.G + g.G.transpose().eval());  // restore exact symmetry
    if (g.G.minCoeff() < -1e-10) throw ValidationError("Markov violation: negative Green entry");
    return g;
}

Eigen::VectorXd resolvent(const FormMatrix& form, double alpha, const Eigen::VectorXd& g) {
    if (alpha < 0.0) throw ValidationError("resolvent: alpha must be nonnegative");
    if (g.size() != form.size()) throw ValidationError("resolvent: rhs length mismatch");
    Eigen::MatrixXd M = form.B;
    M.diagonal() += alpha * form.space->m;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
        if (alpha == 0.0) throw ValidationError("form not transient");
        throw ValidationError("resolvent: system not positive definite");
    }
    return ldlt.solve(g.cwiseProduct(form.space->m).eval());
}

Eigen::VectorXd apply_green(const GreenOperator& g, const DiscreteMeasure& mu) {
    if (!same_space(*g.space, *mu.space()))
        throw ValidationError("apply_green: measure lives on a different space");
    return g.apply_masses(mu.node_masses());
}

}  // namespace lab
