#include "lab/weights.hpp"

#include <Eigen/Eigenvalues>

#include "lab/errors.hpp"

namespace lab {

WeightPair weights(const FormMatrix& form, RhoSource source, const GreenOperator& g,
                   const std::optional<Eigen::VectorXd>& user_rho) {
    const int n = form.size();
    WeightPair w;
    w.source = source;

    switch (source) {
        case RhoSource::constant:
            w.rho = Eigen::VectorXd::Ones(n);
            break;
        case RhoSource::principal_eigenfunction: {
            // Generalized problem B v = lambda diag(m) v; the ground state of a
            // transient Markov form is signed-definite (Perron-Frobenius).
            const Eigen::VectorXd s = form.space->m.cwiseSqrt();
            const Eigen::MatrixXd Bs =
                s.cwiseInverse().asDiagonal() * form.B * s.cwiseInverse().asDiagonal();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bs);
            if (es.info() != Eigen::Success)
                throw SolverFailure("weights: eigensolver did not converge");
            Eigen::VectorXd v = es.eigenvectors().col(0).cwiseQuotient(s);
            if (v.sum() < 0.0) v = -v;
            if (v.minCoeff() <= 0.0)
                throw ValidationError("weights: principal eigenfunction is not strictly positive");
            w.rho = v / v.maxCoeff();
            break;
        }
        case RhoSource::user:
            if (!user_rho) throw ValidationError("weights: user rho not supplied");
            if (user_rho->size() != n) throw ValidationError("weights: rho length mismatch");
            w.rho = *user_rho;
            break;
    }

    if (w.rho.minCoeff() <= 0.0) throw ValidationError("weights: rho must be strictly positive");
    const Eigen::VectorXd excess = form.B * w.rho;
    if (excess.minCoeff() < -1e-12 * std::max(1.0, w.rho.maxCoeff()))
        throw ValidationError("weights: rho is not excessive (B rho has a negative entry)");

    const Eigen::VectorXd r_rho = g.apply_density(w.rho);
    double c = 1.0;
    for (int i = 0; i < n; ++i)
        if (r_rho[i] > 0.0) c = std::min(c, w.rho[i] / r_rho[i]);
    if (!(c > 0.0)) throw InvariantViolation("weights: no positive varrho multiple exists");
    w.varrho = c * w.rho;

    const Eigen::VectorXd check = g.apply_density(w.varrho) - w.rho;
    if (check.maxCoeff() > 1e-12 * std::max(1.0, w.rho.maxCoeff()))
        throw InvariantViolation("weights: R varrho exceeds rho");
    return w;
}

}  // namespace lab
