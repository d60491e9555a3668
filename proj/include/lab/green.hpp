#pragma once

#include <Eigen/Core>

#include "lab/form.hpp"
#include "lab/measure.hpp"

namespace lab {

/// Green kernel w.r.t. m: (R f)_i = sum_j G_ij f_j m_j inverts the operator
/// (-A u)_i = (B u)_i / m_i, i.e. G = B^{-1} in matrix form.
struct GreenOperator {
    SpacePtr space;
    Eigen::MatrixXd G;

    /// R f for a density f (function against m).
    Eigen::VectorXd apply_density(const Eigen::VectorXd& f) const {
        return G * f.cwiseProduct(space->m);
    }
    /// Potential of raw node masses.
    Eigen::VectorXd apply_masses(const Eigen::VectorXd& masses) const { return G * masses; }
};

/// Exact dense inverse with transience and Markov checks. Throws
/// ValidationError("form not transient") on singular or indefinite forms and
/// on condition numbers beyond 1e12; negative kernel entries beyond -1e-10
/// are a Markov violation.
GreenOperator green(const FormMatrix& form);

/// R_alpha g: solves (B + alpha diag(m)) u = m .* g. alpha = 0 requires a
/// transient form.
Eigen::VectorXd resolvent(const FormMatrix& form, double alpha, const Eigen::VectorXd& g);

/// R mu = G * (node masses of mu).
Eigen::VectorXd apply_green(const GreenOperator& g, const DiscreteMeasure& mu);

}  // namespace lab
