#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "lab/measure.hpp"
#include "lab/operator_spec.hpp"
#include "lab/state_space.hpp"

namespace lab {

/// Symmetric matrix realization of a Dirichlet form: E(u,v) = u^T B v on
/// L^2(m). The operator acts as (-A u)_i = (B u)_i / m_i. Markov structure:
/// jump rates J(i,j) = -B_ij for i != j, killing kappa_i = sum_j B_ij.
struct FormMatrix {
    SpacePtr space;
    Eigen::MatrixXd B;

    int size() const { return static_cast<int>(B.rows()); }
    Eigen::VectorXd kappa() const { return B.rowwise().sum(); }
    double jump(int i, int j) const { return -B(i, j); }

    /// Off-diagonal entries <= tol, row sums >= -tol. Throws ValidationError.
    void validate_markov(double tol = 1e-12) const;
};

/// Second-order flux discretization of the divergence-form local operator with
/// scalar coefficient a(x) sampled at edge midpoints. The exterior Dirichlet
/// condition contributes killing at boundary-adjacent nodes.
FormMatrix assemble_local(SpacePtr space,
                          const std::function<double(const std::array<double, 2>&)>& a = {});

/// Constant-matrix coefficient variant. Rejects non-symmetric or non-elliptic
/// coefficients; cross terms are not representable by the flux stencil.
FormMatrix assemble_local(SpacePtr space, const Eigen::Matrix2d& a);

/// Jump-kernel discretization B_ij = -m_i m_j a(x_i,x_j) / (|x_i-x_j|^d phi),
/// diagonal closed by the row-sum property plus the analytic exterior tail;
/// the near-diagonal singular cell enters as a nearest-neighbour local
/// correction with coefficient int_{|z|<h} z^2 / (|z|^d phi(|z|)) dz.
FormMatrix assemble_nonlocal(SpacePtr space, const OperatorSpec& spec);

/// Dispatch on spec.kind.
FormMatrix assemble(SpacePtr space, const OperatorSpec& spec);

/// Part of the operator on a node subset: principal submatrix; killing of the
/// removed couplings folds into kappa of the retained nodes. The result lives
/// on the sub-space carved out of the parent.
FormMatrix restrict_form(const FormMatrix& form, const std::vector<int>& nodes);

/// E_nu(u,v) = E(u,v) + int u v dnu for nonnegative nu: adds node masses of nu
/// to the diagonal.
FormMatrix perturb(const FormMatrix& form, const DiscreteMeasure& nu);

struct BeurlingDeny {
    struct JumpEntry {
        int i, j;
        double rate;
    };
    std::vector<JumpEntry> jumps;  // i < j, positive rates
    Eigen::VectorXd kappa;
    FormMatrix resurrected;  // B - diag(kappa)
};

/// Jump/killing decomposition and the resurrected form. Throws on
/// non-Markovian input.
BeurlingDeny beurling_deny(const FormMatrix& form);

}  // namespace lab
