#pragma once

#include <Eigen/Core>
#include <utility>

#include "lab/errors.hpp"
#include "lab/form.hpp"
#include "lab/green.hpp"
#include "lab/measure.hpp"
#include "lab/nonlinearity.hpp"

namespace lab {

enum class SolveMethod { picard, monotone_from_above, monotone_from_below };

struct SolveReport {
    Eigen::VectorXd u;
    int iterations = 0;
    double final_residual = 0.0;  // ||u - R f(.,u) - R mu||_inf
    bool apriori_ok = false;      // |u| + R|f(.,u)| <= R|mu| + 1e-8 componentwise
    SolveMethod method = SolveMethod::picard;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 100000;
    double damping = 0.5;
    /// Optional warm start for the monotone methods; must dominate (resp. be
    /// dominated by) the target solution. Falls back to the bracket end when
    /// the first sweep breaks monotonicity.
    const Eigen::VectorXd* start = nullptr;
};

enum class ResidualClass { subsolution, supersolution, solution, neither };

/// Signed residual of a solution candidate: -A u - f(.,u) - mu = -nu, so a
/// nonnegative nu certifies a subsolution and a nonpositive one a
/// supersolution.
struct ResidualDecomposition {
    DiscreteMeasure nu;
    ResidualClass classification = ResidualClass::neither;
};

/// Iteration budget exhausted; carries the best iterate so callers can switch
/// method.
class FixedPointFailure : public SolverFailure {
public:
    FixedPointFailure(const std::string& what, Eigen::VectorXd best, double residual)
        : SolverFailure(what), best_iterate(std::move(best)), best_residual(residual) {}
    Eigen::VectorXd best_iterate;
    double best_residual;
};

ResidualDecomposition residual_measure(const FormMatrix& form, const Nonlinearity& f,
                                       const Eigen::VectorXd& u, const DiscreteMeasure& mu,
                                       double tol = 1e-10);

/// Damped Picard iteration u <- (1-theta) u + theta (R f(.,u) + R mu) from
/// u0 = R mu, with the Schauder bound asserted every sweep.
SolveReport solve_fixed_point(const FormMatrix& form, const GreenOperator& g,
                              const Nonlinearity& f, const DiscreteMeasure& mu, double damping,
                              double tol, int max_iter = 100000);

/// Maximal solution between a certified subsolution and supersolution via the
/// lambda-shift monotone iteration started at the supersolution. The iterate
/// sequence is componentwise nonincreasing (asserted in-loop).
SolveReport solve_between(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                          const DiscreteMeasure& mu, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const SolveOptions& opts = {});

/// Minimal solution: the same iteration started at the subsolution.
SolveReport minimal_between(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                            const DiscreteMeasure& mu, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const SolveOptions& opts = {});

/// [-R mu^-, R mu^+]: a certified bracket for every sign-condition
/// nonlinearity.
std::pair<Eigen::VectorXd, Eigen::VectorXd> canonical_bracket(const GreenOperator& g,
                                                              const DiscreteMeasure& mu);

/// Maximal solution over the canonical bracket.
SolveReport solve_canonical(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                            const DiscreteMeasure& mu, const SolveOptions& opts = {});

struct SubsolutionMax {
    Eigen::VectorXd v;  // componentwise max
    ResidualDecomposition certificate;
};

/// Componentwise max of two certified subsolutions; re-certification is an
/// invariant (bug trap on failure).
SubsolutionMax max_of_subsolutions(const FormMatrix& form, const Nonlinearity& f,
                                   const DiscreteMeasure& mu, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w);

/// Componentwise a-priori bound |u| + R|f(.,u)| <= R|mu| + tol.
bool apriori_bound_holds(const GreenOperator& g, const Nonlinearity& f, const Eigen::VectorXd& u,
                         const DiscreteMeasure& mu, double tol = 1e-8);

}  // namespace lab
