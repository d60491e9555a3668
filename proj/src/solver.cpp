#include "lab/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace lab {

namespace {

ResidualClass classify(const Eigen::VectorXd& nu_masses, double tol) {
    const double lo = nu_masses.minCoeff();
    const double hi = nu_masses.maxCoeff();
    const bool sub = lo >= -tol;
    const bool super = hi <= tol;
    if (sub && super) return ResidualClass::solution;
    if (sub) return ResidualClass::subsolution;
    if (super) return ResidualClass::supersolution;
    return ResidualClass::neither;
}

void require_certified_sub(const FormMatrix& form, const Nonlinearity& f,
                           const Eigen::VectorXd& u, const DiscreteMeasure& mu, double tol,
                           const char* who) {
    const auto rd = residual_measure(form, f, u, mu, tol);
    if (rd.classification != ResidualClass::subsolution &&
        rd.classification != ResidualClass::solution)
        throw ValidationError(std::string(who) + ": lower bound is not a certified subsolution");
}

void require_certified_super(const FormMatrix& form, const Nonlinearity& f,
                             const Eigen::VectorXd& u, const DiscreteMeasure& mu, double tol,
                             const char* who) {
    const auto rd = residual_measure(form, f, u, mu, tol);
    if (rd.classification != ResidualClass::supersolution &&
        rd.classification != ResidualClass::solution)
        throw ValidationError(std::string(who) + ": upper bound is not a certified supersolution");
}

}  // namespace

ResidualDecomposition residual_measure(const FormMatrix& form, const Nonlinearity& f,
                                       const Eigen::VectorXd& u, const DiscreteMeasure& mu,
                                       double tol) {
    if (!same_space(*form.space, *mu.space()))
        throw ValidationError("residual_measure: measure lives on a different space");
    if (u.size() != form.size()) throw ValidationError("residual_measure: vector length mismatch");
    const Eigen::VectorXd fu = f.eval(u);
    if (!fu.allFinite()) throw ValidationError("residual_measure: f(.,u) is not finite");

    // nu = mu + f(.,u) m - B u  (node masses)
    const Eigen::VectorXd defect = fu.cwiseProduct(form.space->m) - form.B * u;
    ResidualDecomposition rd;
    rd.nu = DiscreteMeasure(mu.space());
    rd.nu.add_density(defect.cwiseQuotient(form.space->m));
    rd.nu = rd.nu + mu;
    rd.classification = classify(rd.nu.node_masses(), tol);
    return rd;
}

SolveReport solve_fixed_point(const FormMatrix& form, const GreenOperator& g,
                              const Nonlinearity& f, const DiscreteMeasure& mu, double damping,
                              double tol, int max_iter) {
    if (!(damping > 0.0 && damping <= 1.0))
        throw ValidationError("solve_fixed_point: damping must lie in (0, 1]");
    const Eigen::VectorXd masses = mu.node_masses();
    const Eigen::VectorXd r_mu = g.apply_masses(masses);
    const Eigen::VectorXd r_abs = g.apply_masses(masses.cwiseAbs());

    // A-priori box: two rounds of envelope inflation give the Schauder bound
    // |Phi(u)| <= R g + R|mu| on the box the iteration lives in.
    const Eigen::VectorXd g1 = f.envelope(-r_abs, r_abs);
    const Eigen::VectorXd s1 = r_abs + g.apply_density(g1);
    const Eigen::VectorXd g2 = f.envelope(-s1, s1);
    const Eigen::VectorXd bound = r_abs + g.apply_density(g2);
    if (!bound.allFinite())
        throw ValidationError("solve_fixed_point: unbounded envelope on the a-priori box");

    Eigen::VectorXd u = r_mu;
    Eigen::VectorXd best = u;
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::VectorXd phi = g.apply_density(f.eval(u)) + r_mu;
        if ((phi.cwiseAbs() - bound).maxCoeff() > 1e-9 * (1.0 + bound.maxCoeff()))
            throw SolverFailure("solve_fixed_point: iterate left the a-priori box");
        const double res = (u - phi).cwiseAbs().maxCoeff();
        if (res < best_res) {
            best_res = res;
            best = u;
        }
        if (res <= tol) {
            SolveReport rep{u, it, res, apriori_bound_holds(g, f, u, mu), SolveMethod::picard};
            return rep;
        }
        u = (1.0 - damping) * u + damping * phi;
    }
    throw FixedPointFailure("solve_fixed_point: iteration cap exceeded", best, best_res);
}

namespace {

SolveReport monotone_solve(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                           const DiscreteMeasure& mu, const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper, const SolveOptions& opts,
                           bool from_above) {
    const int n = form.size();
    if (lower.size() != n || upper.size() != n)
        throw ValidationError("solve_between: bracket length mismatch");
    const double scale = 1.0 + std::max(lower.cwiseAbs().maxCoeff(), upper.cwiseAbs().maxCoeff());
    if ((lower - upper).maxCoeff() > 1e-12 * scale)
        throw ValidationError("solve_between: bracket violation (lower exceeds upper)");

    const double ctol = std::max(1e-8, 10.0 * opts.tol);
    require_certified_sub(form, f, lower, mu, ctol, "solve_between");
    require_certified_super(form, f, upper, mu, ctol, "solve_between");

    const Eigen::VectorXd masses = mu.node_masses();
    const Eigen::VectorXd r_mu = g.apply_masses(masses);
    const SolveMethod method =
        from_above ? SolveMethod::monotone_from_above : SolveMethod::monotone_from_below;

    auto clamp = [&](const Eigen::VectorXd& v) {
        return v.cwiseMax(lower).cwiseMin(upper).eval();
    };
    auto residual_of = [&](const Eigen::VectorXd& v) {
        return (v - g.apply_density(f.eval(clamp(v))) - r_mu).cwiseAbs().maxCoeff();
    };

    // Degenerate bracket short-circuits before any Lipschitz data is needed.
    if ((upper - lower).cwiseAbs().maxCoeff() <= 1e-14 * scale) {
        SolveReport rep{upper, 1, residual_of(upper), apriori_bound_holds(g, f, upper, mu),
                        method};
        return rep;
    }

    const Eigen::VectorXd lam = f.lipschitz_profile(lower, upper);
    if (!lam.allFinite())
        throw ValidationError("solve_between: one-sided Lipschitz bound unavailable on bracket");

    Eigen::MatrixXd shifted = form.B;
    shifted.diagonal() += lam.cwiseProduct(form.space->m);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
        throw ValidationError("solve_between: shifted system not positive definite");

    Eigen::VectorXd u = from_above ? upper : lower;
    if (opts.start) {
        if (opts.start->size() != n) throw ValidationError("solve_between: bad warm start size");
        u = clamp(*opts.start);
    }

    auto sweep = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd rhs =
            (f.eval(clamp(v)) + lam.cwiseProduct(v)).cwiseProduct(form.space->m) + masses;
        return ldlt.solve(rhs).eval();
    };

    const double mono_tol = 1e-9 * scale;
    {
        // Warm starts must not break the one-sided sweep; fall back to the
        // bracket end if the first step goes the wrong way.
        const Eigen::VectorXd u1 = sweep(u);
        const double drift = from_above ? (u1 - u).maxCoeff() : (u - u1).maxCoeff();
        if (drift > mono_tol) u = from_above ? upper : lower;
    }

    Eigen::VectorXd best = u;
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iter; ++it) {
        const Eigen::VectorXd u_next = sweep(u);
        const double drift = from_above ? (u_next - u).maxCoeff() : (u - u_next).maxCoeff();
        if (drift > mono_tol)
            throw InvariantViolation("solve_between: monotone sweep reversed direction");
        u = u_next;
        const double res = residual_of(u);
        if (res < best_res) {
            best_res = res;
            best = u;
        }
        if (res <= opts.tol) {
            SolveReport rep{clamp(u), it, res, apriori_bound_holds(g, f, clamp(u), mu), method};
            return rep;
        }
    }
    throw FixedPointFailure("solve_between: iteration cap exceeded", best, best_res);
}

}  // namespace

SolveReport solve_between(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                          const DiscreteMeasure& mu, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const SolveOptions& opts) {
    return monotone_solve(form, g, f, mu, lower, upper, opts, true);
}

SolveReport minimal_between(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                            const DiscreteMeasure& mu, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const SolveOptions& opts) {
    return monotone_solve(form, g, f, mu, lower, upper, opts, false);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> canonical_bracket(const GreenOperator& g,
                                                              const DiscreteMeasure& mu) {
    const Eigen::VectorXd masses = mu.node_masses();
    const Eigen::VectorXd plus = masses.cwiseMax(0.0);
    const Eigen::VectorXd minus = (-masses).cwiseMax(0.0);
    return {-g.apply_masses(minus), g.apply_masses(plus)};
}

SolveReport solve_canonical(const FormMatrix& form, const GreenOperator& g, const Nonlinearity& f,
                            const DiscreteMeasure& mu, const SolveOptions& opts) {
    const auto [lower, upper] = canonical_bracket(g, mu);
    return solve_between(form, g, f, mu, lower, upper, opts);
}

SubsolutionMax max_of_subsolutions(const FormMatrix& form, const Nonlinearity& f,
                                   const DiscreteMeasure& mu, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w) {
    require_certified_sub(form, f, u, mu, 1e-8, "max_of_subsolutions");
    require_certified_sub(form, f, w, mu, 1e-8, "max_of_subsolutions");
    SubsolutionMax out;
    out.v = u.cwiseMax(w);
    out.certificate = residual_measure(form, f, out.v, mu, 1e-8);
    const double floor = out.certificate.nu.node_masses().minCoeff();
    if (floor < -1e-10 * (1.0 + out.v.cwiseAbs().maxCoeff()))
        throw InvariantViolation("max_of_subsolutions: re-certification failed");
    return out;
}

bool apriori_bound_holds(const GreenOperator& g, const Nonlinearity& f, const Eigen::VectorXd& u,
                         const DiscreteMeasure& mu, double tol) {
    const Eigen::VectorXd lhs = u.cwiseAbs() + g.apply_density(f.eval(u).cwiseAbs());
    const Eigen::VectorXd rhs = g.apply_masses(mu.node_masses().cwiseAbs());
    return (lhs - rhs).maxCoeff() <= tol;
}

}  // namespace lab
