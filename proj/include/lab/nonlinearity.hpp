#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lab/state_space.hpp"

namespace lab {

/// Caratheodory right-hand side f(x, y) under the sign condition
/// f(x, y) y <= 0, with the envelope and one-sided Lipschitz metadata the
/// monotone iteration needs. Values are immutable; evaluation is pure.
class Nonlinearity {
public:
    using Eval = std::function<double(int node, double y)>;
    using IntervalFn = std::function<double(int node, double lo, double hi)>;

    /// f = -c(x) |y|^{p-1} y.
    static Nonlinearity power(SpacePtr space, double p, Eigen::VectorXd c);
    static Nonlinearity power(SpacePtr space, double p, double c = 1.0);
    /// Asymmetric absorption: -c_plus(x) y^p for y >= 0, +c_minus(x) |y|^p below.
    static Nonlinearity power_asym(SpacePtr space, double p, Eigen::VectorXd c_plus,
                                   Eigen::VectorXd c_minus);
    /// f = -sign(y) (e^{|y|} - 1).
    static Nonlinearity exponential(SpacePtr space);
    /// f = -g(x) shape(y) with |shape| <= 1 monotone odd-ish shape (tanh).
    static Nonlinearity bounded(SpacePtr space, Eigen::VectorXd g,
                                std::function<double(double)> shape = {}, double shape_lip = 1.0,
                                std::string shape_name = "tanh");
    /// Piecewise-linear table (y_k, f_k); evaluation outside the table range is
    /// rejected rather than extrapolated.
    static Nonlinearity tabulated(SpacePtr space, std::vector<std::pair<double, double>> table);
    static Nonlinearity zero(SpacePtr space);
    /// Arbitrary evaluator; interval metadata may be supplied or is estimated
    /// by sampling.
    static Nonlinearity custom(SpacePtr space, Eval eval, IntervalFn lipschitz = {},
                               IntervalFn envelope = {}, std::string name = "custom");

    double operator()(int node, double y) const { return eval_(node, y); }
    Eigen::VectorXd eval(const Eigen::VectorXd& u) const;

    /// g_i = sup_{y in [lo_i, hi_i]} |f(x_i, y)|. Throws on bracket violation.
    Eigen::VectorXd envelope(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;

    /// Per-node lambda_i with f(x_i, .) + lambda_i id nondecreasing on [lo_i, hi_i].
    Eigen::VectorXd lipschitz_profile(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;
    double one_sided_lipschitz(int node, double lo, double hi) const { return lip_(node, lo, hi); }

    Nonlinearity truncate_below(double n, const Eigen::VectorXd& phi) const;  // f v (-n phi)
    Nonlinearity truncate_above(double n, const Eigen::VectorXd& phi) const;  // f ^ (n phi)
    Nonlinearity reflect() const;  // -f(x, -y)
    Nonlinearity scaled(double factor) const;

    const SpacePtr& space() const { return space_; }
    const std::string& family() const { return family_; }

private:
    SpacePtr space_;
    std::string family_;
    Eval eval_;
    IntervalFn lip_;
    IntervalFn env_;

    Nonlinearity(SpacePtr space, std::string family, Eval eval, IntervalFn lip, IntervalFn env)
        : space_(std::move(space)),
          family_(std::move(family)),
          eval_(std::move(eval)),
          lip_(std::move(lip)),
          env_(std::move(env)) {}
};

struct SamplePlan {
    double y_max = 8.0;
    int y_samples = 129;                           // odd, symmetric about 0
    std::vector<double> M_values = {1.0, 2.0, 4.0};
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> bracket;  // for Int)
};

struct ConditionWitness {
    int node = 0;
    double y = 0.0;
    double value = 0.0;
};

struct ConditionReport {
    bool car_ok = true;
    bool sig_ok = true;
    bool m_ok = true;
    bool int_ok = true;
    bool qm_ok = true;  // implied by finiteness of the space, reported as such
    std::vector<std::pair<double, double>> m_norms;  // (M, L1(rho m) envelope norm)
    double int_norm = 0.0;
    std::optional<ConditionWitness> sig_witness;
    std::optional<ConditionWitness> car_witness;
};

/// Structural condition checks: sign condition pointwise on the sample grid,
/// continuity by interval shrinking at the worst jump, the M-envelope norms
/// against rho m, and the bracket envelope when one is supplied.
ConditionReport validate(const Nonlinearity& f, const Eigen::VectorXd& rho,
                         const SamplePlan& plan = {});

}  // namespace lab
