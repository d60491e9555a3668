#include "lab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lab/errors.hpp"

namespace lab {

namespace {
double absmax(double lo, double hi) { return std::max(std::abs(lo), std::abs(hi)); }
}  // namespace

Nonlinearity Nonlinearity::power(SpacePtr space, double p, Eigen::VectorXd c) {
    if (!(p > 0.0)) throw ValidationError("power nonlinearity: exponent must be positive");
    if (c.size() != space->size()) throw ValidationError("power nonlinearity: c length mismatch");
    if (c.minCoeff() < 0.0) throw ValidationError("power nonlinearity: c must be nonnegative");
    auto cs = std::make_shared<Eigen::VectorXd>(std::move(c));
    return Nonlinearity(
        space, "power",
        [cs, p](int i, double y) { return -(*cs)[i] * std::pow(std::abs(y), p - 1.0) * y; },
        [cs, p](int i, double lo, double hi) {
            const double m = absmax(lo, hi);
            if (p < 1.0 && lo <= 0.0 && hi >= 0.0)
                return std::numeric_limits<double>::infinity();
            return p * (*cs)[i] * std::pow(m, p - 1.0);
        },
        [cs, p](int i, double lo, double hi) { return (*cs)[i] * std::pow(absmax(lo, hi), p); });
}

Nonlinearity Nonlinearity::power(SpacePtr space, double p, double c) {
    const int n = space->size();
    return power(std::move(space), p, Eigen::VectorXd::Constant(n, c));
}

Nonlinearity Nonlinearity::power_asym(SpacePtr space, double p, Eigen::VectorXd c_plus,
                                      Eigen::VectorXd c_minus) {
    if (!(p > 0.0)) throw ValidationError("power nonlinearity: exponent must be positive");
    if (c_plus.size() != space->size() || c_minus.size() != space->size())
        throw ValidationError("power nonlinearity: coefficient length mismatch");
    if (c_plus.minCoeff() < 0.0 || c_minus.minCoeff() < 0.0)
        throw ValidationError("power nonlinearity: coefficients must be nonnegative");
    auto cp = std::make_shared<Eigen::VectorXd>(std::move(c_plus));
    auto cm = std::make_shared<Eigen::VectorXd>(std::move(c_minus));
    return Nonlinearity(
        space, "power_asym",
        [cp, cm, p](int i, double y) {
            return y >= 0.0 ? -(*cp)[i] * std::pow(y, p) : (*cm)[i] * std::pow(-y, p);
        },
        [cp, cm, p](int i, double lo, double hi) {
            if (p < 1.0 && lo <= 0.0 && hi >= 0.0)
                return std::numeric_limits<double>::infinity();
            const double up = p * (*cp)[i] * std::pow(std::max(hi, 0.0), p - 1.0);
            const double dn = p * (*cm)[i] * std::pow(std::max(-lo, 0.0), p - 1.0);
            return std::max(up, dn);
        },
        [cp, cm, p](int i, double lo, double hi) {
            const double up = (*cp)[i] * std::pow(std::max(hi, 0.0), p);
            const double dn = (*cm)[i] * std::pow(std::max(-lo, 0.0), p);
            return std::max(up, dn);
        });
}

Nonlinearity Nonlinearity::exponential(SpacePtr space) {
    return Nonlinearity(
        space, "exp",
        [](int, double y) {
            const double mag = std::expm1(std::abs(y));
            return y >= 0.0 ? -mag : mag;
        },
        [](int, double lo, double hi) { return std::exp(absmax(lo, hi)); },
        [](int, double lo, double hi) { return std::expm1(absmax(lo, hi)); });
}

Nonlinearity Nonlinearity::bounded(SpacePtr space, Eigen::VectorXd g,
                                   std::function<double(double)> shape, double shape_lip,
                                   std::string shape_name) {
    if (g.size() != space->size()) throw ValidationError("bounded nonlinearity: g length mismatch");
    if (g.minCoeff() < 0.0) throw ValidationError("bounded nonlinearity: g must be nonnegative");
    if (!shape) shape = [](double y) { return std::tanh(y); };
    auto gs = std::make_shared<Eigen::VectorXd>(std::move(g));
    auto sh = std::make_shared<std::function<double(double)>>(std::move(shape));
    return Nonlinearity(
        space, "bounded(" + shape_name + ")",
        [gs, sh](int i, double y) { return -(*gs)[i] * (*sh)(y); },
        [gs, shape_lip](int i, double, double) { return (*gs)[i] * shape_lip; },
        [gs, sh](int i, double lo, double hi) {
            return (*gs)[i] * std::max(std::abs((*sh)(lo)), std::abs((*sh)(hi)));
        });
}

Nonlinearity Nonlinearity::tabulated(SpacePtr space,
                                     std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw ValidationError("tabulated nonlinearity: need at least 2 knots");
    std::sort(table.begin(), table.end());
    for (size_t k = 1; k < table.size(); ++k)
        if (!(table[k].first > table[k - 1].first))
            throw ValidationError("tabulated nonlinearity: duplicate knot");
    auto tab = std::make_shared<std::vector<std::pair<double, double>>>(std::move(table));

    auto eval_at = [tab](double y) {
        const auto& t = *tab;
        if (y < t.front().first || y > t.back().first)
            throw ValidationError("tabulated nonlinearity evaluated outside its table range");
        auto it = std::lower_bound(t.begin(), t.end(), std::make_pair(y, -1e300));
        if (it == t.begin()) return it->second;
        const auto [y1, f1] = *(it - 1);
        const auto [y2, f2] = *it;
        return f1 + (f2 - f1) * (y - y1) / (y2 - y1);
    };
    auto check_range = [tab](double lo, double hi) {
        if (lo < tab->front().first || hi > tab->back().first)
            throw ValidationError("tabulated nonlinearity does not cover the requested range");
    };

    return Nonlinearity(
        space, "tabulated", [eval_at](int, double y) { return eval_at(y); },
        [tab, check_range](int, double lo, double hi) {
            check_range(lo, hi);
            // max decrease rate over segments intersecting [lo, hi]
            double lam = 0.0;
            const auto& t = *tab;
            for (size_t k = 1; k < t.size(); ++k) {
                if (t[k].first < lo || t[k - 1].first > hi) continue;
                lam = std::max(lam, -(t[k].second - t[k - 1].second) /
                                        (t[k].first - t[k - 1].first));
            }
            return lam;
        },
        [tab, eval_at, check_range](int, double lo, double hi) {
            check_range(lo, hi);
            // piecewise linear: extrema at knots and interval ends
            double g = std::max(std::abs(eval_at(lo)), std::abs(eval_at(hi)));
            for (const auto& [y, f] : *tab)
                if (y >= lo && y <= hi) g = std::max(g, std::abs(f));
            return g;
        });
}

Nonlinearity Nonlinearity::zero(SpacePtr space) {
    return Nonlinearity(
        space, "zero", [](int, double) { return 0.0; }, [](int, double, double) { return 0.0; },
        [](int, double, double) { return 0.0; });
}

Nonlinearity Nonlinearity::custom(SpacePtr space, Eval eval, IntervalFn lipschitz,
                                  IntervalFn envelope, std::string name) {
    auto ev = std::make_shared<Eval>(std::move(eval));
    if (!lipschitz) {
        // sampled estimate with a safety margin
        lipschitz = [ev](int i, double lo, double hi) {
            const int k = 512;
            double lam = 0.0;
            for (int j = 0; j < k; ++j) {
                const double y0 = lo + (hi - lo) * j / k;
                const double y1 = lo + (hi - lo) * (j + 1) / k;
                lam = std::max(lam, -((*ev)(i, y1) - (*ev)(i, y0)) / (y1 - y0));
            }
            return 1.5 * lam;
        };
    }
    if (!envelope) {
        envelope = [ev](int i, double lo, double hi) {
            const int k = 512;
            double g = 0.0;
            for (int j = 0; j <= k; ++j)
                g = std::max(g, std::abs((*ev)(i, lo + (hi - lo) * j / k)));
            return 1.25 * g;
        };
    }
    return Nonlinearity(
        space, std::move(name), [ev](int i, double y) { return (*ev)(i, y); },
        std::move(lipschitz), std::move(envelope));
}

Eigen::VectorXd Nonlinearity::eval(const Eigen::VectorXd& u) const {
    if (u.size() != space_->size()) throw ValidationError("nonlinearity: vector length mismatch");
    Eigen::VectorXd out(u.size());
    for (int i = 0; i < u.size(); ++i) out[i] = eval_(i, u[i]);
    return out;
}

Eigen::VectorXd Nonlinearity::envelope(const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi) const {
    if (lo.size() != space_->size() || hi.size() != space_->size())
        throw ValidationError("envelope: vector length mismatch");
    Eigen::VectorXd g(lo.size());
    for (int i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) throw ValidationError("envelope: bracket violation");
        g[i] = env_(i, lo[i], hi[i]);
    }
    return g;
}

Eigen::VectorXd Nonlinearity::lipschitz_profile(const Eigen::VectorXd& lo,
                                                const Eigen::VectorXd& hi) const {
    if (lo.size() != space_->size() || hi.size() != space_->size())
        throw ValidationError("lipschitz_profile: vector length mismatch");
    Eigen::VectorXd lam(lo.size());
    for (int i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) throw ValidationError("lipschitz_profile: bracket violation");
        lam[i] = lip_(i, lo[i], hi[i]);
    }
    return lam;
}

Nonlinearity Nonlinearity::truncate_below(double n, const Eigen::VectorXd& phi) const {
    if (n < 0.0) throw ValidationError("truncate: level must be nonnegative");
    if (phi.size() != space_->size() || phi.minCoeff() <= 0.0)
        throw ValidationError("truncate: weight must be strictly positive");
    auto ph = std::make_shared<Eigen::VectorXd>(phi);
    auto base_eval = eval_;
    auto base_lip = lip_;
    auto base_env = env_;
    // max(f, c) + lambda id inherits monotonicity from f + lambda id, and
    // |max(f, c)| <= |f| wherever c <= 0, so the base envelope stays valid.
    return Nonlinearity(
        space_, "max(-n*phi," + family_ + ")",
        [base_eval, ph, n](int i, double y) { return std::max(base_eval(i, y), -n * (*ph)[i]); },
        base_lip, base_env);
}

Nonlinearity Nonlinearity::truncate_above(double n, const Eigen::VectorXd& phi) const {
    if (n < 0.0) throw ValidationError("truncate: level must be nonnegative");
    if (phi.size() != space_->size() || phi.minCoeff() <= 0.0)
        throw ValidationError("truncate: weight must be strictly positive");
    auto ph = std::make_shared<Eigen::VectorXd>(phi);
    auto base_eval = eval_;
    auto base_lip = lip_;
    auto base_env = env_;
    return Nonlinearity(
        space_, "min(n*phi," + family_ + ")",
        [base_eval, ph, n](int i, double y) { return std::min(base_eval(i, y), n * (*ph)[i]); },
        base_lip, base_env);
}

Nonlinearity Nonlinearity::reflect() const {
    auto base_eval = eval_;
    auto base_lip = lip_;
    auto base_env = env_;
    return Nonlinearity(
        space_, "reflect(" + family_ + ")",
        [base_eval](int i, double y) { return -base_eval(i, -y); },
        [base_lip](int i, double lo, double hi) { return base_lip(i, -hi, -lo); },
        [base_env](int i, double lo, double hi) { return base_env(i, -hi, -lo); });
}

Nonlinearity Nonlinearity::scaled(double factor) const {
    if (factor < 0.0) throw ValidationError("scaled: factor must be nonnegative");
    auto base_eval = eval_;
    auto base_lip = lip_;
    auto base_env = env_;
    return Nonlinearity(
        space_, family_ + "/scaled",
        [base_eval, factor](int i, double y) { return factor * base_eval(i, y); },
        [base_lip, factor](int i, double lo, double hi) { return factor * base_lip(i, lo, hi); },
        [base_env, factor](int i, double lo, double hi) { return factor * base_env(i, lo, hi); });
}

ConditionReport validate(const Nonlinearity& f, const Eigen::VectorXd& rho,
                         const SamplePlan& plan) {
    const SpacePtr& space = f.space();
    const int n = space->size();
    if (rho.size() != n) throw ValidationError("validate: rho length mismatch");
    if (plan.y_samples < 3 || !(plan.y_max > 0.0))
        throw ValidationError("validate: sample plan must cover a symmetric y-range");

    ConditionReport rep;

    // Sig) pointwise on the grid.
    for (int i = 0; i < n && rep.sig_ok; ++i) {
        for (int k = 0; k < plan.y_samples; ++k) {
            const double y = -plan.y_max + 2.0 * plan.y_max * k / (plan.y_samples - 1);
            const double v = f(i, y);
            if (v * y > 1e-12 * (1.0 + std::abs(v))) {
                rep.sig_ok = false;
                rep.sig_witness = ConditionWitness{i, y, v};
                break;
            }
        }
    }

    // Car): shrink the interval with the worst jump per node; a genuine
    // discontinuity keeps its gap while the bracket collapses.
    for (int i = 0; i < n && rep.car_ok; ++i) {
        double worst_gap = 0.0, wa = 0.0, wb = 0.0, scale = 1.0;
        for (int k = 0; k + 1 < plan.y_samples; ++k) {
            const double a = -plan.y_max + 2.0 * plan.y_max * k / (plan.y_samples - 1);
            const double b = -plan.y_max + 2.0 * plan.y_max * (k + 1) / (plan.y_samples - 1);
            const double gap = std::abs(f(i, b) - f(i, a));
            scale = std::max({scale, std::abs(f(i, a)), std::abs(f(i, b))});
            if (gap > worst_gap) {
                worst_gap = gap;
                wa = a;
                wb = b;
            }
        }
        if (worst_gap == 0.0) continue;
        double a = wa, b = wb;
        for (int it = 0; it < 60 && b - a > 1e-14 * plan.y_max; ++it) {
            const double mid = 0.5 * (a + b);
            if (std::abs(f(i, mid) - f(i, a)) >= std::abs(f(i, b) - f(i, mid)))
                b = mid;
            else
                a = mid;
        }
        const double residual_gap = std::abs(f(i, b) - f(i, a));
        if (residual_gap > 1e-7 * scale) {
            rep.car_ok = false;
            rep.car_witness = ConditionWitness{i, 0.5 * (a + b), residual_gap};
        }
    }

    // M): envelope over |y| <= M against rho m.
    for (double M : plan.M_values) {
        const Eigen::VectorXd g = f.envelope(Eigen::VectorXd::Constant(n, -M),
                                             Eigen::VectorXd::Constant(n, M));
        const double norm = (g.array() * rho.array() * space->m.array()).sum();
        rep.m_norms.emplace_back(M, norm);
        if (!std::isfinite(norm)) rep.m_ok = false;
    }

    // Int) for the supplied bracket; on finite spaces a finite envelope is the
    // whole condition.
    if (plan.bracket) {
        const auto& [lo, hi] = *plan.bracket;
        const Eigen::VectorXd g = f.envelope(lo, hi);
        rep.int_norm = (g.array() * rho.array() * space->m.array()).sum();
        rep.int_ok = std::isfinite(rep.int_norm);
    }

    // qM) holds on every finite space.
    rep.qm_ok = true;
    return rep;
}

}  // namespace lab
