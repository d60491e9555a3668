#include "lab/operator_spec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lab/errors.hpp"

namespace lab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Simpson rule on [a, b].
template <class F>
double simpson(const F& f, double a, double b, int panels) {
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double x0 = a + k * w;
        s += w / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * w) + f(x0 + w));
    }
    return s;
}
}  // namespace

ScaleFunction ScaleFunction::power(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("scale: stability index alpha must lie in (0,1)");
    ScaleFunction s;
    s.kind_ = Kind::power;
    s.comps_ = {{alpha, 1.0}};
    return s;
}

ScaleFunction ScaleFunction::mixture(std::vector<std::pair<double, double>> components) {
    if (components.empty()) throw ValidationError("scale: empty mixing measure");
    for (auto& [a, w] : components) {
        if (!(a > 0.0 && a < 1.0)) throw ValidationError("scale: mixture index outside (0,1)");
        if (!(w > 0.0)) throw ValidationError("scale: mixture weight must be positive");
    }
    ScaleFunction s;
    s.kind_ = Kind::mixture;
    s.comps_ = std::move(components);
    return s;
}

ScaleFunction ScaleFunction::custom(std::function<double(double)> phi) {
    ScaleFunction s;
    s.kind_ = Kind::custom;
    s.fn_ = std::move(phi);
    return s;
}

double ScaleFunction::operator()(double r) const {
    switch (kind_) {
        case Kind::power:
            return std::pow(r, 2.0 * comps_[0].first);
        case Kind::mixture: {
            // 1/phi = sum w_k r^{-2 a_k}
            double inv = 0.0;
            for (auto& [a, w] : comps_) inv += w * std::pow(r, -2.0 * a);
            return 1.0 / inv;
        }
        case Kind::custom:
            return fn_(r);
    }
    return kNaN;
}

double ScaleFunction::lower_moment(double r) const {
    if (!(r > 0.0)) return 0.0;
    switch (kind_) {
        case Kind::power: {
            const double a = comps_[0].first;
            return std::pow(r, 2.0 - 2.0 * a) / (2.0 - 2.0 * a);
        }
        case Kind::mixture: {
            // int_0^r s * sum_k w_k s^{-2 a_k} ds
            double acc = 0.0;
            for (auto& [a, w] : comps_) acc += w * std::pow(r, 2.0 - 2.0 * a) / (2.0 - 2.0 * a);
            return acc;
        }
        case Kind::custom: {
            // Dyadic shells toward zero; declare divergence when the shell
            // contributions stop decaying.
            const auto integrand = [&](double s) { return s / fn_(s); };
            double total = 0.0;
            double prev_shell = std::numeric_limits<double>::infinity();
            double hi = r;
            for (int k = 0; k < 400; ++k) {
                const double lo = hi * 0.5;
                const double shell = simpson(integrand, lo, hi, 8);
                total += shell;
                if (k > 60 && shell > 0.999 * prev_shell) return kNaN;  // divergent
                if (shell < 1e-16 * std::max(total, 1e-300)) break;
                prev_shell = shell;
                hi = lo;
            }
            return total;
        }
    }
    return kNaN;
}

double ScaleFunction::tail(double R) const {
    if (!(R > 0.0)) throw ValidationError("scale: tail distance must be positive");
    switch (kind_) {
        case Kind::power: {
            const double a = comps_[0].first;
            return std::pow(R, -2.0 * a) / (2.0 * a);
        }
        case Kind::mixture: {
            double acc = 0.0;
            for (auto& [a, w] : comps_) acc += w * std::pow(R, -2.0 * a) / (2.0 * a);
            return acc;
        }
        case Kind::custom:
            throw ValidationError("scale: tail integral needs a power or mixture scale");
    }
    return kNaN;
}

ScaleFunction OperatorSpec::scale() const {
    switch (kind) {
        case OperatorKind::fractional:
        case OperatorKind::nonlocal:
            return ScaleFunction::power(alpha);
        case OperatorKind::mixed_stable:
            return ScaleFunction::mixture(mixing);
        case OperatorKind::local:
            throw ValidationError("local operator has no kernel scale");
    }
    throw ValidationError("unknown operator kind");
}

std::string OperatorSpec::kind_name() const {
    switch (kind) {
        case OperatorKind::local: return "local";
        case OperatorKind::nonlocal: return "nonlocal";
        case OperatorKind::fractional: return "fractional";
        case OperatorKind::mixed_stable: return "mixed_stable";
    }
    return "?";
}

KernelConditionReport check_kernel_conditions(const OperatorSpec& spec,
                                              const std::vector<double>& r_grid) {
    if (r_grid.size() < 2) throw ValidationError("kernel conditions: need an r-grid");
    for (double r : r_grid)
        if (!(r > 0.0)) throw ValidationError("kernel conditions: r-grid must be positive");
    std::vector<double> rs = r_grid;
    std::sort(rs.begin(), rs.end());

    KernelConditionReport rep;
    rep.c1 = spec.c1;
    rep.c2 = spec.c2;
    rep.a_ok = spec.c1 > 0.0 && spec.c1 <= spec.c2;

    ScaleFunction phi = spec.kind == OperatorKind::local
                            ? ScaleFunction::custom([](double) { return 1.0; })
                            : spec.scale();

    rep.monotone_ok = true;
    double prev = 0.0;
    for (double r : rs) {
        const double v = phi(r);
        if (!(v > prev)) {
            rep.monotone_ok = false;
            break;
        }
        prev = v;
    }

    // (B): fit c3 = sup_r I0(r) phi(r) / r^2.
    if (rep.monotone_ok) {
        double c3 = 0.0;
        bool finite = true;
        for (double r : rs) {
            const double i0 = phi.lower_moment(r);
            if (std::isnan(i0)) {
                finite = false;
                break;
            }
            c3 = std::max(c3, i0 * phi(r) / (r * r));
        }
        rep.b_ok = finite;
        rep.c3 = finite ? c3 : kNaN;
    }

    // (C): fitted doubling exponents over all ordered grid pairs, c4 = c5 = 1.
    if (rep.monotone_ok) {
        double dmin = std::numeric_limits<double>::infinity();
        double dmax = -dmin;
        for (size_t i = 0; i < rs.size(); ++i)
            for (size_t j = i + 1; j < rs.size(); ++j) {
                const double L = std::log(phi(rs[j]) / phi(rs[i])) / std::log(rs[j] / rs[i]);
                dmin = std::min(dmin, L);
                dmax = std::max(dmax, L);
            }
        rep.delta1 = dmin;
        rep.delta2 = dmax;
        rep.c_ok = std::isfinite(dmin) && std::isfinite(dmax) && dmin > 0.0;
    }
    return rep;
}

}  // namespace lab
