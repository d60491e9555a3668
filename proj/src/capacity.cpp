#include "lab/capacity.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "lab/errors.hpp"
#include "lab/green.hpp"

namespace lab {

namespace {

// Exact minimizer with the nodes of A clamped at 1: solve the free block.
Eigen::VectorXd solve_clamped(const Eigen::MatrixXd& B, const std::vector<char>& clamped) {
    const int n = static_cast<int>(B.rows());
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
        if (!clamped[i]) free_idx.push_back(i);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        if (clamped[i]) w[i] = 1.0;
    if (free_idx.empty()) return w;

    const int k = static_cast<int>(free_idx.size());
    Eigen::MatrixXd Bff(k, k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) Bff(a, b) = B(free_idx[a], free_idx[b]);
        for (int j = 0; j < n; ++j)
            if (clamped[j]) rhs[a] -= B(free_idx[a], j);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Bff);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
        throw ValidationError("capacity: form not transient on the free block");
    const Eigen::VectorXd wf = ldlt.solve(rhs);
    for (int a = 0; a < k; ++a) w[free_idx[a]] = wf[a];
    return w;
}

double kkt_residual(const Eigen::MatrixXd& B, const Eigen::VectorXd& w,
                    const std::vector<char>& in_U, const std::vector<char>& clamped) {
    const Eigen::VectorXd grad = 2.0 * (B * w);
    double res = 0.0;
    for (int i = 0; i < w.size(); ++i) {
        if (clamped[i]) {
            res = std::max(res, std::max(0.0, -grad[i]));       // multiplier sign
        } else {
            res = std::max(res, std::abs(grad[i]));             // stationarity
            if (in_U[i]) res = std::max(res, std::max(0.0, 1.0 - w[i]));  // feasibility
        }
    }
    return res;
}

}  // namespace

CapacityResult capacity(const FormMatrix& form, const std::vector<int>& U, double tol) {
    if (U.empty()) throw ValidationError("capacity: target set is empty");
    const int n = form.size();
    std::vector<char> in_U(n, 0);
    for (int i : U) {
        if (i < 0 || i >= n) throw ValidationError("capacity: node out of range");
        in_U[i] = 1;
    }

    const Eigen::MatrixXd& B = form.B;
    CapacityResult result;

    // Projected gradient with Barzilai-Borwein steps to identify the active set.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        if (in_U[i]) w[i] = 1.0;
    Eigen::VectorXd grad = 2.0 * (B * w);
    double step = 1.0 / std::max(1e-12, 2.0 * B.diagonal().maxCoeff());
    int pg_iters = 0;
    for (; pg_iters < 500; ++pg_iters) {
        Eigen::VectorXd w_new = w - step * grad;
        for (int i = 0; i < n; ++i)
            if (in_U[i]) w_new[i] = std::max(w_new[i], 1.0);
        const Eigen::VectorXd grad_new = 2.0 * (B * w_new);
        const Eigen::VectorXd s = w_new - w;
        const Eigen::VectorXd y = grad_new - grad;
        if (s.norm() < 1e-14) {
            w = w_new;
            grad = grad_new;
            break;
        }
        const double sy = s.dot(y);
        step = sy > 0.0 ? s.squaredNorm() / sy : step * 2.0;
        w = w_new;
        grad = grad_new;
    }

    // Active-set polish: exact solves, releasing constraints with negative
    // multipliers and re-adding violated ones.
    std::vector<char> clamped(n, 0);
    for (int i = 0; i < n; ++i)
        if (in_U[i] && w[i] <= 1.0 + 1e-10) clamped[i] = 1;
    bool any = false;
    for (int i = 0; i < n; ++i) any |= (clamped[i] != 0);
    if (!any)
        for (int i : U) clamped[i] = 1;

    int polish = 0;
    for (; polish < 200; ++polish) {
        w = solve_clamped(B, clamped);
        const Eigen::VectorXd grad_w = 2.0 * (B * w);
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            if (clamped[i] && grad_w[i] < -tol) {
                clamped[i] = 0;  // negative multiplier: release
                changed = true;
            } else if (in_U[i] && !clamped[i] && w[i] < 1.0 - 1e-14) {
                clamped[i] = 1;  // primal violation: clamp
                changed = true;
            }
        }
        if (!changed) break;
    }

    result.equilibrium = w;
    result.iterations = pg_iters + polish;
    result.residual = kkt_residual(B, w, in_U, clamped);
    result.value = w.dot(B * w);
    for (int i = 0; i < n; ++i)
        if (clamped[i]) result.active_set.push_back(i);

    if (result.residual > tol * std::max(1.0, B.cwiseAbs().maxCoeff()))
        throw SolverFailure("capacity: KKT residual " + std::to_string(result.residual) +
                            " above tolerance; best value " + std::to_string(result.value));
    return result;
}

PolarityReport classify_atom(const std::vector<double>& h_levels, const GridSpec& base,
                             const OperatorSpec& op, const std::array<double, 2>& site) {
    if (h_levels.size() < 3)
        throw ValidationError("classify_atom: need at least 3 refinement levels");
    for (size_t k = 1; k < h_levels.size(); ++k)
        if (!(h_levels[k] < h_levels[k - 1]))
            throw ValidationError("classify_atom: levels must be strictly decreasing in h");

    PolarityReport rep;
    rep.site = site;
    for (double h : h_levels) {
        GridSpec spec = base;
        spec.h = h;
        const SpacePtr space = build_space(spec);
        const FormMatrix form = assemble(space, op);
        const int node = nearest_node(*space, site);
        const CapacityResult cap = capacity(form, {node});
        rep.levels.push_back({h, cap.value});
    }

    // Log-log least-squares fit of Cap ~ C h^beta.
    const int k = static_cast<int>(rep.levels.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& lv : rep.levels) {
        const double x = std::log(lv.h), y = std::log(std::max(lv.cap, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.fitted_rate = (k * sxy - sx * sy) / (k * sxx - sx * sx);

    const double first = rep.levels.front().cap;
    const double last = rep.levels.back().cap;
    if (rep.fitted_rate >= 0.1 && last <= 0.5 * first)
        rep.verdict = PolarityReport::Verdict::polar;
    else if (rep.fitted_rate < 0.1 && last >= 0.8 * first)
        rep.verdict = PolarityReport::Verdict::non_polar;
    else
        rep.verdict = PolarityReport::Verdict::inconclusive;
    return rep;
}

}  // namespace lab
