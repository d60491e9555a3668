#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "lab/form.hpp"
#include "lab/operator_spec.hpp"

namespace lab {

struct CapacityResult {
    double value = 0.0;            // E(w, w) at the minimizer
    Eigen::VectorXd equilibrium;   // w >= 1 on U
    std::vector<int> active_set;   // nodes clamped at 1
    int iterations = 0;
    double residual = 0.0;         // KKT residual norm
};

/// Cap(U) = min { w^T B w : w_i >= 1 on U }. Projected Barzilai-Borwein
/// gradient to identify the active set, then an exact solve on it.
CapacityResult capacity(const FormMatrix& form, const std::vector<int>& U, double tol = 1e-10);

struct PolarityLevel {
    double h;
    double cap;
};

struct PolarityReport {
    std::array<double, 2> site{{0.0, 0.0}};
    std::vector<PolarityLevel> levels;     // strictly refining
    double fitted_rate = 0.0;              // beta in Cap ~ C h^beta
    enum class Verdict { polar, non_polar, inconclusive } verdict = Verdict::inconclusive;
};

/// Capacity of the singleton nearest the site across a refinement ladder.
/// Verdict thresholds are artifact conventions: polar needs beta >= 0.1 and a
/// final estimate at most half the coarsest one.
PolarityReport classify_atom(const std::vector<double>& h_levels, const GridSpec& base,
                             const OperatorSpec& op, const std::array<double, 2>& site);

}  // namespace lab
