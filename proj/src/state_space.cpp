#include "lab/state_space.hpp"

#include <cmath>
#include <limits>

#include "lab/errors.hpp"

namespace lab {

SpacePtr build_space(const GridSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2)
        throw ValidationError("build_space: dimension must be 1 or 2");
    if (!(spec.h > 0.0)) throw ValidationError("build_space: spacing h must be positive");

    auto axis_points = [&](int k) {
        std::vector<double> pts;
        const double lo = spec.lo[k], hi = spec.hi[k];
        if (!(hi > lo)) throw ValidationError("build_space: empty extent");
        const double tol = 1e-9 * spec.h;
        for (int i = 1;; ++i) {
            const double x = lo + i * spec.h;
            if (x >= hi - tol) break;
            pts.push_back(x);
        }
        return pts;
    };

    auto space = std::make_shared<StateSpace>();
    space->dim = spec.dim;
    space->h = spec.h;

    const auto xs = axis_points(0);
    if (spec.dim == 1) {
        for (double x : xs) space->positions.push_back({x, 0.0});
    } else {
        const auto ys = axis_points(1);
        for (double x : xs)
            for (double y : ys) space->positions.push_back({x, y});
    }
    if (space->positions.empty()) throw ValidationError("build_space: empty space");

    const double cell = std::pow(spec.h, spec.dim);
    space->m = Eigen::VectorXd::Constant(space->size(), cell);
    if (spec.with_exterior) space->exterior = ExteriorBox{spec.lo, spec.hi};
    return space;
}

SpacePtr abstract_space(int n) {
    if (n < 1) throw ValidationError("abstract_space: need at least one node");
    auto space = std::make_shared<StateSpace>();
    space->dim = 1;
    space->h = 1.0;
    for (int i = 0; i < n; ++i) space->positions.push_back({static_cast<double>(i), 0.0});
    space->m = Eigen::VectorXd::Ones(n);
    return space;
}

bool same_space(const StateSpace& a, const StateSpace& b) {
    if (&a == &b) return true;
    if (a.dim != b.dim || a.size() != b.size()) return false;
    if (a.m != b.m) return false;
    return a.positions == b.positions;
}

int nearest_node(const StateSpace& space, const std::array<double, 2>& coords) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < space.size(); ++i) {
        double d = 0;
        for (int k = 0; k < space.dim; ++k) {
            const double t = space.positions[i][k] - coords[k];
            d += t * t;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace lab
