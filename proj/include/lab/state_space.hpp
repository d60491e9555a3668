#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace lab {

/// Axis-aligned box; the Dirichlet exterior condition lives on its complement.
struct ExteriorBox {
    std::array<double, 2> lo{{0.0, 0.0}};
    std::array<double, 2> hi{{0.0, 0.0}};
};

/// Finite state space (E, m): nodes with positions and reference measure weights.
struct StateSpace {
    int dim = 1;
    double h = 1.0;                                // grid spacing (uniform grids)
    std::vector<std::array<double, 2>> positions;  // only [0..dim) used per node
    Eigen::VectorXd m;                             // cell measure, all entries > 0
    std::optional<ExteriorBox> exterior;

    int size() const { return static_cast<int>(positions.size()); }
};

using SpacePtr = std::shared_ptr<const StateSpace>;

struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{{-1.0, -1.0}};
    std::array<double, 2> hi{{1.0, 1.0}};
    double h = 1.0;
    bool with_exterior = true;  // Dirichlet condition on the complement of [lo, hi]
};

/// Uniform tensor grid of the interior lattice points of (lo, hi), m_i = h^dim,
/// nodes ordered lexicographically by coordinate. Throws ValidationError on an
/// empty grid or bad spacing.
SpacePtr build_space(const GridSpec& spec);

/// N abstract nodes on a unit-spaced line with m = 1 and no exterior;
/// carrier for randomly generated forms in tests and suites.
SpacePtr abstract_space(int n);

/// Structural identity (same nodes, weights, geometry).
bool same_space(const StateSpace& a, const StateSpace& b);

/// Index of the node closest to the given physical coordinates.
int nearest_node(const StateSpace& space, const std::array<double, 2>& coords);

}  // namespace lab
