#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "lab/state_space.hpp"

namespace lab {

/// Continuum-limit role of an atom: diffuse atoms sit at non-polar sites
/// (they belong to the capacity-absolutely-continuous part), concentrated
/// atoms at polar sites. Densities w.r.t. m are always diffuse.
enum class AtomTag { diffuse, concentrated };

struct Atom {
    int node = 0;
    double mass = 0.0;
    AtomTag tag = AtomTag::diffuse;
};

/// Signed measure on a finite state space: a density w.r.t. m plus tagged atoms.
///
/// Canonical form: atoms sorted by node, at most one per node, no zero-mass
/// atoms; a diffuse atom sharing a node with a density of the opposite sign is
/// netted against it. Concentrated atoms never net against densities (they
/// represent a different capacity class).
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(SpacePtr space)
        : space_(std::move(space)), density_(Eigen::VectorXd::Zero(space_->size())) {}

    static DiscreteMeasure from_density(SpacePtr space, Eigen::VectorXd density);
    static DiscreteMeasure dirac(SpacePtr space, int node, double mass,
                                 AtomTag tag = AtomTag::concentrated);

    DiscreteMeasure& add_atom(int node, double mass, AtomTag tag);
    DiscreteMeasure& add_density(const Eigen::VectorXd& density);

    const SpacePtr& space() const { return space_; }
    const Eigen::VectorXd& density() const { return density_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    int size() const { return space_ ? space_->size() : 0; }

    double atom_mass(int node) const;
    /// Total mass carried by node i: density_i * m_i + atom mass.
    double node_mass(int i) const;
    Eigen::VectorXd node_masses() const;

    bool is_zero(double tol = 0.0) const;
    bool nonnegative(double tol = 0.0) const;
    bool nonpositive(double tol = 0.0) const;

    DiscreteMeasure operator+(const DiscreteMeasure& other) const;
    DiscreteMeasure operator-(const DiscreteMeasure& other) const;
    DiscreteMeasure operator*(double s) const;
    DiscreteMeasure operator-() const { return *this * -1.0; }

private:
    SpacePtr space_;
    Eigen::VectorXd density_;
    std::vector<Atom> atoms_;

    void canonicalize();
    friend DiscreteMeasure lattice_pointwise(const DiscreteMeasure&, const DiscreteMeasure&, bool);
};

enum class LatticeOp { sup, inf, plus, minus };

/// Nodewise lattice operation on total node masses. sup/inf collapse each node
/// to a single mass whose tag is concentrated iff every contributing mass at
/// that node is concentrated; plus/minus combine densities and atoms
/// structurally.
DiscreteMeasure lattice(const DiscreteMeasure& mu, const DiscreteMeasure& nu, LatticeOp op);

struct MeasureParts {
    DiscreteMeasure plus, minus, abs;
};
MeasureParts parts(const DiscreteMeasure& mu);

/// ||mu||_rho = sum_i rho_i |node mass|_i.
double tv_norm(const DiscreteMeasure& mu, const Eigen::VectorXd& rho);

/// Disjoint supports of |mu| and |nu|.
bool orthogonal(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol = 0.0);

DiscreteMeasure restrict_measure(const DiscreteMeasure& mu, const std::vector<int>& nodes);

/// (mu_d, mu_c): densities and diffuse atoms vs concentrated atoms.
std::pair<DiscreteMeasure, DiscreteMeasure> split_dc(const DiscreteMeasure& mu);

std::string to_string(AtomTag tag);

}  // namespace lab
