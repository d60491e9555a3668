#include "lab/measure.hpp"

#include <algorithm>
#include <cmath>

#include "lab/errors.hpp"

namespace lab {

namespace {
void require_space(const SpacePtr& s) {
    if (!s) throw ValidationError("measure: missing state space");
}
void require_same(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    require_space(a.space());
    require_space(b.space());
    if (!same_space(*a.space(), *b.space()))
        throw ValidationError("measure: operands live on different spaces");
}
}  // namespace

DiscreteMeasure DiscreteMeasure::from_density(SpacePtr space, Eigen::VectorXd density) {
    require_space(space);
    if (density.size() != space->size())
        throw ValidationError("measure: density length does not match space");
    DiscreteMeasure mu(std::move(space));
    mu.density_ = std::move(density);
    return mu;
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, int node, double mass, AtomTag tag) {
    DiscreteMeasure mu(std::move(space));
    mu.add_atom(node, mass, tag);
    return mu;
}

DiscreteMeasure& DiscreteMeasure::add_atom(int node, double mass, AtomTag tag) {
    require_space(space_);
    if (node < 0 || node >= space_->size()) throw ValidationError("measure: atom node out of range");
    if (!std::isfinite(mass)) throw ValidationError("measure: atom mass must be finite");
    atoms_.push_back({node, mass, tag});
    canonicalize();
    return *this;
}

DiscreteMeasure& DiscreteMeasure::add_density(const Eigen::VectorXd& density) {
    require_space(space_);
    if (density.size() != space_->size())
        throw ValidationError("measure: density length does not match space");
    density_ += density;
    canonicalize();
    return *this;
}

double DiscreteMeasure::atom_mass(int node) const {
    for (const auto& a : atoms_)
        if (a.node == node) return a.mass;
    return 0.0;
}

double DiscreteMeasure::node_mass(int i) const {
    return density_[i] * space_->m[i] + atom_mass(i);
}

Eigen::VectorXd DiscreteMeasure::node_masses() const {
    Eigen::VectorXd t = density_.cwiseProduct(space_->m);
    for (const auto& a : atoms_) t[a.node] += a.mass;
    return t;
}

bool DiscreteMeasure::is_zero(double tol) const {
    return node_masses().cwiseAbs().maxCoeff() <= tol;
}

bool DiscreteMeasure::nonnegative(double tol) const {
    return node_masses().minCoeff() >= -tol;
}

bool DiscreteMeasure::nonpositive(double tol) const {
    return node_masses().maxCoeff() <= tol;
}

void DiscreteMeasure::canonicalize() {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.node < b.node; });
    std::vector<Atom> merged;
    for (const auto& a : atoms_) {
        if (!merged.empty() && merged.back().node == a.node) {
            merged.back().mass += a.mass;
            if (a.tag == AtomTag::diffuse) merged.back().tag = AtomTag::diffuse;
        } else {
            merged.push_back(a);
        }
    }
    atoms_.clear();
    for (auto& a : merged) {
        if (a.mass == 0.0) continue;
        const double d = density_[a.node] * space_->m[a.node];
        if (a.tag == AtomTag::diffuse && d * a.mass < 0.0) {
            const double net = d + a.mass;
            if (std::abs(a.mass) > std::abs(d)) {
                density_[a.node] = 0.0;
                a.mass = net;
                atoms_.push_back(a);
            } else {
                density_[a.node] = net / space_->m[a.node];
            }
            continue;
        }
        atoms_.push_back(a);
    }
}

DiscreteMeasure DiscreteMeasure::operator+(const DiscreteMeasure& other) const {
    require_same(*this, other);
    DiscreteMeasure r(space_);
    r.density_ = density_ + other.density_;
    r.atoms_ = atoms_;
    r.atoms_.insert(r.atoms_.end(), other.atoms_.begin(), other.atoms_.end());
    r.canonicalize();
    return r;
}

DiscreteMeasure DiscreteMeasure::operator-(const DiscreteMeasure& other) const {
    return *this + (other * -1.0);
}

DiscreteMeasure DiscreteMeasure::operator*(double s) const {
    DiscreteMeasure r(space_);
    r.density_ = density_ * s;
    if (s != 0.0) {
        r.atoms_ = atoms_;
        for (auto& a : r.atoms_) a.mass *= s;
    }
    r.canonicalize();
    return r;
}

DiscreteMeasure lattice_pointwise(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  bool take_sup) {
    require_same(mu, nu);
    const auto& space = mu.space_;
    const Eigen::VectorXd tm = mu.node_masses();
    const Eigen::VectorXd tn = nu.node_masses();

    DiscreteMeasure r(space);
    for (int i = 0; i < space->size(); ++i) {
        const double v = take_sup ? std::max(tm[i], tn[i]) : std::min(tm[i], tn[i]);
        if (v == 0.0) continue;

        // Contributing masses at this node decide the kind and tag of the result.
        bool any = false, all_conc = true, all_atoms = true;
        auto contribute = [&](const DiscreteMeasure& m) {
            if (m.density_[i] != 0.0) {
                any = true;
                all_conc = false;
                all_atoms = false;
            }
            const double am = m.atom_mass(i);
            if (am != 0.0) {
                any = true;
                for (const auto& a : m.atoms_)
                    if (a.node == i && a.tag != AtomTag::concentrated) all_conc = false;
            }
        };
        contribute(mu);
        contribute(nu);
        if (!any) continue;  // sup/inf of zeros

        if (all_atoms) {
            r.atoms_.push_back({i, v, all_conc ? AtomTag::concentrated : AtomTag::diffuse});
        } else {
            r.density_[i] = v / space->m[i];
        }
    }
    r.canonicalize();
    return r;
}

DiscreteMeasure lattice(const DiscreteMeasure& mu, const DiscreteMeasure& nu, LatticeOp op) {
    switch (op) {
        case LatticeOp::sup: return lattice_pointwise(mu, nu, true);
        case LatticeOp::inf: return lattice_pointwise(mu, nu, false);
        case LatticeOp::plus: return mu + nu;
        case LatticeOp::minus: return mu - nu;
    }
    throw ValidationError("lattice: unknown operation");
}

MeasureParts parts(const DiscreteMeasure& mu) {
    DiscreteMeasure zero(mu.space());
    MeasureParts p;
    p.plus = lattice(mu, zero, LatticeOp::sup);
    p.minus = lattice(-mu, zero, LatticeOp::sup);
    p.abs = p.plus + p.minus;
    return p;
}

double tv_norm(const DiscreteMeasure& mu, const Eigen::VectorXd& rho) {
    if (rho.size() != mu.size()) throw ValidationError("tv_norm: weight length mismatch");
    if (rho.minCoeff() <= 0.0) throw ValidationError("tv_norm: weight must be strictly positive");
    return rho.dot(mu.node_masses().cwiseAbs());
}

bool orthogonal(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol) {
    require_same(mu, nu);
    const Eigen::VectorXd a = mu.node_masses(), b = nu.node_masses();
    for (int i = 0; i < a.size(); ++i)
        if (std::abs(a[i]) > tol && std::abs(b[i]) > tol) return false;
    return true;
}

DiscreteMeasure restrict_measure(const DiscreteMeasure& mu, const std::vector<int>& nodes) {
    DiscreteMeasure r(mu.space());
    std::vector<char> keep(mu.size(), 0);
    for (int i : nodes) {
        if (i < 0 || i >= mu.size()) throw ValidationError("restrict_measure: node out of range");
        keep[i] = 1;
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(mu.size());
    for (int i = 0; i < mu.size(); ++i)
        if (keep[i]) d[i] = mu.density()[i];
    r.add_density(d);
    for (const auto& a : mu.atoms())
        if (keep[a.node]) r.add_atom(a.node, a.mass, a.tag);
    return r;
}

std::pair<DiscreteMeasure, DiscreteMeasure> split_dc(const DiscreteMeasure& mu) {
    DiscreteMeasure d(mu.space()), c(mu.space());
    d.add_density(mu.density());
    for (const auto& a : mu.atoms()) {
        if (a.tag == AtomTag::diffuse)
            d.add_atom(a.node, a.mass, a.tag);
        else
            c.add_atom(a.node, a.mass, a.tag);
    }
    return {d, c};
}

std::string to_string(AtomTag tag) {
    return tag == AtomTag::diffuse ? "diffuse" : "concentrated";
}

}  // namespace lab
