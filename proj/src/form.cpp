#include "lab/form.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unordered_map>

#include "lab/errors.hpp"

namespace lab {

namespace {

// Lattice index map for neighbour lookup on uniform grids.
class LatticeIndex {
public:
    explicit LatticeIndex(const StateSpace& space) : space_(space) {
        origin_ = space.positions.at(0);
        for (int i = 0; i < space.size(); ++i) map_[key(space.positions[i])] = i;
    }

    // Node at physical position p, or -1.
    int at(const std::array<double, 2>& p) const {
        auto it = map_.find(key(p));
        return it == map_.end() ? -1 : it->second;
    }

private:
    std::int64_t key(const std::array<double, 2>& p) const {
        const auto q = [&](double x, double x0) {
            return static_cast<std::int64_t>(std::llround((x - x0) / space_.h));
        };
        return q(p[0], origin_[0]) * 0x40000000ll + (space_.dim > 1 ? q(p[1], origin_[1]) : 0);
    }

    const StateSpace& space_;
    std::array<double, 2> origin_{};
    std::unordered_map<std::int64_t, int> map_;
};

bool in_box(const ExteriorBox& box, const std::array<double, 2>& p, int dim, double tol) {
    for (int k = 0; k < dim; ++k)
        if (p[k] <= box.lo[k] + tol || p[k] >= box.hi[k] - tol) return false;
    return true;
}

// Shared flux stencil: per-axis coefficient field evaluated at edge midpoints.
// Couplings to exterior lattice positions become killing when the space
// carries an exterior condition, and are dropped otherwise.
void add_flux_stencil(FormMatrix& form,
                      const std::function<double(const std::array<double, 2>&, int)>& a_axis) {
    const StateSpace& space = *form.space;
    const LatticeIndex index(space);
    const double h = space.h;
    const double scale = std::pow(h, space.dim - 2);
    const double tol = 1e-9 * h;

    for (int i = 0; i < space.size(); ++i) {
        for (int k = 0; k < space.dim; ++k) {
            for (int dir : {-1, +1}) {
                auto nb = space.positions[i];
                nb[k] += dir * h;
                auto mid = space.positions[i];
                mid[k] += dir * 0.5 * h;
                const double a = a_axis(mid, k);
                if (!(a > 0.0))
                    throw ValidationError("assemble_local: coefficient not elliptic at a midpoint");
                const int j = index.at(nb);
                if (j >= 0) {
                    form.B(i, j) -= a * scale;
                } else if (space.exterior && !in_box(*space.exterior, nb, space.dim, tol)) {
                    form.B(i, i) += a * scale;  // Dirichlet killing
                }
                // no node and no exterior condition: free (reflecting) side
            }
        }
    }
    // Close diagonals so that row sums equal exactly the accumulated killing.
    for (int i = 0; i < space.size(); ++i) {
        double off = 0.0;
        for (int j = 0; j < space.size(); ++j)
            if (j != i) off += form.B(i, j);
        const double kappa_i = form.B(i, i);  // killing accumulated so far
        form.B(i, i) = kappa_i - off;
    }
}

}  // namespace

void FormMatrix::validate_markov(double tol) const {
    const int n = size();
    const double mag = std::max(1.0, B.cwiseAbs().maxCoeff());
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > tol * mag)
        throw ValidationError("form is not symmetric");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && B(i, j) > tol)
                throw ValidationError("form is not Markovian: positive off-diagonal entry");
    if (B.rowwise().sum().minCoeff() < -tol * mag)
        throw ValidationError("form is not Markovian: negative row sum");
}

FormMatrix assemble_local(SpacePtr space,
                          const std::function<double(const std::array<double, 2>&)>& a) {
    if (!space) throw ValidationError("assemble_local: missing space");
    FormMatrix form{space, Eigen::MatrixXd::Zero(space->size(), space->size())};
    auto a_axis = [&](const std::array<double, 2>& mid, int) { return a ? a(mid) : 1.0; };
    add_flux_stencil(form, a_axis);
    form.validate_markov();
    return form;
}

FormMatrix assemble_local(SpacePtr space, const Eigen::Matrix2d& a) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw ValidationError("assemble_local: coefficient matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError("assemble_local: coefficient matrix is not elliptic");
    if (std::abs(a(0, 1)) > 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        throw ValidationError(
            "assemble_local: cross-diffusion coefficients are not representable by the flux "
            "stencil");
    if (!space) throw ValidationError("assemble_local: missing space");
    FormMatrix form{space, Eigen::MatrixXd::Zero(space->size(), space->size())};
    auto a_axis = [&](const std::array<double, 2>&, int k) { return a(k, k); };
    add_flux_stencil(form, a_axis);
    form.validate_markov();
    return form;
}

FormMatrix assemble_nonlocal(SpacePtr space, const OperatorSpec& spec) {
    if (!space) throw ValidationError("assemble_nonlocal: missing space");
    if (spec.kind == OperatorKind::local)
        throw ValidationError("assemble_nonlocal: got a local operator spec");
    if (spec.use_exterior && !space->exterior)
        throw ValidationError("assemble_nonlocal: exterior condition requested on a space "
                              "without exterior_spec");
    const ScaleFunction phi = spec.scale();
    if (!phi.assemblable())
        throw ValidationError("assemble_nonlocal: scale function has no closed-form integrals");

    const StateSpace& sp = *space;
    const int n = sp.size();
    const int d = sp.dim;
    const double h = sp.h;

    auto coeff = [&](const std::array<double, 2>& x, const std::array<double, 2>& y) {
        return spec.a_xy ? spec.a_xy(x, y) : spec.a_const;
    };
    auto dist = [&](int i, int j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            const double t = sp.positions[i][k] - sp.positions[j][k];
            s += t * t;
        }
        return std::sqrt(s);
    };

    // Symmetry of the kernel coefficient, sampled over node pairs.
    if (spec.a_xy) {
        for (int i = 0; i < std::min(n, 16); ++i)
            for (int j = i + 1; j < std::min(n, 16); ++j) {
                const double aij = coeff(sp.positions[i], sp.positions[j]);
                const double aji = coeff(sp.positions[j], sp.positions[i]);
                if (std::abs(aij - aji) > 1e-12 * std::max(1.0, std::abs(aij)))
                    throw ValidationError("assemble_nonlocal: kernel coefficient not symmetric");
            }
    }

    FormMatrix form{space, Eigen::MatrixXd::Zero(n, n)};

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double r = dist(i, j);
            const double k = coeff(sp.positions[i], sp.positions[j]) / (std::pow(r, d) * phi(r));
            const double b = -sp.m[i] * sp.m[j] * k;
            form.B(i, j) = b;
            form.B(j, i) = b;
        }

    // Exterior Dirichlet killing from the analytic radial tail.
    Eigen::VectorXd kappa = Eigen::VectorXd::Zero(n);
    if (spec.use_exterior) {
        const ExteriorBox& box = *sp.exterior;
        if (d == 1) {
            for (int i = 0; i < n; ++i) {
                const double x = sp.positions[i][0];
                const double a_lo = coeff(sp.positions[i], {box.lo[0], 0.0});
                const double a_hi = coeff(sp.positions[i], {box.hi[0], 0.0});
                kappa[i] = sp.m[i] * (a_lo * phi.tail(x - box.lo[0]) + a_hi * phi.tail(box.hi[0] - x));
            }
        } else {
            // Polar quadrature of the box complement up to the circumscribed
            // radius, analytic tail beyond it.
            const int nr = 96, na = 128;
            for (int i = 0; i < n; ++i) {
                const auto& x = sp.positions[i];
                double r_near = std::numeric_limits<double>::infinity();
                double r_far = 0.0;
                for (int cx = 0; cx < 2; ++cx)
                    for (int cy = 0; cy < 2; ++cy) {
                        const double dx = (cx ? box.hi[0] : box.lo[0]) - x[0];
                        const double dy = (cy ? box.hi[1] : box.lo[1]) - x[1];
                        r_far = std::max(r_far, std::hypot(dx, dy));
                    }
                r_near = std::min({x[0] - box.lo[0], box.hi[0] - x[0], x[1] - box.lo[1],
                                   box.hi[1] - x[1]});
                double acc = 2.0 * M_PI * coeff(x, x) * phi.tail(r_far);
                const double q = std::pow(r_far / r_near, 1.0 / nr);
                for (int kr = 0; kr < nr; ++kr) {
                    const double r0 = r_near * std::pow(q, kr);
                    const double r1 = r0 * q;
                    const double rm = 0.5 * (r0 + r1);
                    const double kern = 1.0 / (rm * rm * phi(rm));
                    for (int ka = 0; ka < na; ++ka) {
                        const double th = (ka + 0.5) * 2.0 * M_PI / na;
                        const std::array<double, 2> y{x[0] + rm * std::cos(th),
                                                      x[1] + rm * std::sin(th)};
                        if (!in_box(box, y, 2, 0.0))
                            acc += coeff(x, y) * kern * rm * (r1 - r0) * (2.0 * M_PI / na);
                    }
                }
                kappa[i] = sp.m[i] * acc;
            }
        }
    }

    // Near-diagonal singular cell: nearest-neighbour local correction whose
    // per-axis coefficient is half the in-cell second moment of the kernel,
    // int_{|z|<h} z_1^2 k(|z|) dz = 2 a I0(h) in 1D, pi a I0(h) in 2D.
    const double i0 = phi.lower_moment(h);
    if (std::isnan(i0))
        throw ValidationError("assemble_nonlocal: singular-cell moment diverges");
    const double moment_factor = (d == 1) ? 2.0 : M_PI;
    {
        SpacePtr corr_space = space;
        if (!spec.use_exterior) {
            // the correction must not kill when no exterior condition is set
            auto open = std::make_shared<StateSpace>(sp);
            open->exterior.reset();
            corr_space = open;
        }
        FormMatrix corr{corr_space, Eigen::MatrixXd::Zero(n, n)};
        auto a_axis = [&](const std::array<double, 2>& mid, int) {
            return 0.5 * moment_factor * i0 * coeff(mid, mid);
        };
        add_flux_stencil(corr, a_axis);
        kappa += corr.B.rowwise().sum();  // the correction's own Dirichlet killing
        form.B += corr.B;
    }

    // Close diagonals: row sums must equal the total killing exactly.
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += form.B(i, j);
        form.B(i, i) = kappa[i] - off;
    }

    form.validate_markov();
    return form;
}

FormMatrix assemble(SpacePtr space, const OperatorSpec& spec) {
    if (spec.kind == OperatorKind::local) return assemble_local(std::move(space), spec.a_local);
    return assemble_nonlocal(std::move(space), spec);
}

FormMatrix restrict_form(const FormMatrix& form, const std::vector<int>& nodes) {
    if (nodes.empty()) throw ValidationError("restrict: empty node set");
    std::vector<int> idx = nodes;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (int i : idx)
        if (i < 0 || i >= form.size()) throw ValidationError("restrict: node out of range");

    auto sub = std::make_shared<StateSpace>();
    sub->dim = form.space->dim;
    sub->h = form.space->h;
    sub->exterior = form.space->exterior;
    const int k = static_cast<int>(idx.size());
    sub->m.resize(k);
    for (int a = 0; a < k; ++a) {
        sub->positions.push_back(form.space->positions[idx[a]]);
        sub->m[a] = form.space->m[idx[a]];
    }

    FormMatrix out{sub, Eigen::MatrixXd(k, k)};
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) out.B(a, b) = form.B(idx[a], idx[b]);
    return out;
}

FormMatrix perturb(const FormMatrix& form, const DiscreteMeasure& nu) {
    if (!same_space(*form.space, *nu.space()))
        throw ValidationError("perturb: measure lives on a different space");
    if (!nu.nonnegative(0.0))
        throw ValidationError("perturbation measure must be nonnegative");
    FormMatrix out = form;
    out.B += nu.node_masses().asDiagonal();
    return out;
}

BeurlingDeny beurling_deny(const FormMatrix& form) {
    form.validate_markov();
    BeurlingDeny bd;
    const int n = form.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (form.B(i, j) < 0.0) bd.jumps.push_back({i, j, -form.B(i, j)});
    bd.kappa = form.kappa();
    bd.resurrected = FormMatrix{form.space, form.B - Eigen::MatrixXd(bd.kappa.asDiagonal())};
    return bd;
}

}  // namespace lab
