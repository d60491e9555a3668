#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lab {

/// Scale function phi(r) of the jump kernel a(x,y) / (|x-y|^d phi(|x-y|)).
///
/// Power and stable-mixture scales carry closed forms for the three integrals
/// the assembly needs; custom scales fall back to adaptive dyadic quadrature.
class ScaleFunction {
public:
    /// phi(r) = r^{2 alpha}, alpha in (0,1): the fractional kernel.
    static ScaleFunction power(double alpha);

    /// 1/phi(r) = sum_k w_k r^{-2 alpha_k}: mixed symmetric stable scale.
    static ScaleFunction mixture(std::vector<std::pair<double, double>> components);

    /// Arbitrary phi for condition checking; not assemblable.
    static ScaleFunction custom(std::function<double(double)> phi);

    double operator()(double r) const;

    /// I0(r) = int_0^r s/phi(s) ds; NaN when the integral diverges at zero.
    double lower_moment(double r) const;

    /// T1(R) = int_R^inf dr / (r phi(r)); requires closed forms.
    double tail(double R) const;

    bool assemblable() const { return kind_ != Kind::custom; }
    const std::vector<std::pair<double, double>>& components() const { return comps_; }

private:
    enum class Kind { power, mixture, custom };
    Kind kind_ = Kind::power;
    std::vector<std::pair<double, double>> comps_;  // (alpha_k, w_k); power = single (alpha, 1)
    std::function<double(double)> fn_;
};

enum class OperatorKind { local, nonlocal, fractional, mixed_stable };

/// Declarative description of the model operators.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::fractional;
    double alpha = 0.5;  // stability index for kind == fractional
    std::vector<std::pair<double, double>> mixing;  // (alpha_k, weight_k)
    double a_const = 1.0;
    /// Optional symmetric kernel coefficient a(x,y); a_const is used when absent.
    std::function<double(const std::array<double, 2>&, const std::array<double, 2>&)> a_xy;
    double c1 = 1.0, c2 = 1.0;  // declared bounds c1 <= a <= c2
    bool use_exterior = true;   // realize the Dirichlet condition as killing
    /// Scalar coefficient field for kind == local; constant 1 when absent.
    std::function<double(const std::array<double, 2>&)> a_local;

    ScaleFunction scale() const;
    std::string kind_name() const;
};

struct KernelConditionReport {
    bool a_ok = false;   // c1 <= a <= c2 with positive bounds
    bool b_ok = false;   // int_0^r s/phi ds <= c3 r^2/phi(r)
    bool c_ok = false;   // doubling bounds with exponents delta1, delta2
    bool monotone_ok = false;
    double c1 = 0, c2 = 0, c3 = 0, c4 = 1, c5 = 1, delta1 = 0, delta2 = 0;
};

/// Numeric verification of the kernel growth conditions on an r-grid.
/// Failures are report entries, never exceptions.
KernelConditionReport check_kernel_conditions(const OperatorSpec& spec,
                                              const std::vector<double>& r_grid);

}  // namespace lab
