#pragma once

#include <Eigen/Core>
#include <optional>

#include "lab/form.hpp"
#include "lab/green.hpp"

namespace lab {

enum class RhoSource { constant, principal_eigenfunction, user };

/// Excessive weight rho and the companion varrho with R varrho <= rho.
struct WeightPair {
    Eigen::VectorXd rho;
    Eigen::VectorXd varrho;
    RhoSource source = RhoSource::constant;
};

/// rho = 1, the principal eigenvector of B (normalized to max 1), or a
/// user-supplied vector; varrho is the largest multiple c rho, c <= 1, with
/// R varrho <= rho. Validates excessivity (B rho >= -1e-12) and the varrho
/// domination componentwise.
WeightPair weights(const FormMatrix& form, RhoSource source, const GreenOperator& g,
                   const std::optional<Eigen::VectorXd>& user_rho = std::nullopt);

}  // namespace lab
