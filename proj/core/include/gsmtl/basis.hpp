#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "gsmtl/types.hpp"

namespace gsmtl {

/// Feature-map specification for basis expansion. The downstream model stays
/// linear in the expanded features, so this is a dataset preprocessing step
/// and never enters the solver.
struct BasisSpec {
    enum class Kind { Identity, PolynomialDegree2, PerColumnMaps };

    Kind kind = Kind::Identity;
    /// For PerColumnMaps: one monotone map per input column, applied elementwise.
    std::vector<std::function<double(double)>> column_maps;

    static BasisSpec identity() { return {}; }
    static BasisSpec polynomial_degree2() { return {Kind::PolynomialDegree2, {}}; }
    static BasisSpec per_column(std::vector<std::function<double(double)>> maps) {
        return {Kind::PerColumnMaps, std::move(maps)};
    }
};

/// Expand an n x d design matrix. Degree-2 appends all pairwise products
/// x_i*x_j (i <= j) after the original columns, giving d' = d + d(d+1)/2.
/// Throws DataError naming the row and column if any output is non-finite.
Eigen::MatrixXd basis_expand(const Eigen::MatrixXd& X, const BasisSpec& basis);

}  // namespace gsmtl
