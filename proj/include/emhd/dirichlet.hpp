#pragma once

#include <span>
#include <vector>

#include "emhd/sparse_matrix.hpp"

namespace emhd {

// Dirichlet conditions are imposed by row replacement: the row of each
// constrained dof becomes the identity row and its right-hand side entry the
// prescribed value. Columns are left untouched, so the system is not
// symmetrized; the direct solver does not need that.

void apply_dirichlet_rows(SparseMatrix& A, std::span<const int> dofs);

/// rhs[dofs[i]] = values[i]; throws std::invalid_argument on length mismatch.
void apply_dirichlet_values(std::span<double> rhs, std::span<const int> dofs, std::span<const double> values);

/// Rows of A plus one value list per right-hand-side column.
void apply_dirichlet(SparseMatrix& A, std::vector<std::vector<double>>& rhs_block, std::span<const int> dofs,
                     const std::vector<std::vector<double>>& values);

}  // namespace emhd
