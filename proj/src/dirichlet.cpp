#include "emhd/dirichlet.hpp"

#include <stdexcept>
#include <string>

namespace emhd {

void apply_dirichlet_rows(SparseMatrix& A, std::span<const int> dofs) {
  auto values = A.values();
  const auto row_ptr = A.row_ptr();
  const auto cols = A.col_idx();
  for (int d : dofs) {
    if (d < 0 || d >= A.rows()) throw std::out_of_range("apply_dirichlet_rows: dof out of range");
    bool has_diagonal = false;
    for (int k = row_ptr[d]; k < row_ptr[d + 1]; ++k) {
      values[k] = cols[k] == d ? 1.0 : 0.0;
      has_diagonal = has_diagonal || cols[k] == d;
    }
    if (!has_diagonal) throw std::invalid_argument("apply_dirichlet_rows: diagonal entry missing from pattern");
  }
}

void apply_dirichlet_values(std::span<double> rhs, std::span<const int> dofs, std::span<const double> values) {
  if (dofs.size() != values.size()) {
    throw std::invalid_argument("apply_dirichlet_values: " + std::to_string(values.size()) + " values for " +
                                std::to_string(dofs.size()) + " constrained dofs");
  }
  for (std::size_t i = 0; i < dofs.size(); ++i) rhs[dofs[i]] = values[i];
}

void apply_dirichlet(SparseMatrix& A, std::vector<std::vector<double>>& rhs_block, std::span<const int> dofs,
                     const std::vector<std::vector<double>>& values) {
  if (values.size() != rhs_block.size()) {
    throw std::invalid_argument("apply_dirichlet: one value list per right-hand side is required");
  }
  apply_dirichlet_rows(A, dofs);
  for (std::size_t j = 0; j < rhs_block.size(); ++j) apply_dirichlet_values(rhs_block[j], dofs, values[j]);
}

}  // namespace emhd
