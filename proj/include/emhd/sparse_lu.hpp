#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "emhd/sparse_matrix.hpp"

namespace emhd {

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fill-reducing ordering and symbolic factorization of a sparsity pattern.
/// Reusable for every matrix with the same pattern.
class SymbolicAnalysis {
 public:
  explicit SymbolicAnalysis(const SparseMatrix& A);
  ~SymbolicAnalysis();
  SymbolicAnalysis(const SymbolicAnalysis&) = delete;
  SymbolicAnalysis& operator=(const SymbolicAnalysis&) = delete;

  bool matches(const SparseMatrix& A) const;
  void* handle() const { return symbolic_; }

 private:
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  int n_ = 0;
  void* symbolic_ = nullptr;
};

/// Sparse LU factorization (UMFPACK) of a square matrix, immutable after
/// construction. Solves against one factorization are independent of each
/// other and may run concurrently.
class SparseLU {
 public:
  /// Throws SingularMatrixError when a zero pivot is met or the reciprocal
  /// pivot-ratio estimate is below `rcond_floor`.
  explicit SparseLU(const SparseMatrix& A, std::shared_ptr<const SymbolicAnalysis> symbolic = nullptr,
                    double rcond_floor = 1e-15);
  ~SparseLU();
  SparseLU(SparseLU&& o) noexcept;
  SparseLU& operator=(SparseLU&& o) noexcept;
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  int size() const { return n_; }
  double rcond() const { return rcond_; }
  const std::shared_ptr<const SymbolicAnalysis>& symbolic() const { return symbolic_; }

  /// Correction solves are added while the componentwise backward error
  /// exceeds 1e-14 (at most three), so the result is a deterministic
  /// function of b.
  std::vector<double> solve(std::span<const double> b) const;
  /// Column j of the result solves A x_j = B_j; columns are solved in order
  /// and independently, so the result matches separate solve() calls bitwise.
  std::vector<std::vector<double>> solve_block(const std::vector<std::vector<double>>& B) const;

 private:
  void release();

  int n_ = 0;
  SparseMatrix A_;
  std::shared_ptr<const SymbolicAnalysis> symbolic_;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

inline SparseLU factorize(const SparseMatrix& A) { return SparseLU(A); }

/// ||A x - b|| / ||b|| (or ||A x - b|| when b = 0).
double relative_residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b);

}  // namespace emhd
