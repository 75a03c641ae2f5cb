#pragma once

#include <span>
#include <vector>

namespace emhd {

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row; explicit zeros are allowed and kept, so matrices assembled on a
/// common pattern can be combined entrywise through values().
class SparseMatrix {
 public:
  struct Triplet {
    int row;
    int col;
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
               std::vector<double> values);

  /// Duplicates are summed. Every listed position is kept, even if zero.
  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(col_idx_.size()); }

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Position of (r, c) in values(), or -1 when outside the pattern.
  int find(int r, int c) const;
  double coeff(int r, int c) const;
  /// Adds v at (r, c); throws std::out_of_range when (r, c) is not in the pattern.
  void add(int r, int c, double v);
  void set_zero();

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// y += a * A x
  void multiply_add(double a, std::span<const double> x, std::span<double> y) const;

  SparseMatrix transpose() const;
  bool same_pattern(const SparseMatrix& o) const;
  /// Pattern and value bits identical.
  bool bitwise_equal(const SparseMatrix& o) const;

  /// Row-major dense copy; intended for small test problems.
  std::vector<double> to_dense() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

}  // namespace emhd
