#pragma once

#include <memory>
#include <span>
#include <vector>

namespace afsi {

using Vector = std::vector<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed-row sparse matrix. Immutable after assembly; entries within a
/// row are sorted by column and duplicates are summed, so assembly from the
/// same triplet list is bit-reproducible.
class SparseMatrix {
public:
  SparseMatrix() = default;

  /// Throws AssemblyError when a triplet index is out of range.
  static SparseMatrix assemble(std::span<const Triplet> triplets, int rows, int cols);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<int>& row_offsets() const { return row_ptr_; }
  const std::vector<int>& col_indices() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry lookup by binary search; zero when not stored.
  double at(int row, int col) const;

  Vector apply(std::span<const double> v) const;
  Vector apply_transpose(std::span<const double> v) const;
  SparseMatrix transposed() const;

  /// Frobenius norm.
  double norm() const;

  std::vector<Triplet> triplets() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// LU factorization of a square sparse matrix, reusable for many right-hand
/// sides and for transpose solves against the same factors.
class LuSolver {
public:
  /// Throws SolverError with pivot diagnostics when the matrix is singular.
  explicit LuSolver(const SparseMatrix& a);
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;

  int size() const { return n_; }
  Vector solve(std::span<const double> b) const;
  Vector solve_transpose(std::span<const double> b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

/// Block of `a` formed by the listed rows and columns, in list order.
SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols);

Vector solve_direct(const SparseMatrix& a, std::span<const double> b);
Vector solve_transpose(const SparseMatrix& a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace afsi
