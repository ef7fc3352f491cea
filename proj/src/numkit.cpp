#include "afsi/numkit.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "afsi/errors.hpp"
#include "afsi/vec2.hpp"

namespace afsi {

SparseMatrix SparseMatrix::assemble(std::span<const Triplet> triplets, int rows, int cols) {
  if (rows < 0 || cols < 0) throw AssemblyError("negative matrix dimensions");
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      std::ostringstream os;
      os << "triplet (" << t.row << ", " << t.col << ") out of range for " << rows << "x"
         << cols << " matrix";
      throw AssemblyError(os.str());
    }
  }

  // Counting sort by row, then a stable sort by column inside each row keeps
  // the summation order equal to the input order for duplicates.
  std::vector<int> count(rows + 1, 0);
  for (const auto& t : triplets) ++count[t.row + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<int> order(triplets.size());
  {
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < triplets.size(); ++k) order[fill[triplets[k].row]++] = static_cast<int>(k);
  }

  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (int r = 0; r < rows; ++r) {
    auto first = order.begin() + count[r];
    auto last = order.begin() + count[r + 1];
    std::stable_sort(first, last, [&](int a, int b) { return triplets[a].col < triplets[b].col; });
    for (auto it = first; it != last; ++it) {
      const auto& t = triplets[*it];
      if (static_cast<int>(m.col_idx_.size()) > m.row_ptr_[r] && m.col_idx_.back() == t.col) {
        m.values_.back() += t.value;
      } else {
        m.col_idx_.push_back(t.col);
        m.values_.push_back(t.value);
      }
    }
    m.row_ptr_[r + 1] = static_cast<int>(m.col_idx_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return assemble(t, n, n);
}

double SparseMatrix::at(int row, int col) const {
  auto first = col_idx_.begin() + row_ptr_[row];
  auto last = col_idx_.begin() + row_ptr_[row + 1];
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[it - col_idx_.begin()];
}

Vector SparseMatrix::apply(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != cols_) throw AssemblyError("apply: vector length does not match matrix columns");
  Vector out(rows_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * v[col_idx_[k]];
    out[r] = s;
  }
  return out;
}

Vector SparseMatrix::apply_transpose(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != rows_) throw AssemblyError("apply_transpose: vector length does not match matrix rows");
  Vector out(cols_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out[col_idx_[k]] += values_[k] * v[r];
  }
  return out;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({col_idx_[k], r, values_[k]});
  return assemble(t, cols_, rows_);
}

double SparseMatrix::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({r, col_idx_[k], values_[k]});
  return t;
}

struct LuSolver::Impl {
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> matrix;
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
};

LuSolver::LuSolver(const SparseMatrix& a) : impl_(std::make_unique<Impl>()), n_(a.rows()) {
  if (a.rows() != a.cols()) throw SolverError("LU factorization requires a square matrix");
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nonzeros());
  for (const auto& e : a.triplets()) t.emplace_back(e.row, e.col, e.value);
  impl_->matrix.resize(n_, n_);
  impl_->matrix.setFromTriplets(t.begin(), t.end());
  impl_->matrix.makeCompressed();
  if (n_ == 0) return;
  impl_->lu.analyzePattern(impl_->matrix);
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    std::ostringstream os;
    os << "sparse LU factorization failed (" << n_ << " unknowns): " << impl_->lu.lastErrorMessage();
    throw SolverError(os.str());
  }
}

LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

namespace {

void check_finite(const Vector& x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw SolverError(std::string(what) + ": non-finite solution (matrix numerically singular)");
  }
}

}  // namespace

// One step of iterative refinement against the stored matrix recovers
// accuracy lost to threshold pivoting.
Vector LuSolver::solve(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != n_) throw SolverError("solve: right-hand side length mismatch");
  if (n_ == 0) return {};
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n_);
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  Eigen::VectorXd r = rhs - impl_->matrix * x;
  x += impl_->lu.solve(r);
  Vector out(x.data(), x.data() + n_);
  check_finite(out, "solve");
  return out;
}

Vector LuSolver::solve_transpose(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != n_) throw SolverError("solve_transpose: right-hand side length mismatch");
  if (n_ == 0) return {};
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n_);
  Eigen::VectorXd x = impl_->lu.transpose().solve(rhs);
  Eigen::VectorXd r = rhs - impl_->matrix.transpose() * x;
  x += impl_->lu.transpose().solve(r);
  Vector out(x.data(), x.data() + n_);
  check_finite(out, "solve_transpose");
  return out;
}

SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> col_map(a.cols(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> t;
  const auto& ptr = a.row_offsets();
  const auto& idx = a.col_indices();
  const auto& val = a.values();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int k = ptr[rows[i]]; k < ptr[rows[i] + 1]; ++k) {
      int j = col_map[idx[k]];
      if (j >= 0) t.push_back({static_cast<int>(i), j, val[k]});
    }
  }
  return SparseMatrix::assemble(t, static_cast<int>(rows.size()), static_cast<int>(cols.size()));
}

Vector solve_direct(const SparseMatrix& a, std::span<const double> b) { return LuSolver(a).solve(b); }

Vector solve_transpose(const SparseMatrix& a, std::span<const double> b) {
  return LuSolver(a).solve_transpose(b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> flatten(const VecField& f) {
  std::vector<double> v(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    v[2 * i] = f[i].x;
    v[2 * i + 1] = f[i].y;
  }
  return v;
}

VecField unflatten(const std::vector<double>& v) {
  VecField f(v.size() / 2);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {v[2 * i], v[2 * i + 1]};
  return f;
}

double dot(const VecField& a, const VecField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

double norm(const VecField& a) { return std::sqrt(dot(a, a)); }

}  // namespace afsi
