#include <doctest.h>

#include <random>

#include "afsi/errors.hpp"
#include "afsi/numkit.hpp"
#include "oracles.hpp"

using namespace afsi;

namespace {

std::vector<Triplet> random_triplets(std::mt19937& rng, int n, int count) {
  std::uniform_int_distribution<int> idx(0, n - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int k = 0; k < count; ++k) t.push_back({idx(rng), idx(rng), val(rng)});
  return t;
}

oracle::Dense dense_from(const std::vector<Triplet>& t, int rows, int cols) {
  auto d = oracle::zeros(rows, cols);
  for (const auto& e : t) d[e.row][e.col] += e.value;
  return d;
}

}  // namespace

TEST_CASE("assemble sums duplicates") {
  std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}};
  auto a = SparseMatrix::assemble(t, 1, 1);
  CHECK(a.nonzeros() == 1);
  CHECK(a.at(0, 0) == 3.0);
}

TEST_CASE("identity apply") {
  auto a = SparseMatrix::identity(3);
  std::vector<double> v{1.5, -2.0, 7.0};
  CHECK(a.apply(v) == v);
}

TEST_CASE("assemble rejects out-of-range indices") {
  std::vector<Triplet> t{{0, 2, 1.0}};
  CHECK_THROWS_AS(SparseMatrix::assemble(t, 2, 2), AssemblyError);
  std::vector<Triplet> neg{{-1, 0, 1.0}};
  CHECK_THROWS_AS(SparseMatrix::assemble(neg, 2, 2), AssemblyError);
}

TEST_CASE("random assembly matches dense product") {
  std::mt19937 rng(7);
  auto t = random_triplets(rng, 5, 30);
  auto a = SparseMatrix::assemble(t, 5, 5);
  auto d = dense_from(t, 5, 5);
  std::vector<double> v{0.3, -1.2, 2.5, 0.7, -0.4};
  auto y = a.apply(v);
  auto yr = oracle::matvec(d, v);
  for (int i = 0; i < 5; ++i) CHECK(y[i] == doctest::Approx(yr[i]).epsilon(1e-14));
  // Entries sorted by column within each row.
  for (int r = 0; r < 5; ++r)
    for (int k = a.row_offsets()[r] + 1; k < a.row_offsets()[r + 1]; ++k)
      CHECK(a.col_indices()[k - 1] < a.col_indices()[k]);
}

TEST_CASE("apply_transpose equals explicitly transposed triplets") {
  std::mt19937 rng(11);
  auto t = random_triplets(rng, 6, 40);
  auto a = SparseMatrix::assemble(t, 6, 6);
  std::vector<Triplet> tt;
  for (const auto& e : t) tt.push_back({e.col, e.row, e.value});
  auto at = SparseMatrix::assemble(tt, 6, 6);
  std::vector<double> v{1, 2, 3, 4, 5, 6};
  CHECK(a.apply_transpose(v) == at.apply(v));
  CHECK(a.transposed().apply(v) == at.apply(v));
}

TEST_CASE("solve_direct trivial systems") {
  auto eye = SparseMatrix::identity(3);
  std::vector<double> b{1, 2, 3};
  auto x = solve_direct(eye, b);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(b[i]));
  std::vector<Triplet> t{{0, 0, 2.0}, {1, 1, 4.0}};
  auto d = SparseMatrix::assemble(t, 2, 2);
  std::vector<double> bd{2, 8};
  auto xd = solve_direct(d, bd);
  CHECK(xd[0] == doctest::Approx(1.0));
  CHECK(xd[1] == doctest::Approx(2.0));
}

TEST_CASE("random SPD solve matches dense elimination") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  const int n = 8;
  auto m = oracle::zeros(n, n);
  for (auto& row : m)
    for (auto& v : row) v = val(rng);
  auto spd = oracle::zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) spd[i][j] += m[k][i] * m[k][j];
      if (i == j) spd[i][j] += n;
    }
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.push_back({i, j, spd[i][j]});
  auto a = SparseMatrix::assemble(t, n, n);
  std::vector<double> b(n);
  for (auto& v : b) v = val(rng);
  auto x = solve_direct(a, b);
  auto xr = oracle::gauss_solve(spd, b);
  CHECK(oracle::rel_diff(x, xr) <= 1e-10);
  auto r = a.apply(x);
  for (int i = 0; i < n; ++i) r[i] -= b[i];
  CHECK(oracle::norm(r) / oracle::norm(b) <= 1e-10);
}

TEST_CASE("solve_transpose") {
  SUBCASE("hand-solvable upper triangular") {
    std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 1.0}};
    auto a = SparseMatrix::assemble(t, 2, 2);
    std::vector<double> b{1, 1};
    auto x = solve_transpose(a, b);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(-1.0));
  }
  SUBCASE("symmetric matrix gives the direct solution") {
    std::vector<Triplet> t{{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}};
    auto a = SparseMatrix::assemble(t, 2, 2);
    std::vector<double> b{1, 2};
    auto x = solve_transpose(a, b);
    auto y = solve_direct(a, b);
    CHECK(oracle::rel_diff(x, y) <= 1e-14);
  }
  SUBCASE("random matrix matches explicit transpose") {
    std::mt19937 rng(5);
    const int n = 6;
    auto t = random_triplets(rng, n, 20);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 4.0});
    auto a = SparseMatrix::assemble(t, n, n);
    std::vector<double> b{1, -2, 3, -4, 5, -6};
    auto x = solve_transpose(a, b);
    auto dt = oracle::transpose(dense_from(t, n, n));
    auto xr = oracle::gauss_solve(dt, b);
    CHECK(oracle::rel_diff(x, xr) <= 1e-10);
    auto xe = solve_direct(a.transposed(), b);
    CHECK(oracle::rel_diff(x, xe) <= 1e-12);
  }
}

TEST_CASE("singular matrix raises solver error") {
  std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
  auto a = SparseMatrix::assemble(t, 2, 2);
  std::vector<double> b{1, 2};
  CHECK_THROWS_AS(solve_direct(a, b), SolverError);
}

TEST_CASE("round trip at condition number 1e8") {
  // A = Q D Q^T with a Householder reflector Q and eigenvalues spread over 1..1e-8.
  const int n = 10;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.3 * i;
  const double vv = oracle::norm(v) * oracle::norm(v);
  auto q = oracle::zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q[i][j] = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * v[j] / vv;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q[i][k] * std::pow(10.0, -8.0 * k / (n - 1)) * q[j][k];
      t.push_back({i, j, s});
    }
  auto a = SparseMatrix::assemble(t, n, n);
  std::vector<double> b(n, 1.0);
  auto x = solve_direct(a, b);
  auto r = a.apply(x);
  for (int i = 0; i < n; ++i) r[i] -= b[i];
  // Normwise backward error; ||A|| = 1 for this construction.
  CHECK(oracle::norm(r) / (oracle::norm(x) + oracle::norm(b)) <= 1e-10);
}

TEST_CASE("submatrix picks rows and columns in order") {
  std::vector<Triplet> t{{0, 0, 1}, {0, 2, 2}, {1, 1, 3}, {2, 0, 4}, {2, 2, 5}};
  auto a = SparseMatrix::assemble(t, 3, 3);
  auto s = submatrix(a, {2, 0}, {2, 0});
  CHECK(s.at(0, 0) == 5);
  CHECK(s.at(0, 1) == 4);
  CHECK(s.at(1, 0) == 2);
  CHECK(s.at(1, 1) == 1);
}
