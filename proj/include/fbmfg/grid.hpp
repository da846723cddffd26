#pragma once

// Periodic N x N grid on the unit torus and the finite-difference operators
// of the upwind MFG scheme.
//
// Layout: node (i, j) sits at x = (i h, j h), h = 1/N, and is stored at flat
// index i + N j (i fastest). Stacked vectors are ordered (m, w1, w2, w3, w4),
// each block of length N^2 in the node layout.

#include "fbmfg/convex.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>

namespace fbmfg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Flat node index with periodic wraparound.
inline int node_index(int n, int i, int j) {
  const int a = ((i % n) + n) % n;
  const int b = ((j % n) + n) % n;
  return a + n * b;
}

/// Real values on the periodic grid.
struct GridFunction {
  int n = 0;
  Vector data;

  GridFunction() = default;
  explicit GridFunction(int n_);
  GridFunction(int n_, Vector values);

  static GridFunction constant(int n_, double value);

  int nodes() const { return n * n; }
  double h() const { return 1.0 / n; }
  int index(int i, int j) const { return node_index(n, i, j); }

  double& operator()(int i, int j) { return data[index(i, j)]; }
  double operator()(int i, int j) const { return data[index(i, j)]; }

  double sum() const { return data.sum(); }
};

/// Four reals per node, stored as four consecutive blocks.
struct VectorField {
  int n = 0;
  Vector data;

  VectorField() = default;
  explicit VectorField(int n_);
  VectorField(int n_, Vector values);

  int nodes() const { return n * n; }
  int index(int i, int j) const { return node_index(n, i, j); }

  double& operator()(int k, int i, int j) { return data[k * nodes() + index(i, j)]; }
  double operator()(int k, int i, int j) const { return data[k * nodes() + index(i, j)]; }

  /// Per-node access by flat node index.
  Vec4 at(int node) const;
  void set(int node, const Vec4& value);

  GridFunction component(int k) const;
};

GridFunction d1(const GridFunction& z);
GridFunction d2(const GridFunction& z);
VectorField dh(const GridFunction& z);
GridFunction laplacian_h(const GridFunction& z);
GridFunction div_h(const VectorField& w);

/// Assembled counterparts of the operators above, acting on flat vectors.
SparseMatrix assemble_d1(int n);
SparseMatrix assemble_d2(int n);
SparseMatrix assemble_dh(int n);         // (4 N^2) x N^2
SparseMatrix assemble_laplacian(int n);  // N^2 x N^2
SparseMatrix assemble_div(int n);        // N^2 x (4 N^2)

/// Linear part of the feasible set: (m, w) -> (-nu Lap m + div w, h^2 sum m),
/// with right-hand side b = (0, ..., 0, 1).
struct ConstraintOperator {
  int n = 0;
  double nu = 0.0;
  SparseMatrix A;  // (N^2 + 1) x 5 N^2
  Vector b;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
  Vector apply(const Vector& stacked) const { return A * stacked; }
};

ConstraintOperator assemble_constraint(int n, double nu);

/// Constraint evaluated directly with the matrix-free stencils.
Vector apply_constraint_direct(const GridFunction& m, const VectorField& w,
                               double nu);

Vector stack(const GridFunction& m, const VectorField& w);
GridFunction stacked_scalar(const Vector& x, int n);
VectorField stacked_field(const Vector& x, int n);

/// Text dumps: "N=<n>" then N lines of N values (line i holds z(i, 0..N-1)),
/// printed with 17 significant digits. A vector field is written as four
/// such blocks after a single header.
void write_grid(std::ostream& os, const GridFunction& z);
void write_grid(std::ostream& os, const VectorField& w);
GridFunction read_grid(std::istream& is);
VectorField read_field(std::istream& is);

}  // namespace fbmfg
