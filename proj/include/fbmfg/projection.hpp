#pragma once

// Euclidean projections onto
//   D_{R^4} = {(m, w) : -nu Lap m + div w = 0, h^2 sum m = 1}
//   D_K     = D_{R^4} intersected with {w_ij in K for every node}.

#include "fbmfg/grid.hpp"

#include <Eigen/Core>

#include <memory>

namespace fbmfg {

/// Projection onto the affine set {A x = b}.
///
/// The mass row of A is orthogonal to the PDE rows, so A A^T splits into the
/// PDE block B B^T and the scalar h^2. B B^T commutes with periodic shifts,
/// so it is diagonal in the 2D discrete Fourier basis; its symbol is read off
/// the response to a unit impulse. The kernel is the constants, i.e. the zero
/// frequency, which the zero-mean right-hand side never excites.
class AffineProjector {
 public:
  explicit AffineProjector(ConstraintOperator op);
  AffineProjector(int n, double nu) : AffineProjector(assemble_constraint(n, nu)) {}

  const ConstraintOperator& constraint() const { return op_; }
  int n() const { return op_.n; }
  Eigen::Index dim() const { return op_.A.cols(); }

  Vector project(const Vector& x) const;
  /// |A x - b|.
  double residual(const Vector& x) const;

 private:
  Vector correction(const Vector& r) const;
  Vector solve_normal(const Vector& r) const;

  ConstraintOperator op_;
  SparseMatrix pde_;  // B, the first N^2 rows of A
  Eigen::MatrixXd inv_symbol_;  // 1 / eigenvalue of B B^T per frequency, 0 at (0, 0)
};

Vector project_affine(const Vector& x, const AffineProjector& p);

struct DykstraConfig {
  double tol = 1e-10;         // on |x_k - x_{k-1}|
  double affine_tol = 1e-8;   // on |A x - b| of the returned point
  int max_inner = 10000;
  bool warm_start = true;

  void validate() const;
};

/// Cone correction carried between calls when warm starting.
struct DykstraState {
  Vector q;
  int last_inner = 0;
  long total_inner = 0;
};

/// Dykstra's alternating projections between the affine set and the cone
/// R^{N^2} x K^{N^2}. The cone projection is applied last, so w lies in K
/// exactly; the affine residual is checked against cfg.affine_tol.
/// Throws NonConvergenceError after cfg.max_inner sweeps.
Vector project_DK(const Vector& x, const AffineProjector& p, const DykstraConfig& cfg,
                  DykstraState* state = nullptr);

/// Clamps the w-blocks of a stacked vector to K node by node.
Vector project_cone_set(const Vector& x, int n);

}  // namespace fbmfg
