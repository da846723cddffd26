#include "fbmfg/projection.hpp"

#include "fbmfg/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace fbmfg {

namespace {

using Complex = std::complex<double>;

// 2D DFT of a real n x n grid stored i fastest, keeping the half spectrum
// i = 0..n/2 (the rest follows by conjugate symmetry). Output layout i + (n/2+1) j.
std::vector<Complex> rfft2(const Vector& a, int n) {
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  const int half = n / 2 + 1;
  std::vector<Complex> spec(static_cast<std::size_t>(half) * n);
  std::vector<double> rin(n);
  std::vector<Complex> cin(n), cout(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) rin[i] = a[i + n * j];
    fft.fwd(cout, rin);
    for (int i = 0; i < half; ++i) spec[i + half * j] = cout[i];
  }
  for (int i = 0; i < half; ++i) {
    for (int j = 0; j < n; ++j) cin[j] = spec[i + half * j];
    fft.fwd(cout, cin);
    for (int j = 0; j < n; ++j) spec[i + half * j] = cout[j];
  }
  return spec;
}

Vector irfft2(std::vector<Complex> spec, int n) {
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  const int half = n / 2 + 1;
  std::vector<Complex> cin(n), cout(n);
  for (int i = 0; i < half; ++i) {
    for (int j = 0; j < n; ++j) cin[j] = spec[i + half * j];
    fft.inv(cout, cin);
    for (int j = 0; j < n; ++j) spec[i + half * j] = cout[j];
  }
  Vector out(n * n);
  std::vector<double> rout(n);
  for (int j = 0; j < n; ++j) {
    cin.assign(spec.begin() + half * j, spec.begin() + half * (j + 1));
    fft.inv(rout, cin, n);
    for (int i = 0; i < n; ++i) out[i + n * j] = rout[i];
  }
  return out;
}

}  // namespace

AffineProjector::AffineProjector(ConstraintOperator op) : op_(std::move(op)) {
  const int n = op_.n;
  const int s = n * n;
  pde_ = op_.A.topRows(s);

  Vector impulse = Vector::Zero(s);
  impulse[0] = 1.0;
  const Vector column = pde_ * (pde_.transpose() * impulse);
  const std::vector<Complex> symbol = rfft2(column, n);

  const int half = n / 2 + 1;
  inv_symbol_.resize(half, n);
  const double scale = column.cwiseAbs().sum() + 1.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < half; ++i) {
      const double ev = symbol[i + half * j].real();
      if (i == 0 && j == 0) {
        inv_symbol_(i, j) = 0.0;
        continue;
      }
      if (!(ev > 1e-13 * scale))
        throw NumericalError("affine projector: normal operator is singular off the constants");
      inv_symbol_(i, j) = 1.0 / ev;
    }
  }
}

Vector AffineProjector::solve_normal(const Vector& r) const {
  const int n = op_.n;
  const int half = n / 2 + 1;
  std::vector<Complex> spec = rfft2(r, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < half; ++i) spec[i + half * j] *= inv_symbol_(i, j);
  return irfft2(std::move(spec), n);
}

Vector AffineProjector::correction(const Vector& r) const {
  const int s = op_.n * op_.n;
  // Remove the component of the PDE residual outside range(B).
  Vector rp = r.head(s);
  rp.array() -= rp.mean();
  const Vector lambda = solve_normal(rp);
  Vector out = pde_.transpose() * lambda;
  // Mass row: a = h^2 (1, 0), |a|^2 = h^4 N^2 = h^2.
  out.head(s).array() += r[s];
  return out;
}

Vector AffineProjector::project(const Vector& x) const {
  if (x.size() != dim()) throw ContractError("project_affine: point has the wrong dimension");
  Vector out = x - correction(op_.A * x - op_.b);
  const double bound = 1e-10 * (1.0 + op_.b.norm());
  Vector r = op_.A * out - op_.b;
  double res = r.norm();
  if (res > bound) {
    // One step of iterative refinement absorbs the rounding of large inputs.
    out -= correction(r);
    if (!out.allFinite()) res = std::numeric_limits<double>::quiet_NaN();
  }
  if (!std::isfinite(res)) throw NumericalError("project_affine: non-finite residual");
  return out;
}

double AffineProjector::residual(const Vector& x) const { return (op_.A * x - op_.b).norm(); }

Vector project_affine(const Vector& x, const AffineProjector& p) { return p.project(x); }

void DykstraConfig::validate() const {
  if (!(tol > 0.0)) throw ContractError("dykstra: tol must be positive");
  if (!(affine_tol > 0.0)) throw ContractError("dykstra: affine_tol must be positive");
  if (max_inner <= 0) throw ContractError("dykstra: max_inner must be positive");
}

Vector project_cone_set(const Vector& x, int n) {
  const int s = n * n;
  if (x.size() != 5 * s) throw ContractError("project_cone_set: wrong dimension");
  Vector out = x;
  for (int k = 0; k < s; ++k) {
    out[s + k] = std::max(out[s + k], 0.0);
    out[2 * s + k] = std::min(out[2 * s + k], 0.0);
    out[3 * s + k] = std::max(out[3 * s + k], 0.0);
    out[4 * s + k] = std::min(out[4 * s + k], 0.0);
  }
  return out;
}

Vector project_DK(const Vector& x0, const AffineProjector& p, const DykstraConfig& cfg,
                  DykstraState* state) {
  cfg.validate();
  if (x0.size() != p.dim()) throw ContractError("project_DK: point has the wrong dimension");
  const int n = p.n();

  // The affine set needs no correction term; only the cone's is carried.
  Vector q = Vector::Zero(x0.size());
  if (state && cfg.warm_start && state->q.size() == x0.size()) q = state->q;

  Vector x;
  double change = std::numeric_limits<double>::infinity();
  double res = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cfg.max_inner; ++k) {
    const Vector y = p.project(x0 - q);
    const Vector z = y + q;
    Vector next = project_cone_set(z, n);
    q = z - next;
    change = x.size() ? (next - x).norm() : std::numeric_limits<double>::infinity();
    x = std::move(next);
    if (change <= cfg.tol) {
      res = p.residual(x);
      if (res <= cfg.affine_tol) {
        if (state) {
          state->q = q;
          state->last_inner = k;
          state->total_inner += k;
        }
        return x;
      }
    }
  }
  res = p.residual(x);
  throw NonConvergenceError("project_DK: no convergence after " + std::to_string(cfg.max_inner) +
                                " sweeps (change " + std::to_string(change) + ", residual " +
                                std::to_string(res) + ")",
                            change, res);
}

}  // namespace fbmfg
