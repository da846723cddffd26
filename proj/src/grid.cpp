#include "fbmfg/grid.hpp"

#include "fbmfg/errors.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fbmfg {

namespace {

void require_size(int n) {
  if (n < 2) throw ContractError("grid size must be at least 2, got " + std::to_string(n));
}

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

}  // namespace

GridFunction::GridFunction(int n_) : n(n_) {
  require_size(n_);
  data = Vector::Zero(n_ * n_);
}

GridFunction::GridFunction(int n_, Vector values) : n(n_), data(std::move(values)) {
  require_size(n_);
  if (data.size() != n_ * n_) throw ContractError("grid function: wrong number of values");
}

GridFunction GridFunction::constant(int n_, double value) {
  return GridFunction(n_, Vector::Constant(n_ * n_, value));
}

VectorField::VectorField(int n_) : n(n_) {
  require_size(n_);
  data = Vector::Zero(4 * n_ * n_);
}

VectorField::VectorField(int n_, Vector values) : n(n_), data(std::move(values)) {
  require_size(n_);
  if (data.size() != 4 * n_ * n_) throw ContractError("vector field: wrong number of values");
}

Vec4 VectorField::at(int node) const {
  const int s = nodes();
  return Vec4(data[node], data[s + node], data[2 * s + node], data[3 * s + node]);
}

void VectorField::set(int node, const Vec4& value) {
  const int s = nodes();
  for (int k = 0; k < 4; ++k) data[k * s + node] = value[k];
}

GridFunction VectorField::component(int k) const {
  return GridFunction(n, data.segment(k * nodes(), nodes()));
}

GridFunction d1(const GridFunction& z) {
  GridFunction out(z.n);
  const double inv_h = z.n;
  for (int j = 0; j < z.n; ++j)
    for (int i = 0; i < z.n; ++i) out(i, j) = (z(i + 1, j) - z(i, j)) * inv_h;
  return out;
}

GridFunction d2(const GridFunction& z) {
  GridFunction out(z.n);
  const double inv_h = z.n;
  for (int j = 0; j < z.n; ++j)
    for (int i = 0; i < z.n; ++i) out(i, j) = (z(i, j + 1) - z(i, j)) * inv_h;
  return out;
}

VectorField dh(const GridFunction& z) {
  const GridFunction a = d1(z);
  const GridFunction b = d2(z);
  VectorField out(z.n);
  for (int j = 0; j < z.n; ++j) {
    for (int i = 0; i < z.n; ++i) {
      out(0, i, j) = a(i, j);
      out(1, i, j) = a(i - 1, j);
      out(2, i, j) = b(i, j);
      out(3, i, j) = b(i, j - 1);
    }
  }
  return out;
}

GridFunction laplacian_h(const GridFunction& z) {
  GridFunction out(z.n);
  const double inv_h2 = static_cast<double>(z.n) * z.n;
  for (int j = 0; j < z.n; ++j)
    for (int i = 0; i < z.n; ++i)
      out(i, j) = (z(i - 1, j) + z(i + 1, j) + z(i, j - 1) + z(i, j + 1) - 4.0 * z(i, j)) *
                  inv_h2;
  return out;
}

GridFunction div_h(const VectorField& w) {
  GridFunction out(w.n);
  const double inv_h = w.n;
  for (int j = 0; j < w.n; ++j) {
    for (int i = 0; i < w.n; ++i) {
      out(i, j) = ((w(0, i, j) - w(0, i - 1, j)) + (w(1, i + 1, j) - w(1, i, j)) +
                   (w(2, i, j) - w(2, i, j - 1)) + (w(3, i, j + 1) - w(3, i, j))) *
                  inv_h;
    }
  }
  return out;
}

SparseMatrix assemble_d1(int n) {
  require_size(n);
  std::vector<Triplet> t;
  const double inv_h = n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int r = node_index(n, i, j);
      t.emplace_back(r, node_index(n, i + 1, j), inv_h);
      t.emplace_back(r, r, -inv_h);
    }
  return from_triplets(n * n, n * n, t);
}

SparseMatrix assemble_d2(int n) {
  require_size(n);
  std::vector<Triplet> t;
  const double inv_h = n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int r = node_index(n, i, j);
      t.emplace_back(r, node_index(n, i, j + 1), inv_h);
      t.emplace_back(r, r, -inv_h);
    }
  return from_triplets(n * n, n * n, t);
}

SparseMatrix assemble_dh(int n) {
  require_size(n);
  const int s = n * n;
  const double inv_h = n;
  std::vector<Triplet> t;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int r = node_index(n, i, j);
      // (D1 z)_{i,j}
      t.emplace_back(r, node_index(n, i + 1, j), inv_h);
      t.emplace_back(r, r, -inv_h);
      // (D1 z)_{i-1,j}
      t.emplace_back(s + r, r, inv_h);
      t.emplace_back(s + r, node_index(n, i - 1, j), -inv_h);
      // (D2 z)_{i,j}
      t.emplace_back(2 * s + r, node_index(n, i, j + 1), inv_h);
      t.emplace_back(2 * s + r, r, -inv_h);
      // (D2 z)_{i,j-1}
      t.emplace_back(3 * s + r, r, inv_h);
      t.emplace_back(3 * s + r, node_index(n, i, j - 1), -inv_h);
    }
  }
  return from_triplets(4 * s, s, t);
}

SparseMatrix assemble_laplacian(int n) {
  require_size(n);
  std::vector<Triplet> t;
  const double inv_h2 = static_cast<double>(n) * n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int r = node_index(n, i, j);
      t.emplace_back(r, node_index(n, i - 1, j), inv_h2);
      t.emplace_back(r, node_index(n, i + 1, j), inv_h2);
      t.emplace_back(r, node_index(n, i, j - 1), inv_h2);
      t.emplace_back(r, node_index(n, i, j + 1), inv_h2);
      t.emplace_back(r, r, -4.0 * inv_h2);
    }
  return from_triplets(n * n, n * n, t);
}

SparseMatrix assemble_div(int n) {
  require_size(n);
  const int s = n * n;
  const double inv_h = n;
  std::vector<Triplet> t;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int r = node_index(n, i, j);
      t.emplace_back(r, r, inv_h);
      t.emplace_back(r, node_index(n, i - 1, j), -inv_h);
      t.emplace_back(r, s + node_index(n, i + 1, j), inv_h);
      t.emplace_back(r, s + r, -inv_h);
      t.emplace_back(r, 2 * s + r, inv_h);
      t.emplace_back(r, 2 * s + node_index(n, i, j - 1), -inv_h);
      t.emplace_back(r, 3 * s + node_index(n, i, j + 1), inv_h);
      t.emplace_back(r, 3 * s + r, -inv_h);
    }
  }
  return from_triplets(s, 4 * s, t);
}

ConstraintOperator assemble_constraint(int n, double nu) {
  require_size(n);
  if (!(nu >= 0.0)) throw ContractError("assemble_constraint: nu must be nonnegative");
  const int s = n * n;
  const double h2 = 1.0 / (static_cast<double>(n) * n);

  const SparseMatrix lap = assemble_laplacian(n);
  const SparseMatrix div = assemble_div(n);

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(lap.nonZeros() + div.nonZeros() + s));
  if (nu > 0.0) {
    for (int r = 0; r < lap.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(lap, r); it; ++it)
        t.emplace_back(r, it.col(), -nu * it.value());
  }
  for (int r = 0; r < div.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(div, r); it; ++it)
      t.emplace_back(r, s + it.col(), it.value());
  for (int c = 0; c < s; ++c) t.emplace_back(s, c, h2);

  ConstraintOperator op;
  op.n = n;
  op.nu = nu;
  op.A = from_triplets(s + 1, 5 * s, t);
  op.b = Vector::Zero(s + 1);
  op.b[s] = 1.0;
  return op;
}

Vector apply_constraint_direct(const GridFunction& m, const VectorField& w, double nu) {
  if (m.n != w.n) throw ContractError("apply_constraint_direct: grid sizes differ");
  const int s = m.nodes();
  Vector out(s + 1);
  out.head(s) = -nu * laplacian_h(m).data + div_h(w).data;
  out[s] = m.sum() * m.h() * m.h();
  return out;
}

Vector stack(const GridFunction& m, const VectorField& w) {
  if (m.n != w.n) throw ContractError("stack: grid sizes differ");
  Vector x(m.data.size() + w.data.size());
  x << m.data, w.data;
  return x;
}

GridFunction stacked_scalar(const Vector& x, int n) {
  if (x.size() != 5 * n * n) throw ContractError("stacked vector has the wrong length");
  return GridFunction(n, x.head(n * n));
}

VectorField stacked_field(const Vector& x, int n) {
  if (x.size() != 5 * n * n) throw ContractError("stacked vector has the wrong length");
  return VectorField(n, x.tail(4 * n * n));
}

namespace {

void write_block(std::ostream& os, int n, const double* values) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) os << ' ';
      os << values[node_index(n, i, j)];
    }
    os << '\n';
  }
}

int read_header(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && line.empty()) {
  }
  if (line.rfind("N=", 0) != 0) throw ContractError("grid dump: expected header 'N=<n>'");
  const int n = std::stoi(line.substr(2));
  require_size(n);
  return n;
}

void read_block(std::istream& is, int n, double* values) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(is >> values[node_index(n, i, j)]))
        throw ContractError("grid dump: truncated data");
}

}  // namespace

void write_grid(std::ostream& os, const GridFunction& z) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "N=" << z.n << '\n' << std::setprecision(17);
  write_block(os, z.n, z.data.data());
  os.flags(flags);
  os.precision(prec);
}

void write_grid(std::ostream& os, const VectorField& w) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "N=" << w.n << '\n' << std::setprecision(17);
  for (int k = 0; k < 4; ++k) write_block(os, w.n, w.data.data() + k * w.nodes());
  os.flags(flags);
  os.precision(prec);
}

GridFunction read_grid(std::istream& is) {
  GridFunction z(read_header(is));
  read_block(is, z.n, z.data.data());
  return z;
}

VectorField read_field(std::istream& is) {
  VectorField w(read_header(is));
  for (int k = 0; k < 4; ++k) read_block(is, w.n, w.data.data() + k * w.nodes());
  return w;
}

}  // namespace fbmfg
