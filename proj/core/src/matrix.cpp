#include "mbf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mbf {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw InvalidArgument("matrix dimensions must be nonnegative");
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vec matvec(const Matrix& a, const Vec& v) {
  if (a.cols() != static_cast<int>(v.size())) throw DimensionMismatch("matvec: dimensions differ");
  Vec out(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

SpdMatrix::SpdMatrix(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidArgument("SpdMatrix dimension must be >= 1");
  data_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
}

SpdMatrix SpdMatrix::identity(int dim) {
  SpdMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SpdMatrix SpdMatrix::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("SpdMatrix requires a square matrix");
  double max_abs = 0.0;
  for (double v : m.data()) max_abs = std::max(max_abs, std::fabs(v));
  const double tol = 1e-12 * std::max(max_abs, 1e-300);
  SpdMatrix out(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i; j < m.cols(); ++j) {
      if (std::fabs(m(i, j) - m(j, i)) > tol)
        throw InvalidArgument("SpdMatrix::from_matrix: input is not symmetric");
      out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    }
  }
  return out;
}

void SpdMatrix::set(int i, int j, double v) {
  data_[static_cast<std::size_t>(i) * dim_ + j] = v;
  data_[static_cast<std::size_t>(j) * dim_ + i] = v;
}

Matrix SpdMatrix::to_matrix() const {
  Matrix m(dim_, dim_);
  m.data() = data_;
  return m;
}

Vec CholeskyFactor::solve_lower(const Vec& b) const {
  const int n = l_.rows();
  if (static_cast<int>(b.size()) != n) throw DimensionMismatch("solve_lower: size mismatch");
  Vec w(b);
  for (int i = 0; i < n; ++i) {
    double s = w[i];
    for (int j = 0; j < i; ++j) s -= l_(i, j) * w[j];
    w[i] = s / l_(i, i);
  }
  return w;
}

Vec CholeskyFactor::solve(const Vec& b) const {
  const int n = l_.rows();
  Vec x = solve_lower(b);
  // back substitution with L^T
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= l_(j, i) * x[j];
    x[i] = s / l_(i, i);
  }
  return x;
}

Matrix CholeskyFactor::solve_matrix(const Matrix& b) const {
  const int n = l_.rows();
  if (b.rows() != n) throw DimensionMismatch("solve_matrix: size mismatch");
  Matrix x(n, b.cols());
  Vec col(n);
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < n; ++i) col[i] = b(i, j);
    Vec sol = solve(col);
    for (int i = 0; i < n; ++i) x(i, j) = sol[i];
  }
  return x;
}

CholeskyFactor cholesky(const SpdMatrix& m) {
  const int n = m.dim();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw NotPositiveDefinite("cholesky: nonpositive pivot");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

double quad_form_inv(const Vec& v, const CholeskyFactor& chol) {
  const Vec w = chol.solve_lower(v);
  double s = 0.0;
  for (double x : w) s += x * x;
  return s;
}

double quad_form_inv(const Vec& v, const SpdMatrix& m) {
  if (static_cast<int>(v.size()) != m.dim()) throw DimensionMismatch("quad_form_inv: size mismatch");
  return quad_form_inv(v, cholesky(m));
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenDecomp sym_eigen(const SpdMatrix& m) {
  const int n = m.dim();
  Matrix a = m.to_matrix();
  Matrix v = Matrix::identity(n);
  const double scale = frobenius_norm(a);

  if (n > 1 && scale > 0.0) {
    const double target = 1e-12 * scale;
    bool converged = false;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          double t;
          if (std::fabs(theta) > 1e150) {
            t = 0.5 / theta;
          } else {
            t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
            if (theta < 0.0) t = -t;
          }
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const double app = a(p, p);
          const double aqq = a(q, q);
          a(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
          a(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          for (int r = 0; r < n; ++r) {
            if (r == p || r == q) continue;
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = c * arp - s * arq;
            a(p, r) = a(r, p);
            a(r, q) = s * arp + c * arq;
            a(q, r) = a(r, q);
          }
          for (int r = 0; r < n; ++r) {
            const double vrp = v(r, p);
            const double vrq = v(r, q);
            v(r, p) = c * vrp - s * vrq;
            v(r, q) = s * vrp + c * vrq;
          }
        }
      }
      converged = off_diagonal_norm(a) <= target;
    }
    if (!converged) throw ConvergenceFailure("sym_eigen: Jacobi sweeps did not converge");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) > a(j, j); });

  EigenDecomp out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

double trace(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("trace: matrix must be square");
  double s = 0.0;
  for (int i = 0; i < m.rows(); ++i) s += m(i, i);
  return s;
}

double trace(const SpdMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i) s += m(i, i);
  return s;
}

double trace_product(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows() || b.cols() != a.rows())
    throw DimensionMismatch("trace_product: dimensions incompatible");
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * b(j, i);
  return s;
}

double trace_product(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("trace_product: dimensions differ");
  double s = 0.0;
  const int n = a.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += a(i, j) * b(j, i);
  return s;
}

SpdMatrix mat_add_scaled(const SpdMatrix& a, double alpha, const SpdMatrix& b, double beta) {
  if (a.dim() != b.dim()) throw DimensionMismatch("mat_add_scaled: dimensions differ");
  SpdMatrix out(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) out.set(i, j, alpha * a(i, j) + beta * b(i, j));
  return out;
}

SpdMatrix scaled(const SpdMatrix& a, double c) {
  SpdMatrix out(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) out.set(i, j, c * a(i, j));
  return out;
}

}  // namespace mbf
