#ifndef CVQKD_MAT_HPP
#define CVQKD_MAT_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvqkd {

// Thrown when an input state violates physicality (uncertainty principle,
// non-positive variances, unphysical parameter combinations).
class unphysical_error : public std::runtime_error {
public:
  explicit unphysical_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative routine fails to converge or a computation
// degenerates (singular system, empty bracket, ...).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Small dense row-major matrix. Everything in this library is <= ~30x30,
// so simplicity beats cleverness.
class Mat {
public:
  Mat() : rows_(0), cols_(0) {}
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative dimension");
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  Mat transposed() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Mat: dimension mismatch in product");
    Mat c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Mat operator+(const Mat& a, const Mat& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument("Mat: dimension mismatch in sum");
    Mat c = a;
    for (size_t i = 0; i < c.a_.size(); ++i) c.a_[i] += b.a_[i];
    return c;
  }

  friend Mat operator-(const Mat& a, const Mat& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument("Mat: dimension mismatch in difference");
    Mat c = a;
    for (size_t i = 0; i < c.a_.size(); ++i) c.a_[i] -= b.a_[i];
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_symmetric(double rel_tol = 1e-10) const {
    if (rows_ != cols_) return false;
    const double scale = std::max(max_abs(), 1.0);
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > rel_tol * scale) return false;
    return true;
  }

  void symmetrize() {
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j) {
        const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = v;
        (*this)(j, i) = v;
      }
  }

private:
  int rows_, cols_;
  std::vector<double> a_;
};

// Cholesky factor L (lower triangular) with A = L L^T. Throws if A is not
// positive definite.
inline Mat cholesky(const Mat& a) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky: square matrix required");
  Mat l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw unphysical_error("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(Mat a, std::vector<double> b) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("solve_linear: dimension mismatch");
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-300) throw numerical_error("solve_linear: singular system");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

// Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.
// Optionally accumulates eigenvectors (columns of *vecs).
inline std::vector<double> jacobi_eigenvalues(Mat a, Mat* vecs = nullptr) {
  const int n = a.rows();
  if (!a.is_symmetric(1e-8)) throw std::invalid_argument("jacobi_eigenvalues: matrix not symmetric");
  a.symmetrize();
  if (vecs) *vecs = Mat::identity(n);
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < 1e-14 * scale) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        if (vecs)
          for (int k = 0; k < n; ++k) {
            const double vkp = (*vecs)(k, p), vkq = (*vecs)(k, q);
            (*vecs)(k, p) = c * vkp - s * vkq;
            (*vecs)(k, q) = s * vkp + c * vkq;
          }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  // insertion sort, keeping eigenvector columns in step
  for (int i = 1; i < n; ++i)
    for (int j = i; j > 0 && ev[j - 1] > ev[j]; --j) {
      std::swap(ev[j - 1], ev[j]);
      if (vecs)
        for (int k = 0; k < n; ++k) std::swap((*vecs)(k, j - 1), (*vecs)(k, j));
    }
  return ev;
}

// Singular values (descending) by one-sided Jacobi orthogonalization of the
// columns. Delivers high relative accuracy for small singular values, which
// matters when near-pure states are represented with large matrix entries.
inline std::vector<double> singular_values(Mat a) {
  const int m = a.rows(), n = a.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n - 1; ++i)
      for (int j = i + 1; j < n; ++j) {
        double aii = 0.0, ajj = 0.0, aij = 0.0;
        for (int k = 0; k < m; ++k) {
          aii += a(k, i) * a(k, i);
          ajj += a(k, j) * a(k, j);
          aij += a(k, i) * a(k, j);
        }
        if (aii == 0.0 || ajj == 0.0) continue;
        const double rel = std::abs(aij) / std::sqrt(aii * ajj);
        if (rel < 1e-16) continue;
        off = std::max(off, rel);
        const double zeta = (ajj - aii) / (2.0 * aij);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int k = 0; k < m; ++k) {
          const double aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
      }
    if (off < 1e-15) break;
  }
  std::vector<double> sv(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += a(k, j) * a(k, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

}  // namespace cvqkd

#endif  // CVQKD_MAT_HPP
