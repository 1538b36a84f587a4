#pragma once
#include <functional>
#include <vector>

#include "error.hpp"

namespace phaseage {

using Vec = std::vector<double>;

// Small dense row-major matrix. Sizes here are tiny (a handful of phases, or
// (k+1)*m for stacked block systems), so everything is plain O(n^3) kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  bool square() const { return rows_ == cols_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Vec ones(int n);
Vec unit(int n, int j);  // zero-based index j
double dot(const Vec& a, const Vec& b);
Vec row_times(const Vec& r, const Matrix& a);   // r^T A as a vector
Vec times_col(const Matrix& a, const Vec& c);   // A c
double norm1(const Matrix& a);                  // max column sum of |.|
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);
bool all_finite(const Vec& v);

// LU factorization with partial pivoting of a general square matrix.
class LuFactors {
 public:
  explicit LuFactors(Matrix m);             // throws ErrorCode::singular on exact breakdown
  int dim() const { return n_; }
  double condition1() const;                // 1-norm condition number, exact inverse norm
  Vec solve(Vec b) const;                   // M^{-1} b
  Vec solve_transposed(Vec b) const;        // (M^T)^{-1} b, i.e. row solve b^T M^{-1}
  Matrix solve(const Matrix& b) const;      // columnwise

 private:
  int n_ = 0;
  Matrix lu_;
  std::vector<int> piv_;
  double norm1_m_ = 0.0;
};

// (-A)^{-1} B with a condition gate: errors (ErrorCode::singular) when the
// 1-norm condition estimate of (-A) exceeds 1e12.
Matrix solve_neg(const Matrix& a, const Matrix& b);
Vec solve_neg(const Matrix& a, const Vec& b);

// Factor (-A) once for repeated solves, applying the same condition gate.
LuFactors factor_neg(const Matrix& a);

// Matrix exponential e^{A t} by Pade scaling-and-squaring (degree 13 with
// lower-degree shortcuts for small norms).
Matrix expm(const Matrix& a, double t);

// Assemble a block upper bidiagonal matrix from square diagonal blocks and
// conformable superdiagonal blocks (super[i] couples diag[i] to diag[i+1]).
Matrix block_upper_bidiagonal(const std::vector<Matrix>& diag, const std::vector<Matrix>& super);

// Block (1, i) (1-based block index i) of e^{A s} where A is the block upper
// bidiagonal matrix assembled from diag/super.
Matrix carbonell_B1i(const std::vector<Matrix>& diag, const std::vector<Matrix>& super, double s,
                     int i);

// Adaptive Gauss-Kronrod 7/15 quadrature with absolute tolerance and optional
// interior breakpoints (integrand kinks/jumps). Errors (ErrorCode::numeric)
// when the subdivision budget is exhausted before reaching the tolerance.
double quadrature(const std::function<double(double)>& f, double a, double b, double tol,
                  const std::vector<double>& breakpoints = {});

// Entrywise matrix-valued variant sharing subdivisions across entries.
Matrix quadrature_matrix(const std::function<Matrix(double)>& f, double a, double b, double tol,
                         const std::vector<double>& breakpoints = {});

}  // namespace phaseage
