#include "dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

namespace phaseage {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  require(rows >= 0 && cols >= 0, ErrorCode::invalid_argument, "matrix dimensions must be nonnegative");
  a_.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0);
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::invalid_argument,
          std::string("shape mismatch in matrix ") + op);
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "addition");
  Matrix r(a.rows(), a.cols());
  const size_t n = static_cast<size_t>(a.rows()) * a.cols();
  for (size_t i = 0; i < n; ++i) r.data()[i] = a.data()[i] + b.data()[i];
  return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtraction");
  Matrix r(a.rows(), a.cols());
  const size_t n = static_cast<size_t>(a.rows()) * a.cols();
  for (size_t i = 0; i < n; ++i) r.data()[i] = a.data()[i] - b.data()[i];
  return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorCode::invalid_argument, "inner dimension mismatch in matrix product");
  Matrix r(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  }
  return r;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix r(a.rows(), a.cols());
  const size_t n = static_cast<size_t>(a.rows()) * a.cols();
  for (size_t i = 0; i < n; ++i) r.data()[i] = s * a.data()[i];
  return r;
}

Vec ones(int n) { return Vec(static_cast<size_t>(n), 1.0); }

Vec unit(int n, int j) {
  require(j >= 0 && j < n, ErrorCode::invalid_argument, "unit vector index out of range");
  Vec v(static_cast<size_t>(n), 0.0);
  v[j] = 1.0;
  return v;
}

double dot(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), ErrorCode::invalid_argument, "vector length mismatch in dot product");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec row_times(const Vec& r, const Matrix& a) {
  require(static_cast<int>(r.size()) == a.rows(), ErrorCode::invalid_argument,
          "row vector length mismatch");
  Vec out(static_cast<size_t>(a.cols()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double ri = r[i];
    if (ri == 0.0) continue;
    for (int j = 0; j < a.cols(); ++j) out[j] += ri * a(i, j);
  }
  return out;
}

Vec times_col(const Matrix& a, const Vec& c) {
  require(static_cast<int>(c.size()) == a.cols(), ErrorCode::invalid_argument,
          "column vector length mismatch");
  Vec out(static_cast<size_t>(a.rows()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * c[j];
    out[i] = s;
  }
  return out;
}

double norm1(const Matrix& a) {
  double best = 0.0;
  for (int j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_abs(const Matrix& a) {
  double best = 0.0;
  const size_t n = static_cast<size_t>(a.rows()) * a.cols();
  for (size_t i = 0; i < n; ++i) best = std::max(best, std::abs(a.data()[i]));
  return best;
}

bool all_finite(const Matrix& a) {
  const size_t n = static_cast<size_t>(a.rows()) * a.cols();
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(a.data()[i])) return false;
  return true;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting.

LuFactors::LuFactors(Matrix m) {
  require(m.square(), ErrorCode::invalid_argument, "LU factorization requires a square matrix");
  require(all_finite(m), ErrorCode::invalid_argument, "LU factorization requires finite entries");
  n_ = m.rows();
  norm1_m_ = norm1(m);
  piv_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    int p = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < n_; ++i) {
      const double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    require(best > 0.0, ErrorCode::singular, "matrix is singular (zero pivot in LU)");
    piv_[k] = p;
    if (p != k)
      for (int j = 0; j < n_; ++j) std::swap(m(k, j), m(p, j));
    const double inv_piv = 1.0 / m(k, k);
    for (int i = k + 1; i < n_; ++i) {
      const double l = m(i, k) * inv_piv;
      m(i, k) = l;
      if (l == 0.0) continue;
      for (int j = k + 1; j < n_; ++j) m(i, j) -= l * m(k, j);
    }
  }
  lu_ = std::move(m);
}

Vec LuFactors::solve(Vec b) const {
  require(static_cast<int>(b.size()) == n_, ErrorCode::invalid_argument, "rhs length mismatch");
  for (int k = 0; k < n_; ++k)
    if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
  for (int i = 1; i < n_; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= lu_(i, j) * b[j];
    b[i] = s;
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n_; ++j) s -= lu_(i, j) * b[j];
    b[i] = s / lu_(i, i);
  }
  return b;
}

Vec LuFactors::solve_transposed(Vec b) const {
  require(static_cast<int>(b.size()) == n_, ErrorCode::invalid_argument, "rhs length mismatch");
  // M = P^T L U  =>  M^T x = b solved as U^T z = b, L^T w = z, x = P^T w.
  for (int i = 0; i < n_; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= lu_(j, i) * b[j];
    b[i] = s / lu_(i, i);
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n_; ++j) s -= lu_(j, i) * b[j];
    b[i] = s;
  }
  for (int k = n_ - 1; k >= 0; --k)
    if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
  return b;
}

Matrix LuFactors::solve(const Matrix& b) const {
  require(b.rows() == n_, ErrorCode::invalid_argument, "rhs row count mismatch");
  Matrix x(n_, b.cols());
  Vec col(static_cast<size_t>(n_));
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < n_; ++i) col[i] = b(i, j);
    Vec s = solve(col);
    for (int i = 0; i < n_; ++i) x(i, j) = s[i];
  }
  return x;
}

double LuFactors::condition1() const {
  // Exact 1-norm of the inverse via n unit-vector solves; matrices here are tiny.
  double inv_norm = 0.0;
  for (int j = 0; j < n_; ++j) {
    Vec x = solve(unit(n_, j));
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    inv_norm = std::max(inv_norm, s);
  }
  return norm1_m_ * inv_norm;
}

static Matrix negate(const Matrix& a) { return -1.0 * a; }

LuFactors factor_neg(const Matrix& a) {
  require(a.square(), ErrorCode::invalid_argument, "solve_neg requires a square matrix");
  LuFactors lu(negate(a));
  const double cond = lu.condition1();
  require(std::isfinite(cond) && cond <= 1e12, ErrorCode::singular,
          "matrix is singular or too ill-conditioned (condition estimate " + std::to_string(cond) +
              " exceeds 1e12)");
  return lu;
}

Matrix solve_neg(const Matrix& a, const Matrix& b) { return factor_neg(a).solve(b); }

Vec solve_neg(const Matrix& a, const Vec& b) { return factor_neg(a).solve(b); }

// ---------------------------------------------------------------------------
// Matrix exponential: Pade approximants with scaling and squaring.

namespace {

// Numerator coefficients of the diagonal Pade approximants used by the
// scaling-and-squaring method, with the matching norm thresholds.
const double kPade3[] = {120.0, 60.0, 12.0, 1.0};
const double kPade5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
const double kPade7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
const double kPade9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                         2162160.0,     110880.0,     3960.0,       90.0,        1.0};
const double kPade13[] = {64764752532480000.0,
                          32382376266240000.0,
                          7771770303897600.0,
                          1187353796428800.0,
                          129060195264000.0,
                          10559470521600.0,
                          670442572800.0,
                          33522128640.0,
                          1323241920.0,
                          40840800.0,
                          960960.0,
                          16380.0,
                          182.0,
                          1.0};
const double kTheta3 = 1.495585217958292e-2;
const double kTheta5 = 2.539398330063230e-1;
const double kTheta7 = 9.504178996162932e-1;
const double kTheta9 = 2.097847961257068e0;
const double kTheta13 = 5.371920351148152e0;

Matrix pade_solve(const Matrix& u, const Matrix& v) {
  // r = (v - u)^{-1} (v + u)
  LuFactors lu(v - u);
  return lu.solve(v + u);
}

Matrix pade_low(const Matrix& m, const Matrix& m2, const Matrix& m4, const Matrix& m6,
                const double* b, int degree) {
  const int n = m.rows();
  Matrix even(n, n), odd_poly(n, n);
  const Matrix id = Matrix::identity(n);
  auto add_scaled = [&](Matrix& acc, double c, const Matrix& term) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc(i, j) += c * term(i, j);
  };
  add_scaled(even, b[0], id);
  add_scaled(odd_poly, b[1], id);
  if (degree >= 3) {
    add_scaled(even, b[2], m2);
    add_scaled(odd_poly, b[3], m2);
  }
  if (degree >= 5) {
    add_scaled(even, b[4], m4);
    add_scaled(odd_poly, b[5], m4);
  }
  if (degree >= 7) {
    add_scaled(even, b[6], m6);
    add_scaled(odd_poly, b[7], m6);
  }
  if (degree >= 9) {
    const Matrix m8 = m6 * m2;
    add_scaled(even, b[8], m8);
    add_scaled(odd_poly, b[9], m8);
  }
  const Matrix u = m * odd_poly;
  return pade_solve(u, even);
}

Matrix pade13(const Matrix& m, const Matrix& m2, const Matrix& m4, const Matrix& m6) {
  const int n = m.rows();
  const double* b = kPade13;
  const Matrix id = Matrix::identity(n);
  auto poly = [&](double c6, double c4, double c2) {
    Matrix r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        r(i, j) = c6 * m6(i, j) + c4 * m4(i, j) + c2 * m2(i, j);
    return r;
  };
  Matrix w1 = poly(b[13], b[11], b[9]);
  Matrix w2 = poly(b[7], b[5], b[3]);
  for (int i = 0; i < n; ++i) w2(i, i) += b[1];
  const Matrix u = m * (m6 * w1 + w2);
  Matrix z1 = poly(b[12], b[10], b[8]);
  Matrix z2 = poly(b[6], b[4], b[2]);
  for (int i = 0; i < n; ++i) z2(i, i) += b[0];
  const Matrix v = m6 * z1 + z2;
  return pade_solve(u, v);
}

}  // namespace

Matrix expm(const Matrix& a, double t) {
  require(a.square(), ErrorCode::invalid_argument, "expm requires a square matrix");
  require(std::isfinite(t), ErrorCode::invalid_argument, "expm requires finite t");
  require(all_finite(a), ErrorCode::invalid_argument, "expm requires finite entries");
  const int n = a.rows();
  if (n == 0) return Matrix(0, 0);
  Matrix m = t * a;
  const double nrm = norm1(m);
  if (nrm == 0.0) return Matrix::identity(n);

  int squarings = 0;
  if (nrm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / kTheta13)));
    m = std::ldexp(1.0, -squarings) * m;
  }
  const Matrix m2 = m * m;
  const Matrix m4 = m2 * m2;
  const Matrix m6 = m4 * m2;

  Matrix r;
  if (nrm <= kTheta3)
    r = pade_low(m, m2, m4, m6, kPade3, 3);
  else if (nrm <= kTheta5)
    r = pade_low(m, m2, m4, m6, kPade5, 5);
  else if (nrm <= kTheta7)
    r = pade_low(m, m2, m4, m6, kPade7, 7);
  else if (nrm <= kTheta9)
    r = pade_low(m, m2, m4, m6, kPade9, 9);
  else
    r = pade13(m, m2, m4, m6);

  for (int i = 0; i < squarings; ++i) r = r * r;
  require(all_finite(r), ErrorCode::numeric, "expm produced non-finite entries");
  return r;
}

// ---------------------------------------------------------------------------
// Block assembly.

Matrix block_upper_bidiagonal(const std::vector<Matrix>& diag, const std::vector<Matrix>& super) {
  require(!diag.empty(), ErrorCode::invalid_argument, "block bidiagonal needs at least one diagonal block");
  require(super.size() + 1 == diag.size(), ErrorCode::invalid_argument,
          "block bidiagonal needs exactly one fewer superdiagonal block than diagonal blocks");
  int total = 0;
  std::vector<int> offset(diag.size());
  for (size_t i = 0; i < diag.size(); ++i) {
    require(diag[i].square(), ErrorCode::invalid_argument, "diagonal blocks must be square");
    offset[i] = total;
    total += diag[i].rows();
  }
  for (size_t i = 0; i < super.size(); ++i)
    require(super[i].rows() == diag[i].rows() && super[i].cols() == diag[i + 1].rows(),
            ErrorCode::invalid_argument, "superdiagonal block shape mismatch");
  Matrix a(total, total);
  for (size_t b = 0; b < diag.size(); ++b)
    for (int i = 0; i < diag[b].rows(); ++i)
      for (int j = 0; j < diag[b].cols(); ++j) a(offset[b] + i, offset[b] + j) = diag[b](i, j);
  for (size_t b = 0; b < super.size(); ++b)
    for (int i = 0; i < super[b].rows(); ++i)
      for (int j = 0; j < super[b].cols(); ++j) a(offset[b] + i, offset[b + 1] + j) = super[b](i, j);
  return a;
}

Matrix carbonell_B1i(const std::vector<Matrix>& diag, const std::vector<Matrix>& super, double s,
                     int i) {
  require(i >= 1 && i <= static_cast<int>(diag.size()), ErrorCode::invalid_argument,
          "block index out of range");
  require(s >= 0.0 && std::isfinite(s), ErrorCode::invalid_argument, "time must be finite and nonnegative");
  const Matrix a = block_upper_bidiagonal(diag, super);
  const Matrix e = expm(a, s);
  int row0 = 0;
  int col0 = 0;
  for (int b = 0; b + 1 < i; ++b) col0 += diag[b].rows();
  Matrix out(diag[0].rows(), diag[i - 1].rows());
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) = e(row0 + r, col0 + c);
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7/15 quadrature.

namespace {

// 15-point Kronrod abscissae on [-1, 1] (symmetric; last is the midpoint) and
// the Kronrod / embedded 7-point Gauss weights.
const double kXgk[8] = {0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
                        0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
                        0.2077849550078985, 0.0};
const double kWgk[8] = {0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
                        0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
                        0.2044329400752989, 0.2094821410847278};
const double kWg[4] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                       0.4179591836734694};

struct Segment {
  double a, b;
};

std::vector<Segment> initial_segments(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> pts;
  pts.push_back(a);
  for (double p : breakpoints)
    if (p > a && p < b) pts.push_back(p);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Segment> segs;
  for (size_t i = 0; i + 1 < pts.size(); ++i) segs.push_back({pts[i], pts[i + 1]});
  return segs;
}

template <typename Value, typename Eval, typename Zero, typename Axpy, typename Dist>
Value adaptive_gk(const Eval& f, double a, double b, double tol,
                  const std::vector<double>& breakpoints, const Zero& zero, const Axpy& axpy,
                  const Dist& dist) {
  require(std::isfinite(a) && std::isfinite(b), ErrorCode::invalid_argument,
          "quadrature limits must be finite");
  require(tol > 0.0, ErrorCode::invalid_argument, "quadrature tolerance must be positive");
  Value total = zero();
  if (a == b) return total;
  require(a < b, ErrorCode::invalid_argument, "quadrature requires a <= b");

  const double whole = b - a;
  std::vector<Segment> stack = initial_segments(a, b, breakpoints);
  constexpr int kMaxIntervals = 4000;
  int processed = 0;
  double residual_error = 0.0;

  auto gk15 = [&](double lo, double hi, Value& kron, double& err) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    kron = zero();
    Value gauss = zero();
    // midpoint
    Value fc = f(c);
    axpy(kron, kWgk[7] * h, fc);
    for (int i = 0; i < 7; ++i) {
      const double x = h * kXgk[i];
      Value f1 = f(c - x);
      Value f2 = f(c + x);
      axpy(kron, kWgk[i] * h, f1);
      axpy(kron, kWgk[i] * h, f2);
      if (i % 2 == 1) {  // Gauss nodes are the odd-indexed Kronrod abscissae
        axpy(gauss, kWg[i / 2] * h, f1);
        axpy(gauss, kWg[i / 2] * h, f2);
      }
    }
    axpy(gauss, kWg[3] * h, fc);
    err = dist(kron, gauss);
  };

  while (!stack.empty()) {
    const Segment seg = stack.back();
    stack.pop_back();
    if (++processed > kMaxIntervals)
      fail(ErrorCode::numeric, "quadrature did not converge within the subdivision budget");
    Value kron;
    double err;
    gk15(seg.a, seg.b, kron, err);
    const double len = seg.b - seg.a;
    const double local_tol = tol * (len / whole);
    if (err <= std::max(local_tol, 1e-300) || len <= 1e-14 * whole) {
      axpy(total, 1.0, kron);
      residual_error += err;
    } else {
      const double mid = 0.5 * (seg.a + seg.b);
      stack.push_back({seg.a, mid});
      stack.push_back({mid, seg.b});
    }
  }
  require(residual_error <= 2.0 * tol, ErrorCode::numeric,
          "quadrature error estimate exceeds tolerance");
  return total;
}

}  // namespace

double quadrature(const std::function<double(double)>& f, double a, double b, double tol,
                  const std::vector<double>& breakpoints) {
  return adaptive_gk<double>(
      f, a, b, tol, breakpoints, []() { return 0.0; },
      [](double& acc, double c, double v) { acc += c * v; },
      [](double x, double y) { return std::abs(x - y); });
}

Matrix quadrature_matrix(const std::function<Matrix(double)>& f, double a, double b, double tol,
                         const std::vector<double>& breakpoints) {
  // Probe the shape once so the zero element is well-defined.
  Matrix probe = f(a);
  const int r = probe.rows(), c = probe.cols();
  auto zero = [r, c]() { return Matrix(r, c); };
  auto axpy = [](Matrix& acc, double s, const Matrix& v) {
    const size_t n = static_cast<size_t>(acc.rows()) * acc.cols();
    for (size_t i = 0; i < n; ++i) acc.data()[i] += s * v.data()[i];
  };
  auto dist = [](const Matrix& x, const Matrix& y) { return max_abs(x - y); };
  return adaptive_gk<Matrix>(f, a, b, tol, breakpoints, zero, axpy, dist);
}

}  // namespace phaseage
