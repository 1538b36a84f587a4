// Independent reference implementations used only by tests: slow but simple
// evaluations that share no code path with the library kernels they check.
#pragma once
#include <cmath>
#include <functional>
#include <optional>

#include "dense.hpp"
#include "error.hpp"

namespace oracle {

// Truncated Taylor series for e^{At}. Adequate on its own for moderate
// ||At||; the scaled variant below is the high-accuracy reference.
inline phaseage::Matrix expm_taylor(const phaseage::Matrix& a, double t, int max_terms = 2000) {
  int n = a.rows();
  phaseage::Matrix sum = phaseage::Matrix::identity(n);
  phaseage::Matrix term = phaseage::Matrix::identity(n);
  for (int k = 1; k <= max_terms; ++k) {
    term = (t / k) * (term * a);
    sum = sum + term;
    if (phaseage::max_abs(term) < 1e-22 * std::max(1.0, phaseage::max_abs(sum))) break;
  }
  return sum;
}

// Scale t down to a tiny norm, run the Taylor series, square back up.
inline phaseage::Matrix expm_taylor_scaled(const phaseage::Matrix& a, double t) {
  double nrm = phaseage::norm1(a) * std::abs(t);
  int s = 0;
  while (nrm > 0.25 && s < 60) {
    nrm *= 0.5;
    ++s;
  }
  phaseage::Matrix r = expm_taylor(a, std::ldexp(t, -s), 80);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

inline double max_diff(const phaseage::Matrix& a, const phaseage::Matrix& b) {
  double d = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

inline double erlang_cdf(int k, double rate, double x) {
  if (x <= 0.0) return 0.0;
  double term = 1.0;  // (rate x)^i / i!
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    sum += term;
    term *= rate * x / static_cast<double>(i + 1);
  }
  return 1.0 - std::exp(-rate * x) * sum;
}

inline double erlang_density(int k, double rate, double x) {
  if (x < 0.0) return 0.0;
  double logv = k * std::log(rate) + (k - 1) * std::log(std::max(x, 1e-300)) - rate * x;
  for (int i = 2; i < k; ++i) logv -= std::log(static_cast<double>(i));
  return std::exp(logv);
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Error code raised by f, if any.
template <typename F>
std::optional<phaseage::ErrorCode> error_code_of(F&& f) {
  try {
    std::forward<F>(f)();
    return std::nullopt;
  } catch (const phaseage::Error& e) {
    return e.code();
  }
}

}  // namespace oracle
