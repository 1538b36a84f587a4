#include "ph_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phaseage {

double PhaseTypeDistribution::rate(int j) const {
  require(j >= 1 && j <= m, ErrorCode::invalid_argument, "phase index out of range");
  return -Q(j - 1, j - 1);
}

std::vector<std::string> validate_issues(const Vec& alpha, const Matrix& q) {
  std::vector<std::string> issues;
  auto add = [&](const std::string& s) { issues.push_back(s); };

  if (!q.square() || q.rows() == 0) {
    add("Q must be a nonempty square matrix");
    return issues;
  }
  const int m = q.rows();
  if (static_cast<int>(alpha.size()) != m) {
    add("alpha length must match the dimension of Q");
    return issues;
  }
  if (!all_finite(q)) add("Q has non-finite entries");
  if (!all_finite(alpha)) add("alpha has non-finite entries");
  if (!issues.empty()) return issues;

  const double scale = std::max(1.0, max_abs(q));
  const double tol = 1e-12 * scale;

  double alpha_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] < 0.0) {
      std::ostringstream os;
      os << "alpha[" << (i + 1) << "] is negative (" << alpha[i] << ")";
      add(os.str());
    }
    alpha_sum += alpha[i];
  }
  if (std::abs(alpha_sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "alpha must sum to 1 within 1e-12 (sum = " << alpha_sum
       << "); inputs are not renormalized silently";
    add(os.str());
  }

  for (int i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (i != j && q(i, j) < 0.0) {
        std::ostringstream os;
        os << "off-diagonal Q[" << (i + 1) << "][" << (j + 1) << "] is negative (" << q(i, j) << ")";
        add(os.str());
      }
      row_sum += q(i, j);
    }
    if (row_sum > tol) {
      std::ostringstream os;
      os << "row " << (i + 1) << " of Q has positive sum " << row_sum
         << " (exit rate would be negative)";
      add(os.str());
    }
  }
  if (!issues.empty()) return issues;

  try {
    LuFactors lu = factor_neg(q);
    Matrix inv = lu.solve(Matrix::identity(m));
    double most_negative = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) most_negative = std::min(most_negative, inv(i, j));
    if (most_negative < -1e-9 * std::max(1.0, max_abs(inv))) {
      std::ostringstream os;
      os << "(-Q)^{-1} has a significantly negative entry (" << most_negative
         << "); Q is not the generator of a transient chain";
      add(os.str());
    }
  } catch (const Error& e) {
    add(std::string("(-Q) is singular or too ill-conditioned: ") + e.what());
  }
  return issues;
}

PhaseTypeDistribution validate(const Vec& alpha, const Matrix& q) {
  const std::vector<std::string> issues = validate_issues(alpha, q);
  if (!issues.empty()) {
    std::string msg = "invalid phase-type model:";
    for (const auto& s : issues) msg += "\n  - " + s;
    fail(ErrorCode::invalid_model, msg);
  }
  PhaseTypeDistribution ph;
  ph.m = q.rows();
  ph.alpha = alpha;
  ph.Q = q;
  ph.exit.assign(ph.m, 0.0);
  for (int i = 0; i < ph.m; ++i) {
    double s = 0.0;
    for (int j = 0; j < ph.m; ++j) s += q(i, j);
    ph.exit[i] = std::max(0.0, -s);  // clamp roundoff; validation already bounded it
  }
  ph.neg_q = std::make_shared<LuFactors>(factor_neg(q));
  return ph;
}

static double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

double lifetime_cdf(const PhaseTypeDistribution& ph, double x) {
  if (x <= 0.0) return 0.0;
  const Vec row = row_times(ph.alpha, expm(ph.Q, x));
  double alive = 0.0;
  for (double v : row) alive += v;
  return clamp01(1.0 - alive);
}

double lifetime_density(const PhaseTypeDistribution& ph, double x) {
  if (x < 0.0) return 0.0;
  const Vec row = row_times(ph.alpha, expm(ph.Q, x));
  return std::max(0.0, dot(row, ph.exit));
}

double phase_probability(const PhaseTypeDistribution& ph, double x, int j) {
  require(j >= 1 && j <= ph.m, ErrorCode::invalid_argument, "phase index out of range");
  if (x < 0.0) return 0.0;
  const Vec row = row_times(ph.alpha, expm(ph.Q, x));
  return clamp01(row[j - 1]);
}

double mean_lifetime(const PhaseTypeDistribution& ph) {
  return dot(ph.alpha, ph.neg_q->solve(ones(ph.m)));
}

double support_bound(const PhaseTypeDistribution& ph) {
  double x = std::max(1.0, mean_lifetime(ph));
  for (int i = 0; i < 200; ++i) {
    if (1.0 - lifetime_cdf(ph, x) < 1e-14) return x;
    x *= 2.0;
  }
  fail(ErrorCode::numeric, "survival did not drop below 1e-14 within the probe budget");
}

PhaseTypeDistribution coxian(const CoxianParameters& p) {
  const int m = static_cast<int>(p.lambdas.size());
  require(m >= 1, ErrorCode::invalid_argument, "Coxian model needs at least one phase");
  require(static_cast<int>(p.continue_probs.size()) == m - 1, ErrorCode::invalid_argument,
          "Coxian model needs exactly m-1 continuation probabilities");
  for (int i = 0; i < m; ++i)
    require(std::isfinite(p.lambdas[i]) && p.lambdas[i] > 0.0, ErrorCode::invalid_argument,
            "Coxian rates must be positive and finite");
  for (int i = 0; i + 1 < m; ++i)
    require(std::isfinite(p.continue_probs[i]) && p.continue_probs[i] >= 0.0 &&
                p.continue_probs[i] <= 1.0,
            ErrorCode::invalid_argument, "Coxian continuation probabilities must lie in [0, 1]");
  Matrix q(m, m);
  for (int i = 0; i < m; ++i) {
    q(i, i) = -p.lambdas[i];
    if (i + 1 < m) q(i, i + 1) = p.lambdas[i] * p.continue_probs[i];
  }
  return validate(unit(m, 0), q);
}

bool is_coxian(const PhaseTypeDistribution& ph) {
  if (ph.m < 1) return false;
  if (ph.alpha[0] != 1.0) return false;
  for (int i = 1; i < ph.m; ++i)
    if (ph.alpha[i] != 0.0) return false;
  for (int i = 0; i < ph.m; ++i)
    for (int j = 0; j < ph.m; ++j) {
      if (j == i) {
        if (ph.Q(i, j) >= 0.0) return false;
      } else if (j == i + 1) {
        if (ph.Q(i, j) < 0.0) return false;
      } else if (ph.Q(i, j) != 0.0) {
        return false;
      }
    }
  return true;
}

PhaseTypeDistribution restrict_to_prefix(const PhaseTypeDistribution& ph, int j) {
  require(is_coxian(ph), ErrorCode::unsupported,
          "restrict_to_prefix applies to Coxian chains only");
  require(j >= 1 && j <= ph.m, ErrorCode::invalid_argument, "prefix length out of range");
  Matrix q(j, j);
  for (int r = 0; r < j; ++r)
    for (int c = 0; c < j; ++c) q(r, c) = ph.Q(r, c);
  return validate(unit(j, 0), q);
}

}  // namespace phaseage
