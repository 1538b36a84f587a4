#include "multi.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace phaseage {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// alpha lives in the first m coordinates of the stacked space: compute
// [alpha, 0, ..., 0] * E without materializing the padded vector.
Vec top_block_row_times(const Vec& alpha, const Matrix& e) {
  const int m = static_cast<int>(alpha.size());
  Vec out(static_cast<size_t>(e.cols()), 0.0);
  for (int i = 0; i < m; ++i) {
    const double ai = alpha[i];
    if (ai == 0.0) continue;
    for (int j = 0; j < e.cols(); ++j) out[j] += ai * e(i, j);
  }
  return out;
}

Matrix shifted_generator(const PhaseTypeDistribution& ph, double gamma) {
  Matrix t = ph.Q;
  for (int i = 0; i < ph.m; ++i) t(i, i) -= gamma;
  return t;
}

Matrix outer_unit_col(const Vec& u, int col, int cols) {
  Matrix r(static_cast<int>(u.size()), cols);
  for (int i = 0; i < r.rows(); ++i) r(i, col) = u[i];
  return r;
}

struct MultiCtx {
  PhaseTypeDistribution ph;
  double gamma = 0.0;
  std::vector<int> jz;  // 0-based observed phases
  int k = 0, m = 0;
  Matrix T;
  std::vector<Vec> cols;  // cols[i] = (-T)^{-1} e_{j_{i+1}}
  std::vector<double> g;  // g[i] = e_{j_i}^T (-T)^{-1} e_{j_{i+1}}
  double d1 = 0.0;        // alpha (-T)^{-1} e_{j_1}
  Vec uk, Tuk;
  double Dk = 0.0;
  Matrix Ak;
  Vec wk, Akwk;
  double seq_prob = 0.0;
  // Recursive-evaluation route.
  std::vector<Matrix> a_levels;  // A^(2)..A^(k)
  // Death-at-next-observation extras.
  Vec q0, hq0, alphaT;
  double eta = 0.0;
  Matrix Bk, Ck;
};

void check_sequence(const PhaseTypeDistribution& ph, double gamma, const PhaseSequence& seq,
                    const MultiOptions& opts) {
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCode::invalid_argument,
          "observation rate gamma must be positive and finite");
  const int k = static_cast<int>(seq.phases.size());
  require(k >= 1, ErrorCode::invalid_argument, "phase sequence must be nonempty");
  require(k >= 2, ErrorCode::invalid_argument,
          "multi-observation laws need k >= 2 observed phases; use the single-observation law "
          "for k = 1");
  require(k <= opts.k_cap, ErrorCode::invalid_argument,
          "sequence length exceeds the configured cap (" + std::to_string(opts.k_cap) + ")");
  for (int j : seq.phases)
    require(j >= 1 && j <= ph.m, ErrorCode::invalid_argument,
            "phase index in sequence out of range");
}

std::shared_ptr<MultiCtx> build_ctx(const PhaseTypeDistribution& ph, double gamma,
                                    const PhaseSequence& seq, const MultiOptions& opts,
                                    bool death) {
  check_sequence(ph, gamma, seq, opts);
  auto ctx = std::make_shared<MultiCtx>();
  ctx->ph = ph;
  ctx->gamma = gamma;
  ctx->k = static_cast<int>(seq.phases.size());
  ctx->m = ph.m;
  for (int j : seq.phases) ctx->jz.push_back(j - 1);
  ctx->T = shifted_generator(ph, gamma);
  LuFactors lu = factor_neg(ctx->T);

  const int k = ctx->k, m = ctx->m;
  for (int i = 0; i < k; ++i) ctx->cols.push_back(lu.solve(unit(m, ctx->jz[i])));
  for (int i = 0; i + 1 < k; ++i) ctx->g.push_back(ctx->cols[i + 1][ctx->jz[i]]);
  ctx->d1 = dot(ph.alpha, ctx->cols[0]);

  // Zero-probability sequences fail fast with an explicit conditioning error.
  double prob = gamma * ctx->d1;
  for (double gi : ctx->g) prob *= gamma * gi;
  if (!(prob > 0.0)) {
    std::ostringstream os;
    os << "observed phase sequence has probability zero (an observation step is impossible)";
    fail(ErrorCode::conditioning, os.str());
  }
  require(prob >= 1e-300, ErrorCode::conditioning,
          "observed phase sequence probability underflows; cannot condition on it");

  // suffix[i] = prod_{l >= i} g[l]; suffix[k-1] = 1 (empty product).
  std::vector<double> suffix(static_cast<size_t>(k), 1.0);
  for (int i = k - 2; i >= 0; --i) suffix[i] = ctx->g[i] * suffix[i + 1];

  ctx->uk.assign(m, 0.0);
  for (int i = 0; i < m; ++i) ctx->uk[i] = ctx->cols[0][i] * suffix[0];
  ctx->Tuk = times_col(ctx->T, ctx->uk);
  ctx->Dk = ctx->d1 * suffix[0];

  std::vector<Matrix> diag(static_cast<size_t>(k), ctx->T);
  std::vector<Matrix> super;
  for (int i = 0; i + 1 < k; ++i) {
    Matrix s(m, m);
    s(ctx->jz[i], ctx->jz[i]) = 1.0;
    super.push_back(s);
  }
  ctx->Ak = block_upper_bidiagonal(diag, super);

  ctx->wk.assign(static_cast<size_t>(k) * m, 0.0);
  for (int i = 1; i < k; ++i)  // the first block carries no weight
    for (int r = 0; r < m; ++r) ctx->wk[static_cast<size_t>(i) * m + r] = ctx->cols[i][r] * suffix[i];
  ctx->Akwk = times_col(ctx->Ak, ctx->wk);

  ctx->seq_prob = prob;

  if (opts.use_recursive) {
    for (int level = 2; level <= k; ++level) {
      std::vector<Matrix> d(static_cast<size_t>(level), ctx->T);
      std::vector<Matrix> s(super.begin(), super.begin() + (level - 1));
      ctx->a_levels.push_back(block_upper_bidiagonal(d, s));
    }
  }

  if (death) {
    ctx->q0 = ph.exit;
    ctx->hq0 = lu.solve(ctx->q0);
    ctx->eta = ctx->hq0[ctx->jz[k - 1]];  // e_{j_k}^T (-T)^{-1} q0 = P[death before next epoch]
    require(ctx->eta >= 1e-14, ErrorCode::conditioning,
            "death before the next observation has probability ~0 from the last observed phase");
    ctx->alphaT = row_times(ph.alpha, ctx->T);
    ctx->Bk = block_upper_bidiagonal({ctx->T, ctx->T},
                                     {outer_unit_col(ctx->uk, ctx->jz[k - 1], m)});
    ctx->Ck = block_upper_bidiagonal({ctx->Ak, ctx->T},
                                     {outer_unit_col(ctx->wk, ctx->jz[k - 1], m)});
    ctx->seq_prob = prob * ctx->eta;
  }
  return ctx;
}

double closed_form_n(const MultiCtx& ctx, double s) {
  const Matrix e = expm(ctx.Ak, s);
  const Vec r = top_block_row_times(ctx.ph.alpha, e);
  double row_uk = 0.0;
  for (int i = 0; i < ctx.m; ++i) row_uk += r[i] * ctx.uk[i];
  return ctx.Dk - row_uk - dot(r, ctx.wk);
}

double recursive_n(const MultiCtx& ctx, double s) {
  // Level 2 seed, then one Carbonell block per additional observation.
  const Matrix e2 = expm(ctx.a_levels[0], s);
  const Vec r2 = top_block_row_times(ctx.ph.alpha, e2);
  double row_c0 = 0.0, b_term = 0.0;
  for (int i = 0; i < ctx.m; ++i) {
    row_c0 += r2[i] * ctx.cols[0][i];
    b_term += r2[ctx.m + i] * ctx.cols[1][i];
  }
  double n = (ctx.d1 - row_c0) * ctx.g[0] - b_term;
  for (int level = 3; level <= ctx.k; ++level) {
    const Matrix el = expm(ctx.a_levels[level - 2], s);
    const Vec rl = top_block_row_times(ctx.ph.alpha, el);
    double tail = 0.0;
    const int off = (level - 1) * ctx.m;
    for (int i = 0; i < ctx.m; ++i) tail += rl[off + i] * ctx.cols[level - 1][i];
    n = n * ctx.g[level - 2] - tail;
  }
  return n;
}

}  // namespace

Matrix build_Ak(const PhaseTypeDistribution& ph, double gamma, const PhaseSequence& seq) {
  MultiOptions opts;
  check_sequence(ph, gamma, seq, opts);
  const int k = static_cast<int>(seq.phases.size());
  const Matrix t = shifted_generator(ph, gamma);
  std::vector<Matrix> diag(static_cast<size_t>(k), t);
  std::vector<Matrix> super;
  for (int i = 0; i + 1 < k; ++i) {
    Matrix s(ph.m, ph.m);
    s(seq.phases[i] - 1, seq.phases[i] - 1) = 1.0;
    super.push_back(s);
  }
  return block_upper_bidiagonal(diag, super);
}

MultiObsResult age_at_kth_observation(const PhaseTypeDistribution& ph, double gamma,
                                      const PhaseSequence& seq, const MultiOptions& opts) {
  require(!seq.terminal_death, ErrorCode::invalid_argument,
          "age_at_kth_observation applies to all-alive sequences; use "
          "lifetime_given_death_at_next for terminal death");
  auto ctx = build_ctx(ph, gamma, seq, opts, /*death=*/false);
  MultiObsResult r;
  r.k = ctx->k;
  r.sequence_probability = ctx->seq_prob;
  const bool recursive = opts.use_recursive;
  r.cdf = [ctx, recursive](double s) {
    if (s <= 0.0) return 0.0;
    const double n = recursive ? recursive_n(*ctx, s) : closed_form_n(*ctx, s);
    return clamp01(n / ctx->Dk);
  };
  r.density = [ctx](double s) {
    if (s < 0.0) return 0.0;
    const Matrix e = expm(ctx->Ak, s);
    const Vec row = top_block_row_times(ctx->ph.alpha, e);
    double row_tuk = 0.0;
    for (int i = 0; i < ctx->m; ++i) row_tuk += row[i] * ctx->Tuk[i];
    return std::max(0.0, (-row_tuk - dot(row, ctx->Akwk)) / ctx->Dk);
  };
  return r;
}

MultiObsResult lifetime_given_death_at_next(const PhaseTypeDistribution& ph, double gamma,
                                            const PhaseSequence& seq, const MultiOptions& opts) {
  require(seq.terminal_death, ErrorCode::invalid_argument,
          "lifetime_given_death_at_next requires a sequence with terminal_death set");
  auto ctx = build_ctx(ph, gamma, seq, opts, /*death=*/true);
  MultiObsResult r;
  r.k = ctx->k;
  r.sequence_probability = ctx->seq_prob;
  const int m = ctx->m, km = ctx->k * ctx->m;
  r.cdf = [ctx, m, km](double s) {
    if (s <= 0.0) return 0.0;
    const Matrix eb = expm(ctx->Bk, s);
    const Matrix ec = expm(ctx->Ck, s);
    // e_{j_k}^T e^{Ts} (-T)^{-1} q0 from the lower-right block of e^{B^(k)s}.
    const int jk = ctx->jz[ctx->k - 1];
    double ejk_expts_hq0 = 0.0;
    for (int j = 0; j < m; ++j) ejk_expts_hq0 += eb(m + jk, m + j) * ctx->hq0[j];
    const double term1 = ctx->Dk * (ctx->eta - ejk_expts_hq0);
    double a_i12_q0 = 0.0;  // alpha I_12(s) q0 via the top-right block of e^{B^(k)s}
    for (int i = 0; i < m; ++i) {
      if (ctx->ph.alpha[i] == 0.0) continue;
      double inner = 0.0;
      for (int j = 0; j < m; ++j) inner += eb(i, m + j) * ctx->q0[j];
      a_i12_q0 += ctx->ph.alpha[i] * inner;
    }
    double a_j_q0 = 0.0;  // (f_{k,1} ot alpha) J_1k(s) q0 via the top-right block of e^{C^(k)s}
    for (int i = 0; i < m; ++i) {
      if (ctx->ph.alpha[i] == 0.0) continue;
      double inner = 0.0;
      for (int j = 0; j < m; ++j) inner += ec(i, km + j) * ctx->q0[j];
      a_j_q0 += ctx->ph.alpha[i] * inner;
    }
    return clamp01((term1 - a_i12_q0 - a_j_q0) / (ctx->Dk * ctx->eta));
  };
  r.density = [ctx, m, km](double s) {
    if (s < 0.0) return 0.0;
    const Matrix eb = expm(ctx->Bk, s);
    const Matrix ec = expm(ctx->Ck, s);
    double t1 = 0.0;  // (alpha T) I_12(s) q0
    for (int i = 0; i < m; ++i) {
      if (ctx->alphaT[i] == 0.0) continue;
      double inner = 0.0;
      for (int j = 0; j < m; ++j) inner += eb(i, m + j) * ctx->q0[j];
      t1 += ctx->alphaT[i] * inner;
    }
    // (f_{k,1} ot alpha) A^(k) J_1k(s) q0: first m entries of A^(k) (J q0).
    Vec jq0(static_cast<size_t>(km), 0.0);
    for (int rrow = 0; rrow < km; ++rrow) {
      double inner = 0.0;
      for (int j = 0; j < m; ++j) inner += ec(rrow, km + j) * ctx->q0[j];
      jq0[rrow] = inner;
    }
    const Vec akjq0 = times_col(ctx->Ak, jq0);
    double t2 = 0.0;
    for (int i = 0; i < m; ++i) t2 += ctx->ph.alpha[i] * akjq0[i];
    return std::max(0.0, -(t1 + t2) / (ctx->Dk * ctx->eta));
  };
  return r;
}

MixedDistribution conditioned_absorption(const PhaseTypeDistribution& x_theta, double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCode::invalid_argument,
          "gamma must be positive and finite");
  struct Ctx {
    PhaseTypeDistribution ph;
    Matrix Tg;
    Vec hq0;
    double eta = 0.0;
  };
  auto ctx = std::make_shared<Ctx>();
  ctx->ph = x_theta;
  ctx->Tg = shifted_generator(x_theta, gamma);
  LuFactors lu = factor_neg(ctx->Tg);
  ctx->hq0 = lu.solve(x_theta.exit);
  ctx->eta = dot(x_theta.alpha, ctx->hq0);  // P[X <= Y]
  require(ctx->eta >= 1e-14, ErrorCode::conditioning,
          "P[X <= Y] is ~0; cannot condition the absorption time on it");
  MixedDistribution d;
  d.atom_at_zero = 0.0;
  d.cdf = [ctx](double x) {
    if (x <= 0.0) return 0.0;
    const Vec row = row_times(ctx->ph.alpha, expm(ctx->Tg, x));
    return clamp01((ctx->eta - dot(row, ctx->hq0)) / ctx->eta);
  };
  d.density = [ctx](double x) {
    if (x < 0.0) return 0.0;
    const Vec row = row_times(ctx->ph.alpha, expm(ctx->Tg, x));
    return std::max(0.0, dot(row, ctx->ph.exit) / ctx->eta);
  };
  return d;
}

}  // namespace phaseage
