#include <hdual/composite.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace hdual::composite {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be positive");
}

}  // namespace

Vec prox_step(const CompositeOracle& F, const Vec& y, double alpha) {
  require_alpha(alpha);
  const double aL = alpha * F.lipschitz();
  return F.g->prox(y - F.f->gradient(y) / aL, 1.0 / aL);
}

std::optional<double> prox_optimality_residual(const CompositeOracle& F, const Vec& y,
                                               double alpha) {
  const Vec yp = prox_step(F, y, alpha);
  const Vec w = alpha * F.lipschitz() * (yp - y) + F.f->gradient(y);
  return F.g->min_norm_shifted_subgradient(yp, w);
}

double prox_grad_bracket(const CompositeOracle& F, const Vec& x, const Vec& y, double alpha) {
  const double L = F.lipschitz();
  const Vec xp = prox_step(F, x, alpha);
  const Vec yp = prox_step(F, y, alpha);
  return F.value(yp) - F.value(xp) - L * alpha * (yp - y).dot(xp - yp) -
         0.5 * L * (yp - y).squaredNorm();
}

namespace {

void push(CompositeTrajectory& tr, const CompositeOracle& F, Vec x, int index) {
  if (!x.allFinite())
    throw DivergenceError("non-finite iterate at index " + std::to_string(index), index);
  Vec xp = prox_step(F, x, tr.alpha);
  const double Fx = F.value(xp);
  if (!xp.allFinite() || std::isnan(Fx))
    throw DivergenceError("non-finite prox point at index " + std::to_string(index), index);
  tr.points.push_back(std::move(x));
  tr.prox_points.push_back(std::move(xp));
  tr.prox_values.push_back(Fx);
}

CompositeTrajectory start(const CompositeOracle& F, const Vec& x0, double alpha) {
  require_alpha(alpha);
  if (x0.size() != F.dim()) throw Error("starting point dimension does not match oracle");
  CompositeTrajectory tr;
  tr.lipschitz = F.lipschitz();
  tr.alpha = alpha;
  push(tr, F, x0, 0);
  return tr;
}

}  // namespace

CompositeTrajectory run_composite(const StepsizeMatrix& H, const CompositeOracle& F,
                                  const Vec& x0, double alpha) {
  CompositeTrajectory tr = start(F, x0, alpha);
  for (int k = 0; k < H.n(); ++k) {
    Vec step = Vec::Zero(x0.size());
    for (int i = 0; i <= k; ++i) step += H(k, i) * (tr.points[i] - tr.prox_points[i]);
    push(tr, F, tr.points[k] - alpha * step, k + 1);
  }
  return tr;
}

CompositeTrajectory run_composite_three_term(const ThreeTermCoeffs& c, const CompositeOracle& F,
                                             const Vec& x0, double alpha) {
  CompositeTrajectory tr = start(F, x0, alpha);
  Vec prev = x0;
  for (int k = 0; k < c.n(); ++k) {
    const Vec& xk = tr.points[k];
    const Vec& pk = tr.prox_points[k];
    Vec next = pk + c.beta[k] * (pk - prev) + c.gamma[k] * (pk - xk);
    prev = pk;
    push(tr, F, std::move(next), k + 1);
  }
  return tr;
}

int gfpgm_violation(const TSequence& ts, double rel_tol) {
  for (int i = 0; i <= ts.n(); ++i)
    if (ts.T[i] > ts.t[i] * ts.t[i] * (1.0 + rel_tol)) return i;
  return -1;
}

// Same momentum coefficients as the smooth GOGM family; only the feasibility
// region differs.
ThreeTermCoeffs gfpgm_coeffs(const TSequence& ts) { return method_lib::gogm_coeffs(ts); }

StepsizeMatrix gfpgm_H(const TSequence& ts) {
  const int bad = gfpgm_violation(ts);
  if (bad >= 0)
    throw InfeasibleError("T_" + std::to_string(bad) + " exceeds t_" + std::to_string(bad) + "^2",
                          bad);
  const int N = ts.n();
  const auto& t = ts.t;
  const auto& T = ts.T;
  Mat h = Mat::Zero(N, N);
  for (int k = 0; k < N; ++k) {
    const double beta = (T[k] - t[k]) * t[k + 1] / (t[k] * T[k + 1]);
    h(k, k) = 1.0 + (t[k] - 1.0) * t[k + 1] / T[k + 1];
    if (k >= 1) h(k, k - 1) = beta * (h(k - 1, k - 1) - 1.0);
    for (int i = 0; i + 2 <= k; ++i) h(k, i) = beta * h(k - 1, i);
  }
  return StepsizeMatrix(std::move(h));
}

CompositeCorrection build_C(const TSequence& ts) {
  const int N = ts.n();
  const auto& t = ts.t;
  const auto& T = ts.T;
  Mat c = Mat::Zero(N, N);
  double inv_sum = 0.0;  // sum_{j=0}^{k-2} 1/T_j
  for (int k = 0; k < N; ++k) {
    if (k == 0) {
      c(0, 0) = t[1] / T[1];
    } else {
      if (k >= 2) inv_sum += 1.0 / T[k - 2];
      c(k, k) = t[k + 1] / T[k + 1] * (t[k] / T[0] + t[k] * inv_sum + T[k] / T[k - 1]);
    }
    const double beta = t[k + 1] * (T[k] - t[k]) / (t[k] * T[k + 1]);
    for (int i = 0; i < k; ++i) c(k, i) = beta * c(k - 1, i);
  }
  return {c};
}

ClaimSides claim_sides(const TSequence& ts, bool include_T0_term) {
  const int N = ts.n();
  const auto& t = ts.t;
  const auto& T = ts.T;
  const Mat C = build_C(ts).entries;
  Mat Cpad = Mat::Zero(N + 1, N + 1);
  Cpad.block(1, 0, N, N) = C;
  Mat Q = Mat::Zero(N + 1, N + 1);  // sum_i T_i (e_i - e_{i+1})(e_0 + ... + e_i)'
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= i; ++j) {
      Q(i, j) += T[i];
      if (i + 1 <= N) Q(i + 1, j) -= T[i];
    }
  }
  const Mat L = 2.0 * Q * Cpad;
  ClaimSides s;
  s.lhs = 0.5 * (L + L.transpose());
  // f_{N-i} = T_i e_i + t_{i+1} e_{i+1} + ... + t_N e_N
  auto f = [&](int m) {
    const int i = N - m;
    Vec v = Vec::Zero(N + 1);
    v(i) = T[i];
    for (int j = i + 1; j <= N; ++j) v(j) = t[j];
    return v;
  };
  Mat R = Mat::Zero(N + 1, N + 1);
  for (int i = 1; i <= N; ++i) R += f(N - i) * f(N - i).transpose() / T[i - 1];
  R += f(N) * f(N).transpose() / T[0];
  R(0, 0) -= T[0];
  double inv_sum = 0.0;
  for (int i = 1; i <= N; ++i) {
    if (i >= 2) inv_sum += 1.0 / T[i - 2];
    double d = T[i] * T[i] / T[i - 1] + t[i] * t[i] * inv_sum;
    if (include_T0_term) d += t[i] * t[i] / T[0];
    R(i, i) -= d;
  }
  s.rhs = R;
  return s;
}

int sfg_condition_violation(const TSequence& ts, double alpha, double rel_tol) {
  require_alpha(alpha);
  const auto& t = ts.t;
  const auto& T = ts.T;
  auto fails = [&](double lhs, double rhs) { return lhs < rhs - rel_tol * std::max(1.0, std::abs(rhs)); };
  if (fails(alpha * (2.0 * T[0] - t[0] * t[0]), T[0])) return 0;
  double inv_sum = 0.0;
  for (int k = 1; k <= ts.n(); ++k) {
    if (k >= 2) inv_sum += 1.0 / T[k - 2];
    const double rhs = T[k] * T[k] / T[k - 1] + t[k] * t[k] * (1.0 / T[0] + inv_sum);
    if (fails(alpha * (2.0 * T[k] - t[k] * t[k]), rhs)) return k;
  }
  return -1;
}

SfgFamily sfg_family(const TSequence& ts, double alpha) {
  const int bad = sfg_condition_violation(ts, alpha);
  if (bad >= 0)
    throw InfeasibleError("family condition fails at k = " + std::to_string(bad), bad);
  const CompositeCorrection C = build_C(ts);
  ThreeTermCoeffs primal = method_lib::gogm_coeffs(ts);
  for (int k = 0; k < ts.n(); ++k) primal.gamma[k] += C.entries(k, k) / alpha;
  ThreeTermCoeffs dual = method_lib::dual_three_term(primal);
  StepsizeMatrix H(method_lib::anti_transpose(method_lib::three_term_to_H(primal)).dense() / alpha);
  return {std::move(H), std::move(primal), std::move(dual), alpha};
}

StepsizeMatrix sfg_family_H(const TSequence& ts, double alpha) { return sfg_family(ts, alpha).H; }

TSequence sfg_tsequence(int n) {
  if (n < 1) throw Error("sfg needs n >= 1");
  std::vector<double> T;
  for (int i = 0; i <= n; ++i) T.push_back((i + 2.0) * (i + 3.0) / 4.0);
  return TSequence::from_T(std::move(T));
}

ThreeTermCoeffs sfg_coeffs(int n) {
  if (n < 1) throw Error("sfg closed form needs n >= 1");
  ThreeTermCoeffs c;
  for (int k = 0; k + 1 < n; ++k) {
    const double a = n - k;
    c.beta.push_back((a + 1.0) * (2.0 * a - 1.0) / ((a + 3.0) * (2.0 * a + 1.0)));
    c.gamma.push_back((4.0 * a - 1.0) * (2.0 * a - 1.0) / (6.0 * (a + 3.0) * (2.0 * a + 1.0)));
  }
  c.beta.push_back(3.0 / 10.0);
  c.gamma.push_back(3.0 / 40.0);
  return c;
}

StepsizeMatrix sfg_H(int n) {
  return StepsizeMatrix(method_lib::three_term_to_H(sfg_coeffs(n)).dense() / 4.0);
}

TSequence sfg_tight_tsequence(int n, double alpha) {
  require_alpha(alpha);
  if (n < 1) throw Error("tight sequence needs n >= 1");
  if (alpha <= 0.5) throw Error("tight sequence needs alpha > 1/2");
  std::vector<double> t{2.0 - 1.0 / alpha};
  std::vector<double> T{t[0]};
  double inv_sum = 0.0;  // sum_{i=0}^{k-2} 1/T_i
  for (int k = 1; k <= n; ++k) {
    if (k >= 2) inv_sum += 1.0 / T[k - 2];
    // a t^2 + b t + c = 0 with T_k = T_{k-1} + t, positive root.
    const double Tp = T.back();
    const double a = alpha + 1.0 / Tp + 1.0 / T[0] + inv_sum;
    const double b = 2.0 - 2.0 * alpha;
    const double c = Tp * (1.0 - 2.0 * alpha);
    const double tk = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    t.push_back(tk);
    T.push_back(Tp + tk);
  }
  return TSequence::from_t(std::move(t));
}

double sfg_family_rate_constant(const TSequence& ts, double alpha) {
  require_alpha(alpha);
  return 2.0 * (alpha + 1.0) * (alpha + 1.0) / (alpha * ts.T.back());
}

GradientMappingBound gradient_mapping_bound(const CompositeOracle& F, const Vec& y, double alpha) {
  const Vec yp = prox_step(F, y, alpha);
  GradientMappingBound b;
  b.bound = F.lipschitz() * (alpha + 1.0) * (y - yp).norm();
  b.exact = F.g->min_norm_shifted_subgradient(yp, F.f->gradient(yp));
  return b;
}

ReferenceSolution reference_minimum(const CompositeOracle& F, const Vec& x0, int iters) {
  // FISTA with the standard t-sequence, in momentum form.
  const TSequence ts = method_lib::fgm_tsequence(iters);
  const CompositeTrajectory tr = run_composite_three_term(gfpgm_coeffs(ts), F, x0, 1.0);
  ReferenceSolution best{tr.prox_points[0], tr.prox_values[0]};
  for (int k = 1; k <= tr.n(); ++k)
    if (tr.prox_values[k] < best.F) best = {tr.prox_points[k], tr.prox_values[k]};
  return best;
}

}  // namespace hdual::composite
