#include <hdual/method_lib.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace hdual::method_lib {

namespace {

void require_n(int n) {
  if (n < 1) throw Error("iteration count must be positive, got " + std::to_string(n));
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

StepsizeMatrix::StepsizeMatrix(Mat entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1)
    throw Error("stepsize matrix must be square with n >= 1");
  for (Eigen::Index k = 0; k < m_.rows(); ++k) {
    for (Eigen::Index i = 0; i < m_.cols(); ++i) {
      if (!std::isfinite(m_(k, i))) throw Error("stepsize matrix has a non-finite entry");
      if (i > k && m_(k, i) != 0.0) throw Error("stepsize matrix must be lower-triangular");
    }
  }
}

StepsizeMatrix StepsizeMatrix::zeros(int n) {
  require_n(n);
  return StepsizeMatrix(Mat::Zero(n, n));
}

StepsizeMatrix StepsizeMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  require_n(n);
  Mat m = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    if (static_cast<int>(rows[k].size()) != k + 1)
      throw Error("row " + std::to_string(k) + " must have " + std::to_string(k + 1) +
                  " entries");
    for (int i = 0; i <= k; ++i) m(k, i) = rows[k][i];
  }
  return StepsizeMatrix(std::move(m));
}

std::vector<std::vector<double>> StepsizeMatrix::rows() const {
  std::vector<std::vector<double>> out(n());
  for (int k = 0; k < n(); ++k)
    for (int i = 0; i <= k; ++i) out[k].push_back(m_(k, i));
  return out;
}

StepsizeMatrix anti_transpose(const StepsizeMatrix& H) {
  const int n = H.n();
  Mat a = Mat::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c <= r; ++c) a(r, c) = H(n - 1 - c, n - 1 - r);
  return StepsizeMatrix(std::move(a));
}

double max_rel_diff(const StepsizeMatrix& a, const StepsizeMatrix& b) {
  if (a.n() != b.n()) throw Error("size mismatch in max_rel_diff");
  double worst = 0.0;
  for (int k = 0; k < a.n(); ++k)
    for (int i = 0; i <= k; ++i)
      worst = std::max(worst, std::abs(a(k, i) - b(k, i)) / std::max(1.0, std::abs(b(k, i))));
  return worst;
}

ThetaSequence theta_sequence(int n) {
  require_n(n);
  ThetaSequence th;
  th.values.reserve(n + 1);
  th.values.push_back(1.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double p = th.values.back();
    th.values.push_back((1.0 + std::sqrt(1.0 + 4.0 * p * p)) / 2.0);
  }
  const double p = th.values.back();
  th.values.push_back((1.0 + std::sqrt(1.0 + 8.0 * p * p)) / 2.0);
  return th;
}

StepsizeMatrix ogm_H(int n) {
  const auto th = theta_sequence(n).values;
  Mat h = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    h(k, k) = 1.0 + (2.0 * th[k] - 1.0) / th[k + 1];
    const double f = (th[k] - 1.0) / th[k + 1];
    if (k >= 1) h(k, k - 1) = f * (h(k - 1, k - 1) - 1.0);
    for (int i = 0; i + 2 <= k; ++i) h(k, i) = f * h(k - 1, i);
  }
  return StepsizeMatrix(std::move(h));
}

// Built from its own recursion (not by anti-transposing OGM) so the duality
// between the two can be tested. The recursion runs along each row from the
// diagonal towards column 0.
StepsizeMatrix ogmg_H(int n) {
  const auto th = theta_sequence(n).values;
  Mat h = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    h(k, k) = 1.0 + (2.0 * th[n - k - 1] - 1.0) / th[n - k];
    for (int i = k - 1; i >= 0; --i) {
      const double f = (th[n - i - 1] - 1.0) / th[n - i];
      h(k, i) = (i == k - 1) ? f * (h(k, k) - 1.0) : f * h(k, i + 1);
    }
  }
  return StepsizeMatrix(std::move(h));
}

namespace {

Mat obl_f_dense(int n) {
  const double gam = std::sqrt(n * (n + 1.0) / 2.0);
  Mat h = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double diag = 0.0;
    double f = 0.0;
    if (k <= n - 2) {
      diag = 1.0 + 2.0 * k / (k + 3.0);
      f = k / (k + 3.0);
    } else {
      diag = 1.0 + (n - 1.0) / (gam + 1.0);
      f = (n - 1.0) / (2.0 * (gam + 1.0));
    }
    h(k, k) = diag;
    if (k >= 1) h(k, k - 1) = f * (h(k - 1, k - 1) - 1.0);
    for (int i = 0; i + 2 <= k; ++i) h(k, i) = f * h(k - 1, i);
  }
  return h;
}

}  // namespace

StepsizeMatrix obl_f_H(int n) {
  require_n(n);
  return StepsizeMatrix(obl_f_dense(n));
}

StepsizeMatrix obl_g_H(int n) {
  require_n(n);
  const double gam = std::sqrt(n * (n + 1.0) / 2.0);
  Mat h = Mat::Zero(n, n);
  h(0, 0) = 1.0 + (n - 1.0) / (gam + 1.0);
  for (int k = 1; k < n; ++k) {
    const double f = (n - k - 1.0) / (n - k + 2.0);
    h(k, k) = 1.0 + 2.0 * f;
    h(k, k - 1) = f * (h(k - 1, k - 1) - 1.0);
    for (int i = 0; i + 2 <= k; ++i) h(k, i) = f * h(k - 1, i);
  }
  return StepsizeMatrix(std::move(h));
}

StepsizeMatrix gd_H(int n, double h) {
  require_n(n);
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("gd stepsize must be positive");
  return StepsizeMatrix(Mat::Identity(n, n) * h);
}

TSequence TSequence::from_t(std::vector<double> t) {
  if (t.size() < 2) throw Error("t sequence needs at least t_0, t_1");
  TSequence s;
  s.t = std::move(t);
  s.T.resize(s.t.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (!(s.t[i] > 0.0)) throw Error("t_" + std::to_string(i) + " must be positive");
    acc += s.t[i];
    s.T[i] = acc;
  }
  return s;
}

TSequence TSequence::from_T(std::vector<double> T) {
  if (T.size() < 2) throw Error("T sequence needs at least T_0, T_1");
  std::vector<double> t(T.size());
  t[0] = T[0];
  for (std::size_t i = 1; i < T.size(); ++i) t[i] = T[i] - T[i - 1];
  TSequence s = from_t(std::move(t));
  s.T = std::move(T);
  return s;
}

int TSequence::gogm_violation(double rel_tol) const {
  const int N = n();
  for (int i = 0; i <= N; ++i) {
    const double rhs = (i < N ? 2.0 : 1.0) * T[i];
    if (t[i] * t[i] > rhs * (1.0 + rel_tol)) return i;
  }
  return -1;
}

TSequence fgm_tsequence(int n) {
  require_n(n);
  std::vector<double> t{1.0};
  double T = 1.0;
  for (int i = 1; i <= n; ++i) {
    t.push_back((1.0 + std::sqrt(1.0 + 4.0 * T)) / 2.0);
    T += t.back();
  }
  return TSequence::from_t(std::move(t));
}

TSequence ogm_tsequence(int n) {
  require_n(n);
  std::vector<double> t{2.0};
  double T = 2.0;
  for (int i = 1; i < n; ++i) {
    t.push_back(1.0 + std::sqrt(1.0 + 2.0 * T));
    T += t.back();
  }
  t.push_back((1.0 + std::sqrt(1.0 + 4.0 * T)) / 2.0);
  return TSequence::from_t(std::move(t));
}

TSequence obl_tsequence(int n) {
  require_n(n);
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(i + 1.0);
  t.push_back(std::sqrt(n * (n + 1.0) / 2.0));
  return TSequence::from_t(std::move(t));
}

StepsizeMatrix three_term_to_H(const ThreeTermCoeffs& c) {
  const int n = c.n();
  require_n(n);
  if (static_cast<int>(c.gamma.size()) != n) throw Error("beta and gamma lengths differ");
  Mat h = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    h(k, k) = 1.0 + c.beta[k] + c.gamma[k];
    if (k >= 1) h(k, k - 1) = c.beta[k] * (h(k - 1, k - 1) - 1.0);
    for (int i = 0; i + 2 <= k; ++i) h(k, i) = c.beta[k] * h(k - 1, i);
  }
  return StepsizeMatrix(std::move(h));
}

ThreeTermCoeffs dual_three_term(const ThreeTermCoeffs& c, double aux_beta, double aux_gamma) {
  const int n = c.n();
  require_n(n);
  std::vector<double> b(c.beta), g(c.gamma);
  b.push_back(aux_beta);
  g.push_back(aux_gamma);
  ThreeTermCoeffs d;
  d.beta.resize(n);
  d.gamma.resize(n);
  for (int k = 0; k < n; ++k) {
    const double den = b[n - k] + g[n - k];
    const double s = b[n - 1 - k] + g[n - 1 - k];
    if (den == 0.0) {
      // With beta = gamma = 0 the matching entries of the anti-transpose are
      // zero below the diagonal, so the dual needs beta' = 0 and only the
      // diagonal survives.
      if (b[n - k] == 0.0 && g[n - k] == 0.0) {
        d.beta[k] = 0.0;
        d.gamma[k] = s;
        continue;
      }
      throw DivisionGuardError("beta + gamma vanishes at index " + std::to_string(n - k), k);
    }
    d.beta[k] = b[n - k] * s / den;
    d.gamma[k] = g[n - k] * s / den;
  }
  return d;
}

ThreeTermCoeffs gogm_coeffs(const TSequence& ts) {
  const int N = ts.n();
  const auto& t = ts.t;
  const auto& T = ts.T;
  ThreeTermCoeffs c;
  for (int k = 0; k < N; ++k) {
    c.beta.push_back((T[k] - t[k]) * t[k + 1] / (t[k] * T[k + 1]));
    c.gamma.push_back((t[k] * t[k] - T[k]) * t[k + 1] / (t[k] * T[k + 1]));
  }
  return c;
}

ThreeTermCoeffs gogm_dual_coeffs(const TSequence& ts) {
  const int N = ts.n();
  const auto& t = ts.t;
  const auto& T = ts.T;
  ThreeTermCoeffs c;
  for (int k = 0; k < N; ++k) {
    const double den = T[N - k] * (t[N - k] - 1.0);
    if (den == 0.0)
      throw DivisionGuardError("t_" + std::to_string(N - k) + " = 1 in the dual denominator",
                               N - k);
    c.beta.push_back(T[N - k - 1] * (t[N - k - 1] - 1.0) / den);
    c.gamma.push_back((t[N - k] * t[N - k] - T[N - k]) * (t[N - k - 1] - 1.0) / den);
  }
  return c;
}

StepsizeMatrix gogm_H(const TSequence& ts) { return three_term_to_H(gogm_coeffs(ts)); }

StepsizeMatrix gogm_dual_H(const TSequence& ts) {
  return three_term_to_H(gogm_dual_coeffs(ts));
}

namespace {

void record(Trajectory& tr, const ConvexOracle& f, const Vec& x, int index) {
  if (!all_finite(x))
    throw DivergenceError("non-finite iterate at index " + std::to_string(index), index);
  const double fx = f.value(x);
  Vec g = f.gradient(x);
  if (!std::isfinite(fx) || !all_finite(g))
    throw DivergenceError("non-finite value or gradient at index " + std::to_string(index),
                          index);
  tr.points.push_back(x);
  tr.grads.push_back(std::move(g));
  tr.fvals.push_back(fx);
}

void check_start(const ConvexOracle& f, const Vec& x0, double L) {
  if (!(L > 0.0)) throw Error("smoothness constant must be positive");
  if (x0.size() != f.dim()) throw Error("starting point dimension does not match oracle");
}

}  // namespace

Trajectory run_fsfom(const StepsizeMatrix& H, const ConvexOracle& f, const Vec& x0, double L) {
  check_start(f, x0, L);
  const int n = H.n();
  Trajectory tr;
  tr.lipschitz = L;
  tr.points.reserve(n + 1);
  record(tr, f, x0, 0);
  for (int k = 0; k < n; ++k) {
    Vec step = Vec::Zero(x0.size());
    for (int i = 0; i <= k; ++i) step += H(k, i) * tr.grads[i];
    record(tr, f, tr.points[k] - step / L, k + 1);
  }
  return tr;
}

Trajectory run_three_term(const ThreeTermCoeffs& c, const ConvexOracle& f, const Vec& x0,
                          double L) {
  check_start(f, x0, L);
  const int n = c.n();
  Trajectory tr;
  tr.lipschitz = L;
  record(tr, f, x0, 0);
  Vec prev_plus = x0;
  for (int k = 0; k < n; ++k) {
    const Vec& xk = tr.points[k];
    Vec plus = xk - tr.grads[k] / L;
    Vec next = plus + c.beta[k] * (plus - prev_plus) + c.gamma[k] * (plus - xk);
    prev_plus = std::move(plus);
    record(tr, f, next, k + 1);
  }
  return tr;
}

}  // namespace hdual::method_lib
