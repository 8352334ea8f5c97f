#include <hdual/certify.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hdual::certify {

bool WeightSequence::positive() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return x > 0.0; });
}

bool WeightSequence::nondecreasing() const {
  return std::is_sorted(values.begin(), values.end());
}

WeightSequence reciprocal_reversed(const WeightSequence& u) {
  const int N = u.n();
  WeightSequence v;
  v.role = u.role == WeightRole::FunctionValue ? WeightRole::GradientNorm
                                                : WeightRole::FunctionValue;
  v.values.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    if (u.values[N - i] == 0.0) throw DivisionGuardError("zero weight cannot be inverted", N - i);
    v.values[i] = 1.0 / u.values[N - i];
  }
  return v;
}

WeightSequence ogm_weights(int n) {
  const auto th = method_lib::theta_sequence(n).values;
  WeightSequence u;
  for (int i = 0; i < n; ++i) u.values.push_back(2.0 * th[i] * th[i]);
  u.values.push_back(th[n] * th[n]);
  return u;
}

WeightSequence obl_weights(int n) {
  if (n < 1) throw Error("obl weights need n >= 1");
  const double gam = std::sqrt(n * (n + 1.0) / 2.0);
  WeightSequence u;
  for (int i = 0; i < n; ++i) u.values.push_back((i + 1.0) * (i + 2.0) / 2.0);
  u.values.push_back(gam * gam + gam);
  return u;
}

WeightSequence gd_weights(int n, double h) {
  if (n < 1) throw Error("gd weights need n >= 1");
  const double c = 2.0 * n * h + 1.0;
  WeightSequence u;
  for (int i = 0; i < n; ++i) u.values.push_back(c * (i + 1.0) / (2.0 * n - i));
  u.values.push_back(c);
  return u;
}

WeightSequence gogm_weights(const method_lib::TSequence& ts) {
  WeightSequence u;
  u.values = ts.T;
  return u;
}

double bracket_convexity(const ConvexOracle& f, const Vec& x, const Vec& y) {
  return f.value(y) - f.value(x) + f.gradient(y).dot(x - y);
}

double bracket_coco(const ConvexOracle& f, const Vec& x, const Vec& y, double L) {
  const Vec gx = f.gradient(x), gy = f.gradient(y);
  return f.value(y) - f.value(x) + gy.dot(x - y) + (gx - gy).squaredNorm() / (2.0 * L);
}

double bracket_coco_star(const ConvexOracle& f, const Vec& x, double L, double fstar) {
  return fstar - f.value(x) + f.gradient(x).squaredNorm() / (2.0 * L);
}

namespace {

// Cocoercivity bracket on stored trajectory data.
double coco(const Trajectory& t, int i, int j) {
  const double L = t.lipschitz;
  return t.fvals[j] - t.fvals[i] + t.grads[j].dot(t.points[i] - t.points[j]) +
         (t.grads[i] - t.grads[j]).squaredNorm() / (2.0 * L);
}

void check_lengths(const Trajectory& t, const WeightSequence& w) {
  if (t.n() != w.n()) throw Error("trajectory and weights have different lengths");
}

}  // namespace

std::vector<double> energy_U(const Trajectory& traj, const WeightSequence& u, const Vec& xstar,
                             double fstar) {
  check_lengths(traj, u);
  const int N = u.n();
  const double L = traj.lipschitz;
  std::vector<double> U;
  U.push_back(0.5 * L * (traj.points[0] - xstar).squaredNorm());
  for (int k = 0; k <= N; ++k) {
    double next = U.back();
    if (k >= 1) next += u.at(k - 1) * coco(traj, k - 1, k);
    const double star = traj.fvals[k] - fstar + traj.grads[k].dot(xstar - traj.points[k]) +
                        traj.grads[k].squaredNorm() / (2.0 * L);
    next += (u.at(k) - u.at(k - 1)) * star;
    U.push_back(next);
  }
  return U;
}

std::vector<double> energy_V(const Trajectory& traj, const WeightSequence& v, double fstar) {
  check_lengths(traj, v);
  const int N = v.n();
  const double L = traj.lipschitz;
  const double end_star = fstar - traj.fvals[N] + traj.grads[N].squaredNorm() / (2.0 * L);
  std::vector<double> V;
  V.push_back(v.at(0) * (traj.fvals[0] - fstar + end_star));
  for (int k = 1; k <= N; ++k)
    V.push_back(V.back() + v.at(k) * coco(traj, k - 1, k) +
                (v.at(k) - v.at(k - 1)) * coco(traj, N, k - 1));
  return V;
}

namespace {

// Column partial sums: colsum(j, a, b) = sum_{l=a..b} h_{l+1,j}.
class ColumnSums {
 public:
  explicit ColumnSums(const StepsizeMatrix& H) : n_(H.n()), pre_(Mat::Zero(H.n() + 1, H.n())) {
    for (int l = 0; l < n_; ++l) pre_.row(l + 1) = pre_.row(l) + H.dense().row(l);
  }
  double operator()(int j, int a, int b) const {
    if (b < a) return 0.0;
    return pre_(b + 1, j) - pre_(a, j);
  }

 private:
  int n_;
  Mat pre_;
};

void place(Mat& M, int i, int j, double paired) {
  if (i == j) {
    M(i, i) = paired;
  } else {
    M(i, j) = 0.5 * paired;
    M(j, i) = 0.5 * paired;
  }
}

void check_sizes(const StepsizeMatrix& H, const WeightSequence& w) {
  if (H.n() != w.n()) throw Error("stepsize matrix and weights have different N");
}

}  // namespace

CertificateMatrix build_S(const StepsizeMatrix& H, const WeightSequence& u) {
  check_sizes(H, u);
  const int N = H.n();
  const ColumnSums cs(H);
  auto h = [&](int k, int i) { return H(k - 1, i); };  // h_{k,i}
  auto du = [&](int i) { return u.at(i) - u.at(i - 1); };
  Mat S = Mat::Zero(N + 1, N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      if (i == j) {
        s = -0.5 * du(i) * du(i) + (i == N ? 0.5 * u.at(N) : u.at(i));
      } else if (j == i - 1) {
        s = u.at(i) * h(i, i - 1) - u.at(i - 1) - du(i) * du(i - 1);
      } else {
        s = du(i) * cs(j, j, i - 1) + u.at(i - 1) * h(i, j) - du(i) * du(j);
      }
      place(S, i, j, s);
    }
  }
  return {Form::S, S};
}

CertificateMatrix build_T(const StepsizeMatrix& HA, const WeightSequence& v) {
  check_sizes(HA, v);
  const int N = HA.n();
  const ColumnSums cs(HA);
  auto h = [&](int k, int i) { return HA(k - 1, i); };
  auto dv = [&](int i) { return v.at(i + 1) - v.at(i); };  // v_{i+1} - v_i
  Mat T = Mat::Zero(N + 1, N + 1);
  double tail = 0.0;
  for (int k = 0; k < N; ++k) tail += 0.5 * dv(k);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= i; ++j) {
      double t = 0.0;
      if (i == N && j == N) {
        t = 0.5 * (v.at(0) - 1.0) + 0.5 * v.at(N) + tail;
      } else if (i == j) {
        const double left = i == 0 ? v.at(1) : v.at(i + 1) + v.at(i);
        t = 0.5 * left + 0.5 * dv(i) - dv(i) * cs(i, i, N - 1);
      } else if (i == N && j == N - 1) {
        t = v.at(N) * h(N, N - 1) - v.at(N) - (v.at(N) - v.at(N - 1));
      } else if (i == N) {
        t = v.at(N) * h(N, j) - dv(j);
      } else if (j == i - 1) {
        t = v.at(i) * h(i, i - 1) - v.at(i) - dv(i) * cs(i - 1, i, N - 1) -
            (v.at(i) - v.at(i - 1)) * cs(i, i, N - 1);
      } else {
        t = v.at(i) * h(i, j) - dv(i) * cs(j, i, N - 1) - dv(j) * cs(i, i, N - 1);
      }
      place(T, i, j, t);
    }
  }
  return {Form::T, T};
}

namespace {

Vec unit(int i, int N) {
  Vec e = Vec::Zero(N + 1);
  if (i >= 0 && i <= N) e(i) = 1.0;
  return e;
}

Mat padded(const StepsizeMatrix& H) {
  const int N = H.n();
  Mat P = Mat::Zero(N + 1, N + 1);
  P.block(1, 0, N, N) = H.dense();
  return P;
}

}  // namespace

CertificateMatrix build_S_assembled(const StepsizeMatrix& H, const WeightSequence& u) {
  check_sizes(H, u);
  const int N = H.n();
  Vec w(N + 1);
  for (int i = 0; i <= N; ++i) w(i) = u.at(i) - u.at(i - 1);
  Mat S = -0.5 * w * w.transpose();
  Mat P = Mat::Zero(N + 1, N + 1);
  Mat Q = Mat::Zero(N + 1, N + 1);
  Vec prefix = Vec::Zero(N + 1);
  for (int i = 0; i <= N; ++i) {
    prefix(i) = 1.0;
    const Vec d = unit(i, N) - unit(i + 1, N);
    P += u.at(i) * prefix * d.transpose();
    Q += u.at(i) * (d * unit(i, N).transpose() + unit(i, N) * d.transpose());
  }
  const Mat HH = padded(H);
  S += 0.5 * (HH.transpose() * P + P.transpose() * HH);
  S += 0.5 * (Q - u.at(N) * unit(N, N) * unit(N, N).transpose());
  return {Form::S, S};
}

CertificateMatrix build_T_assembled(const StepsizeMatrix& HA, const WeightSequence& v) {
  check_sizes(HA, v);
  const int N = HA.n();
  Mat T = Mat::Zero(N + 1, N + 1);
  const Vec eN = unit(N, N);
  for (int i = 0; i <= N; ++i) {
    const Vec a = unit(i - 1, N) - unit(i, N);
    const Vec b = unit(i - 1, N) - eN;
    T += 0.5 * v.at(i) * (a * b.transpose() + b * a.transpose());
  }
  T -= 0.5 * v.at(0) * unit(0, N) * unit(0, N).transpose();
  T -= 0.5 * eN * eN.transpose();
  const Mat HH = padded(HA);
  Vec suffix = Vec::Zero(N + 1);
  for (int i = N; i >= 0; --i) {
    suffix(i) = 1.0;
    const Mat X = HH.transpose() * suffix * (unit(i, N) - unit(i - 1, N)).transpose();
    T += 0.5 * v.at(i) * (X + X.transpose());
  }
  return {Form::T, T};
}

Mat build_M(const WeightSequence& u) {
  const int N = u.n();
  Mat M = Mat::Zero(N + 1, N + 1);
  M(0, N) = u.at(N);
  for (int r = 1; r <= N; ++r) {
    M(r, N - r) = u.at(N - r);
    for (int c = N - r + 1; c <= N; ++c) M(r, c) = u.at(c) - u.at(c - 1);
  }
  return M;
}

double quadratic_form(const CertificateMatrix& C, const std::vector<Vec>& g, double L) {
  const int N = C.n();
  if (static_cast<int>(g.size()) != N + 1) throw Error("gradient bundle has the wrong length");
  double s = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) s += C.entries(i, j) * g[i].dot(g[j]);
  return s / L;
}

CongruenceReport verify_congruence(const StepsizeMatrix& H, const WeightSequence& u, double tol) {
  const WeightSequence v = reciprocal_reversed(u);
  const Mat S = build_S(H, u).entries;
  const Mat T = build_T(method_lib::anti_transpose(H), v).entries;
  const Mat M = build_M(u);
  CongruenceReport r;
  r.max_abs_residual = (S - M.transpose() * T * M).cwiseAbs().maxCoeff();
  r.scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  r.pass = r.max_abs_residual <= tol * r.scale;
  return r;
}

std::vector<double> symmetric_eigenvalues(const Mat& A_in) {
  if (A_in.rows() != A_in.cols()) throw Error("eigenvalues need a square matrix");
  Mat A = 0.5 * (A_in + A_in.transpose());
  const Eigen::Index n = A.rows();
  const double fro = std::max(A.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (std::sqrt(off) <= 1e-15 * fro) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = A(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

Verdict check_psd(const Mat& A, double tol) {
  const auto ev = symmetric_eigenvalues(A);
  Verdict v;
  v.min_eig = ev.front();
  v.spectral_radius = std::max(std::abs(ev.front()), std::abs(ev.back()));
  v.pass = v.min_eig >= -tol * std::max(1.0, v.spectral_radius);
  return v;
}

Verdict check_C1(const StepsizeMatrix& H, const WeightSequence& u, double tol) {
  return check_psd(build_S(H, u).entries, tol);
}

Verdict check_C2(const StepsizeMatrix& HA, const WeightSequence& v, double tol) {
  return check_psd(build_T(HA, v).entries, tol);
}

Bound rate_from_certificate(Kind kind, const WeightSequence& w, const Verdict& verdict) {
  if (!verdict.pass) throw Error("no bound: the certificate check failed");
  if (!w.positive() || !w.nondecreasing())
    throw Error("no bound: weights must be positive and nondecreasing");
  Bound b;
  b.kind = kind;
  std::ostringstream os;
  if (kind == Kind::C1) {
    b.coefficient = 1.0 / (2.0 * w.at(w.n()));
    os << "f(x_N) - f* <= L*||x_0 - x*||^2 / (2*u_N), u_N = " << w.at(w.n());
  } else {
    b.coefficient = w.at(0);
    os << "||grad f(y_N)||^2 / (2L) <= v_0 * (f(y_0) - f*), v_0 = " << w.at(0);
  }
  b.formula = os.str();
  return b;
}

double GdCorollaryBound::evaluate(double fgap, double L_R2) const {
  return std::min(fgap_coeff * fgap, dist_coeff * L_R2);
}

GdCorollaryBound gd_gradient_corollary_bound(int n, double h) {
  if (n < 1) throw Error("corollary bound needs n >= 1");
  if (!(h > 0.0 && h <= 1.0)) throw Error("corollary bound needs 0 < h <= 1");
  GdCorollaryBound b;
  b.fgap_coeff = 1.0 / (2.0 * n * h + 1.0);
  const int lo = n / 2;
  const int hi = n - lo;
  b.dist_coeff = 1.0 / (2.0 * (2.0 * lo * h + 1.0) * (2.0 * hi * h + 1.0));
  return b;
}

}  // namespace hdual::certify
