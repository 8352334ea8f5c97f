#include <hdual/continuous.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace hdual::continuous {

void PFamily::validate() const {
  if (!(p >= 2.0) || !(C > 0.0) || !(T > 0.0) || !std::isfinite(p) || !std::isfinite(C) ||
      !std::isfinite(T))
    throw Error("p-family needs p >= 2, C > 0, T > 0");
}

void RFamily::validate() const {
  if (!(r >= 3.0) || !(T > 0.0) || !std::isfinite(r) || !std::isfinite(T))
    throw Error("r-family needs r >= 3, T > 0");
}

double kernel(const PFamily& pf, double t, double s) {
  return pf.C * pf.p * pf.p * std::pow(s, 2.0 * pf.p - 1.0) / std::pow(t, pf.p + 1.0);
}
double dual_kernel(const PFamily& pf, double t, double s) { return kernel(pf, pf.T - s, pf.T - t); }
double kernel(const RFamily& rf, double t, double s) { return std::pow(s / t, rf.r); }
double dual_kernel(const RFamily& rf, double t, double s) { return kernel(rf, rf.T - s, rf.T - t); }

double u_weight(const PFamily& pf, double t) { return pf.C * std::pow(t, pf.p); }
double v_weight(const PFamily& pf, double t) { return 1.0 / u_weight(pf, pf.T - t); }
double u_weight(const RFamily& rf, double t) { return t * t / (2.0 * (rf.r - 1.0)); }
double v_weight(const RFamily& rf, double t) { return 1.0 / u_weight(rf, rf.T - t); }

double primal_friction(const PFamily& pf, double t) { return (pf.p + 1.0) / t; }
double dual_friction(const PFamily& pf, double t) { return (2.0 * pf.p - 1.0) / (pf.T - t); }
double primal_friction(const RFamily& rf, double t) { return rf.r / t; }
double dual_friction(const RFamily& rf, double t) { return rf.r / (rf.T - t); }

namespace {

// Dormand-Prince tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
// 5th-order minus 4th-order weights.
constexpr std::array<double, 7> kE = {35.0 / 384 - 5179.0 / 57600,
                                      0.0,
                                      500.0 / 1113 - 7571.0 / 16695,
                                      125.0 / 192 - 393.0 / 640,
                                      -2187.0 / 6784 + 92097.0 / 339200,
                                      11.0 / 84 - 187.0 / 2100,
                                      -1.0 / 40};

struct Sample {
  Vec g;
  double fx;
};

}  // namespace

OdeTrajectory integrate(const SecondOrderOde& ode, const ConvexOracle& f, double t0, double t1,
                        const Vec& x_init, const Vec& v_init, const OdeOptions& opts,
                        const Integrand& q, int nq) {
  if (!(t1 > t0)) throw Error("integration interval is empty");
  const int d = f.dim();
  if (x_init.size() != d || v_init.size() != d)
    throw Error("initial state dimension does not match oracle");
  if (nq < 0 || (nq > 0 && !q)) throw Error("integrand count without integrand");
  const int m = 2 * d + nq;

  // State layout: [x, x', running integrals]. Only the first 2d components
  // drive step control, so adding integrands never changes the grid.
  // With rescaling the middle block holds w = x'/sigma, and
  // w' = -(a + sigma'/sigma) w - (b/sigma) grad f.
  const bool scaled = static_cast<bool>(ode.velocity_scale);
  if (scaled && !ode.velocity_scale_log_rate) throw Error("velocity scale without its rate");
  auto sigma = [&](double t) { return scaled ? ode.velocity_scale(t) : 1.0; };
  auto rhs = [&](double t, const Vec& y, Vec& dy) {
    const Vec x = y.head(d);
    const double sg = sigma(t);
    const Vec v = sg * y.segment(d, d);
    const Vec g = f.gradient(x);
    dy.resize(m);
    dy.head(d) = v;
    if (scaled)
      dy.segment(d, d) = -(ode.friction(t) + ode.velocity_scale_log_rate(t)) * y.segment(d, d) -
                         (ode.grad_scale(t) / sg) * g;
    else
      dy.segment(d, d) = -ode.friction(t) * v - ode.grad_scale(t) * g;
    if (nq > 0) dy.tail(nq) = q(t, x, v, g, f.value(x));
  };

  OdeTrajectory tr;
  Vec y(m);
  y.head(d) = x_init;
  y.segment(d, d) = v_init / sigma(t0);
  if (nq > 0) y.tail(nq).setZero();

  auto record = [&](double t, const Vec& state) {
    Vec x = state.head(d);
    tr.t.push_back(t);
    tr.G.push_back(f.gradient(x));
    tr.f.push_back(f.value(x));
    tr.V.push_back(sigma(t) * state.segment(d, d));
    tr.Q.push_back(nq > 0 ? Vec(state.tail(nq)) : Vec());
    tr.X.push_back(std::move(x));
  };
  record(t0, y);

  std::array<Vec, 7> k;
  rhs(t0, y, k[0]);
  double t = t0;
  double h = 1e-3 * (t1 - t0);
  const double h_min = 1e-15 * std::max(std::abs(t0), std::abs(t1));
  long steps = 0;
  Vec stage(m), y_new(m), err(m);
  while (t < t1) {
    if (++steps > opts.max_steps) throw Error("integrator exceeded the step budget");
    h = std::min(h, t1 - t);
    if (h < h_min)
      throw Error("integrator step size underflow at t = " + std::to_string(t));
    for (int s = 1; s < 7; ++s) {
      stage = y;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) stage += h * kA[s][j] * k[j];
      rhs(t + kC[s] * h, stage, k[s]);
    }
    y_new = stage;  // row 7 equals the 5th-order weights (FSAL)
    err.setZero();
    for (int s = 0; s < 7; ++s)
      if (kE[s] != 0.0) err += h * kE[s] * k[s];
    double acc = 0.0;
    for (int i = 0; i < 2 * d; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
      acc += (err(i) / sc) * (err(i) / sc);
    }
    const double en = std::sqrt(acc / (2.0 * d));
    if (!std::isfinite(en)) {
      if (!y_new.head(2 * d).allFinite())
        throw DivergenceError("non-finite ODE state near t = " + std::to_string(t),
                              static_cast<int>(tr.t.size()));
      h *= 0.2;
      ++tr.rejected_steps;
      continue;
    }
    if (en <= 1.0) {
      t = (t1 - t - h <= 1e-15 * std::abs(t1)) ? t1 : t + h;
      y = y_new;
      k[0] = k[6];
      record(t, y);
    } else {
      ++tr.rejected_steps;
    }
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= en <= 1.0 ? factor : std::min(factor, 1.0);
  }
  tr.terminal = tr.X.back();
  return tr;
}

namespace {

SecondOrderOde p_primal_ode(const PFamily& pf) {
  return {[pf](double t) { return primal_friction(pf, t); },
          [pf](double t) { return pf.C * pf.p * pf.p * std::pow(t, pf.p - 2.0); }};
}

// Near T the dual velocity decays like (T-t)^{p-1}; carry it divided by that.
SecondOrderOde p_dual_ode(const PFamily& pf) {
  return {[pf](double t) { return dual_friction(pf, t); },
          [pf](double t) { return pf.C * pf.p * pf.p * std::pow(pf.T - t, pf.p - 2.0); },
          [pf](double t) { return std::pow(pf.T - t, pf.p - 1.0); },
          [pf](double t) { return -(pf.p - 1.0) / (pf.T - t); }};
}

SecondOrderOde r_primal_ode(const RFamily& rf) {
  return {[rf](double t) { return primal_friction(rf, t); }, [](double) { return 1.0; }};
}

SecondOrderOde r_dual_ode(const RFamily& rf) {
  return {[rf](double t) { return dual_friction(rf, t); }, [](double) { return 1.0; },
          [rf](double t) { return rf.T - t; }, [rf](double t) { return -1.0 / (rf.T - t); }};
}

void require_dim(const ConvexOracle& f, const Vec& x) {
  if (x.size() != f.dim()) throw Error("starting point dimension does not match oracle");
}

// Near the terminal time Y'(t) ~ -a (T-t)^{k-1} grad f(Y(T)). Fills the
// extrapolated endpoint and the relative mismatch of the scaling law.
void finish_dual(OdeTrajectory& tr, const ConvexOracle& f, double eps, double k, double a) {
  const Vec& y = tr.X.back();
  const Vec& v = tr.V.back();
  tr.terminal = y + eps * v / k;
  const Vec gT = f.gradient(tr.terminal);
  const Vec predicted = -a * gT;
  const Vec observed = v / std::pow(eps, k - 1.0);
  const double scale = std::max(predicted.norm(), 1e-300);
  tr.terminal_velocity_error = predicted.norm() == 0.0 && observed.norm() == 0.0
                                   ? 0.0
                                   : (observed - predicted).norm() / scale;
}

}  // namespace

OdeTrajectory integrate_primal(const PFamily& pf, const ConvexOracle& f, const Vec& x0,
                               const OdeOptions& opts, const Integrand& q, int nq) {
  pf.validate();
  require_dim(f, x0);
  const double eps = opts.eps_rel * pf.T;
  const Vec g0 = f.gradient(x0);
  // Leading-order balance of X'' + (p+1)/t X' = -C p^2 t^{p-2} grad f(x0).
  const Vec x_eps = x0 - 0.5 * pf.C * std::pow(eps, pf.p) * g0;
  const Vec v_eps = -0.5 * pf.C * pf.p * std::pow(eps, pf.p - 1.0) * g0;
  return integrate(p_primal_ode(pf), f, eps, pf.T, x_eps, v_eps, opts, q, nq);
}

OdeTrajectory integrate_dual(const PFamily& pf, const ConvexOracle& f, const Vec& y0,
                             const OdeOptions& opts, const Integrand& q, int nq) {
  pf.validate();
  require_dim(f, y0);
  const double eps = opts.eps_rel_dual * pf.T;
  OdeTrajectory tr =
      integrate(p_dual_ode(pf), f, 0.0, pf.T - eps, y0, Vec::Zero(y0.size()), opts, q, nq);
  finish_dual(tr, f, eps, pf.p, pf.C * pf.p);
  return tr;
}

OdeTrajectory integrate_primal(const RFamily& rf, const ConvexOracle& f, const Vec& x0,
                               const OdeOptions& opts, const Integrand& q, int nq) {
  rf.validate();
  require_dim(f, x0);
  const double eps = opts.eps_rel * rf.T;
  const Vec g0 = f.gradient(x0);
  const Vec x_eps = x0 - eps * eps / (2.0 * (rf.r + 1.0)) * g0;
  const Vec v_eps = -eps / (rf.r + 1.0) * g0;
  return integrate(r_primal_ode(rf), f, eps, rf.T, x_eps, v_eps, opts, q, nq);
}

OdeTrajectory integrate_dual(const RFamily& rf, const ConvexOracle& f, const Vec& y0,
                             const OdeOptions& opts, const Integrand& q, int nq) {
  rf.validate();
  require_dim(f, y0);
  const double eps = opts.eps_rel_dual * rf.T;
  OdeTrajectory tr =
      integrate(r_dual_ode(rf), f, 0.0, rf.T - eps, y0, Vec::Zero(y0.size()), opts, q, nq);
  finish_dual(tr, f, eps, 2.0, 1.0 / (rf.r - 1.0));
  return tr;
}

namespace {

void fill_monotonicity(EnergyCurve& e, std::size_t closed_upto) {
  const double scale = std::max(std::abs(e.values.front()), 1e-300);
  e.max_increase_rel = 0.0;
  for (std::size_t j = 0; j + 1 < e.values.size(); ++j)
    e.max_increase_rel = std::max(e.max_increase_rel, (e.values[j + 1] - e.values[j]) / scale);
  e.identity_residual = 0.0;
  for (std::size_t j = 0; j < std::min(closed_upto, e.values.size()); ++j)
    e.identity_residual =
        std::max(e.identity_residual, std::abs(e.values[j] - e.closed[j]) / scale);
}

// f(y) - f(z) + <grad f(y), z - y>, nonpositive. When z is close to y the
// value difference is taken as a Gauss-Legendre integral of the gradient along
// the segment, avoiding cancellation between two nearly equal values of f.
double bracket(const ConvexOracle& f, const Vec& z, double fz, const Vec& y, double fy,
               const Vec& gy) {
  const Vec delta = y - z;
  if (delta.norm() > 1e-2 * std::max(1.0, y.norm())) return fy - fz - gy.dot(delta);
  static constexpr std::array<double, 5> node = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                 0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weight = {0.2369268850561891, 0.4786286704993665,
                                                   0.5688888888888889, 0.4786286704993665,
                                                   0.2369268850561891};
  double out = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double s = 0.5 * (node[i] + 1.0);
    out += 0.5 * weight[i] * (f.gradient(z + s * delta) - gy).dot(delta);
  }
  return out;
}

}  // namespace

PrimalReport analyze_primal(const PFamily& pf, const ConvexOracle& f, const Vec& x0,
                            const Vec& xstar, double fstar, const OdeOptions& opts) {
  pf.validate();
  const double p = pf.p;
  const double C = pf.C;
  // u'(t) [x*, X(t)], nonpositive for convex f.
  Integrand q = [&](double t, const Vec& x, const Vec&, const Vec& g, double fx) {
    Vec out(1);
    out(0) = C * p * std::pow(t, p - 1.0) * (fx - fstar + g.dot(xstar - x));
    return out;
  };
  PrimalReport rep{integrate_primal(pf, f, x0, opts, q, 1), {}, {}};
  const OdeTrajectory& tr = rep.traj;
  auto closed = [&](std::size_t j) {
    const double t = tr.t[j];
    return u_weight(pf, t) * (tr.f[j] - fstar) +
           0.5 * (tr.X[j] + (t / p) * tr.V[j] - xstar).squaredNorm();
  };
  const double start = closed(0);
  for (std::size_t j = 0; j < tr.size(); ++j) {
    rep.energy.t.push_back(tr.t[j]);
    rep.energy.values.push_back(start + tr.Q[j](0));
    rep.energy.closed.push_back(closed(j));
  }
  fill_monotonicity(rep.energy, tr.size());
  const double R2 = (x0 - xstar).squaredNorm();
  rep.rate.measured = f.value(tr.terminal) - fstar;
  rep.rate.bound = R2 / (2.0 * C * std::pow(pf.T, p));
  rep.rate.energy_end = rep.energy.values.back();
  return rep;
}

DualReport analyze_dual(const PFamily& pf, const ConvexOracle& f, const Vec& y0, double fstar,
                        const OdeOptions& opts) {
  pf.validate();
  const double p = pf.p;
  const double C = pf.C;
  const double T = pf.T;
  // First pass fixes Y(T); the second carries v'(t)[Y(T), Y(t)] on the same grid.
  const Vec yT = integrate_dual(pf, f, y0, opts).terminal;
  const double fT = f.value(yT);
  Integrand q = [&](double t, const Vec& y, const Vec&, const Vec& g, double fy) {
    Vec out(1);
    out(0) = p / (C * std::pow(T - t, p + 1.0)) * bracket(f, yT, fT, y, fy, g);
    return out;
  };
  DualReport rep{integrate_dual(pf, f, y0, opts, q, 1), {}, {}};
  const OdeTrajectory& tr = rep.traj;
  const double start = v_weight(pf, 0.0) * (f.value(y0) - fT);
  // Closed form v (f(Y) - f(Y(T))) + |W|^2/2 + <W, D> with W = Y'/(C p tau^{p-1}),
  // D = (Y - Y(T))/(C tau^p). It loses accuracy as tau -> 0, so the identity
  // residual only covers tau >= T/100.
  std::size_t closed_upto = 0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const double tau = T - tr.t[j];
    const Vec W = tr.V[j] / (C * p * std::pow(tau, p - 1.0));
    const Vec D = (tr.X[j] - yT) / (C * std::pow(tau, p));
    rep.energy.t.push_back(tr.t[j]);
    rep.energy.values.push_back(start + tr.Q[j](0));
    rep.energy.closed.push_back(v_weight(pf, tr.t[j]) * (tr.f[j] - fT) + 0.5 * W.squaredNorm() +
                                W.dot(D));
    if (tau >= 0.01 * T) closed_upto = j + 1;
  }
  fill_monotonicity(rep.energy, closed_upto);
  rep.rate.measured = 0.5 * f.gradient(yT).squaredNorm();
  rep.rate.bound = (f.value(y0) - fstar) / (C * std::pow(T, p));
  rep.rate.energy_end = rep.energy.values.back();
  return rep;
}

SosResidual sos_identity_check(const RFamily& rf, const ConvexOracle& f, const Vec& start, Side side,
                               const std::optional<Vec>& xstar, double fstar,
                               const OdeOptions& opts) {
  rf.validate();
  const double r = rf.r;
  const double T = rf.T;
  SosResidual out;
  if (side == Side::Primal) {
    if (!xstar) throw Error("primal identity needs a minimizer");
    const Vec xs = *xstar;
    Integrand q = [&](double t, const Vec& x, const Vec& v, const Vec& g, double fx) {
      Vec o(2);
      o(0) = t / (r - 1.0) * (fx - fstar + g.dot(xs - x));
      o(1) = (r - 3.0) * t / (2.0 * (r - 1.0)) * v.squaredNorm();
      return o;
    };
    const OdeTrajectory tr = integrate_primal(rf, f, start, opts, q, 2);
    const Vec& xT = tr.X.back();
    const Vec& vT = tr.V.back();
    const double U_T = 0.5 * (start - xs).squaredNorm() + tr.Q.back()(0);
    out.lhs = U_T - u_weight(rf, T) * (tr.f.back() - fstar);
    out.boundary =
        ((T * vT + 2.0 * (xT - xs)).squaredNorm() + 2.0 * (r - 3.0) * (xT - xs).squaredNorm()) /
        (4.0 * (r - 1.0));
    out.integral = tr.Q.back()(1);
    out.scale = 0.5 * (start - xs).squaredNorm();
  } else {
    const Vec yT = integrate_dual(rf, f, start, opts).terminal;
    const double fT = f.value(yT);
    Integrand q = [&](double t, const Vec& y, const Vec& v, const Vec& g, double fy) {
      const double tau = T - t;
      Vec o(2);
      o(0) = 4.0 * (r - 1.0) / (tau * tau * tau) * bracket(f, yT, fT, y, fy, g);
      o(1) = 2.0 * (r - 1.0) * (r - 3.0) * (tau * v + 2.0 * (y - yT)).squaredNorm() /
             std::pow(tau, 5.0);
      return o;
    };
    const OdeTrajectory tr = integrate_dual(rf, f, start, opts, q, 2);
    const double V_T = v_weight(rf, 0.0) * (f.value(start) - fT) + tr.Q.back()(0);
    out.lhs = V_T - 0.5 * f.gradient(yT).squaredNorm();
    out.boundary = 2.0 * (r - 1.0) * (r - 3.0) * (start - yT).squaredNorm() / std::pow(T, 4.0);
    out.integral = tr.Q.back()(1);
    out.scale = v_weight(rf, 0.0) * (f.value(start) - fT);
  }
  out.rhs = out.boundary + out.integral;
  const double scale = std::max({std::abs(out.lhs), std::abs(out.rhs), out.scale, 1e-300});
  out.relative = std::abs(out.lhs - out.rhs) / scale;
  return out;
}

}  // namespace hdual::continuous
