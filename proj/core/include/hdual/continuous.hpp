#ifndef HDUAL_CONTINUOUS_HPP
#define HDUAL_CONTINUOUS_HPP

#include <hdual/oracle.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace hdual::continuous {

// Kernel H(t,s) = C p^2 s^{2p-1} / t^{p+1} on (0, T).
struct PFamily {
  double p = 2.0;
  double C = 0.5;
  double T = 10.0;
  void validate() const;
};

// Kernel H(t,s) = s^r / t^r on (0, T).
struct RFamily {
  double r = 3.0;
  double T = 10.0;
  void validate() const;
};

double kernel(const PFamily& pf, double t, double s);
double dual_kernel(const PFamily& pf, double t, double s);  // H(T-s, T-t)
double kernel(const RFamily& rf, double t, double s);
double dual_kernel(const RFamily& rf, double t, double s);

double u_weight(const PFamily& pf, double t);  // C t^p
double v_weight(const PFamily& pf, double t);  // 1 / u(T-t)
double u_weight(const RFamily& rf, double t);  // t^2 / (2(r-1))
double v_weight(const RFamily& rf, double t);

// Friction coefficients of the second-order ODEs X'' + a(t) X' + b(t) grad f(X) = 0.
double primal_friction(const PFamily& pf, double t);  // (p+1)/t
double dual_friction(const PFamily& pf, double t);    // (2p-1)/(T-t)
double primal_friction(const RFamily& rf, double t);  // r/t
double dual_friction(const RFamily& rf, double t);    // r/(T-t)

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double eps_rel = 1e-6;       // primal start offset, as a fraction of T
  // Dual stopping offset. Near T the velocity shrinks like (T-t)^{p-1}; the
  // offset keeps it well above atol and limits cancellation in f(Y) - f(Y(T)).
  double eps_rel_dual = 1e-4;
  long max_steps = 2000000;
};

// Optional velocity rescaling: the integrator carries w = x'/sigma(t) and needs
// sigma and its log-derivative sigma'/sigma. Keeps a vanishing velocity well
// above the absolute tolerance.
struct SecondOrderOde {
  std::function<double(double)> friction;
  std::function<double(double)> grad_scale;
  std::function<double(double)> velocity_scale = nullptr;
  std::function<double(double)> velocity_scale_log_rate = nullptr;
};

// Extra scalar integrands carried alongside the state, evaluated at (t, x, x', grad f(x), f(x)).
using Integrand = std::function<Vec(double, const Vec&, const Vec&, const Vec&, double)>;

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<Vec> X;
  std::vector<Vec> V;  // velocities
  std::vector<Vec> G;  // gradients
  std::vector<double> f;
  std::vector<Vec> Q;  // running integrals, empty vectors when no integrand
  Vec terminal;        // X(T), extrapolated on the dual side
  double terminal_velocity_error = 0.0;  // dual side: relative gap of the endpoint scaling law
  long rejected_steps = 0;
  std::size_t size() const { return t.size(); }
};

// Dormand-Prince 5(4) with FSAL, deterministic step control.
OdeTrajectory integrate(const SecondOrderOde& ode, const ConvexOracle& f, double t0, double t1,
                        const Vec& x_init, const Vec& v_init, const OdeOptions& opts,
                        const Integrand& q = nullptr, int nq = 0);

OdeTrajectory integrate_primal(const PFamily& pf, const ConvexOracle& f, const Vec& x0,
                               const OdeOptions& opts = {}, const Integrand& q = nullptr,
                               int nq = 0);
// Stops at T - eps and extrapolates Y(T) from the endpoint power law.
OdeTrajectory integrate_dual(const PFamily& pf, const ConvexOracle& f, const Vec& y0,
                             const OdeOptions& opts = {}, const Integrand& q = nullptr, int nq = 0);
OdeTrajectory integrate_primal(const RFamily& rf, const ConvexOracle& f, const Vec& x0,
                               const OdeOptions& opts = {}, const Integrand& q = nullptr,
                               int nq = 0);
OdeTrajectory integrate_dual(const RFamily& rf, const ConvexOracle& f, const Vec& y0,
                             const OdeOptions& opts = {}, const Integrand& q = nullptr, int nq = 0);

struct EnergyCurve {
  std::vector<double> t;
  std::vector<double> values;    // integral form
  std::vector<double> closed;    // closed form, same grid
  double max_increase_rel = 0.0; // max_j (E_{j+1} - E_j) / max(|E_0|, tiny)
  double identity_residual = 0.0;  // max |integral - closed| / max(|E_0|, tiny)
};

struct RateCheck {
  double measured = 0.0;
  double bound = 0.0;
  double energy_end = 0.0;  // U(T) or V(T)
  bool holds(double mult_slack) const { return measured <= bound * (1.0 + mult_slack); }
};

struct PrimalReport {
  OdeTrajectory traj;
  EnergyCurve energy;
  RateCheck rate;  // f(X(T)) - f* <= R^2 / (2 C T^p)
};

struct DualReport {
  OdeTrajectory traj;
  EnergyCurve energy;
  RateCheck rate;  // |grad f(Y(T))|^2 / 2 <= (f(y0) - f*) / (C T^p)
};

PrimalReport analyze_primal(const PFamily& pf, const ConvexOracle& f, const Vec& x0,
                            const Vec& xstar, double fstar, const OdeOptions& opts = {});
DualReport analyze_dual(const PFamily& pf, const ConvexOracle& f, const Vec& y0, double fstar,
                        const OdeOptions& opts = {});

enum class Side { Primal, Dual };

struct SosResidual {
  double lhs = 0.0;           // U(T) - u(T) gap, or V(T) - |grad f(Y(T))|^2 / 2
  double rhs = 0.0;           // boundary squares plus integrated squares
  double boundary = 0.0;
  double integral = 0.0;
  double scale = 0.0;         // U(0) or V(0)
  double relative = 0.0;      // |lhs - rhs| / max(|lhs|, |rhs|, scale)
};

// Primal side needs x*, f*; the dual side ignores them.
SosResidual sos_identity_check(const RFamily& rf, const ConvexOracle& f, const Vec& start, Side side,
                               const std::optional<Vec>& xstar, double fstar,
                               const OdeOptions& opts = {});

}  // namespace hdual::continuous

#endif
