#ifndef HDUAL_CERTIFY_HPP
#define HDUAL_CERTIFY_HPP

#include <hdual/method_lib.hpp>
#include <hdual/oracle.hpp>

#include <string>
#include <vector>

namespace hdual::certify {

using method_lib::StepsizeMatrix;
using method_lib::Trajectory;

enum class WeightRole { FunctionValue, GradientNorm };

// u_0..u_N (or v_0..v_N). The value at index -1 is the constant 0.
struct WeightSequence {
  std::vector<double> values;
  WeightRole role = WeightRole::FunctionValue;

  int n() const { return static_cast<int>(values.size()) - 1; }
  double at(int i) const { return i < 0 ? 0.0 : values[static_cast<std::size_t>(i)]; }
  bool positive() const;
  bool nondecreasing() const;
};

// v_i = 1 / u_{N-i}
WeightSequence reciprocal_reversed(const WeightSequence& u);

// Weights the method catalog pairs with each function-value method.
WeightSequence ogm_weights(int n);
WeightSequence obl_weights(int n);
WeightSequence gd_weights(int n, double h);
WeightSequence gogm_weights(const method_lib::TSequence& ts);  // u_i = T_i

enum class Form { S, T };

// Symmetric (N+1) x (N+1). The Lyapunov slack equals (1/L) sum_ij M_ij <g_i, g_j>,
// so off-diagonal entries are half of the paired coefficients.
struct CertificateMatrix {
  Form form = Form::S;
  Mat entries;
  int n() const { return static_cast<int>(entries.rows()) - 1; }
};

double bracket_convexity(const ConvexOracle& f, const Vec& x, const Vec& y);
double bracket_coco(const ConvexOracle& f, const Vec& x, const Vec& y, double L);
double bracket_coco_star(const ConvexOracle& f, const Vec& x, double L, double fstar);

// U_{-1}..U_N (N+2 values, index 0 holds U_{-1}).
std::vector<double> energy_U(const Trajectory& traj, const WeightSequence& u, const Vec& xstar,
                             double fstar);
// V_0..V_N.
std::vector<double> energy_V(const Trajectory& traj, const WeightSequence& v, double fstar);

// Entrywise closed forms.
CertificateMatrix build_S(const StepsizeMatrix& H, const WeightSequence& u);
CertificateMatrix build_T(const StepsizeMatrix& HA, const WeightSequence& v);
// Same matrices assembled from rank-one basis-vector pieces.
CertificateMatrix build_S_assembled(const StepsizeMatrix& H, const WeightSequence& u);
CertificateMatrix build_T_assembled(const StepsizeMatrix& HA, const WeightSequence& v);

Mat build_M(const WeightSequence& u);

// (1/L) sum_ij M_ij <g_i, g_j>
double quadratic_form(const CertificateMatrix& C, const std::vector<Vec>& g, double L);

struct CongruenceReport {
  double max_abs_residual = 0.0;
  double scale = 1.0;  // max(1, max |S|)
  bool pass = false;
};

// S(H,u) against M(u)' T(H^A, v) M(u) with v the reciprocal reversal of u.
CongruenceReport verify_congruence(const StepsizeMatrix& H, const WeightSequence& u,
                                   double tol = 1e-9);

// Cyclic Jacobi, ascending order.
std::vector<double> symmetric_eigenvalues(const Mat& A);

struct Verdict {
  bool pass = false;
  double min_eig = 0.0;
  double spectral_radius = 0.0;
};

Verdict check_psd(const Mat& A, double tol = 1e-9);
Verdict check_C1(const StepsizeMatrix& H, const WeightSequence& u, double tol = 1e-9);
Verdict check_C2(const StepsizeMatrix& HA, const WeightSequence& v, double tol = 1e-9);

enum class Kind { C1, C2 };

// C1: f(x_N) - f* <= coefficient * L ||x_0 - x*||^2.
// C2: ||grad f(y_N)||^2 / (2L) <= coefficient * (f(y_0) - f*).
struct Bound {
  Kind kind = Kind::C1;
  double coefficient = 0.0;
  std::string formula;
  double evaluate(double scale) const { return coefficient * scale; }
};

Bound rate_from_certificate(Kind kind, const WeightSequence& w, const Verdict& verdict);

// ||grad f(x_N)||^2 / (2L) <= min(fgap_coeff * (f(x_0) - f*), dist_coeff * L ||x_0 - x*||^2)
struct GdCorollaryBound {
  double fgap_coeff = 0.0;
  double dist_coeff = 0.0;
  double evaluate(double fgap, double L_R2) const;
};

GdCorollaryBound gd_gradient_corollary_bound(int n, double h);

}  // namespace hdual::certify

#endif
