#ifndef HDUAL_COMPOSITE_HPP
#define HDUAL_COMPOSITE_HPP

#include <hdual/method_lib.hpp>
#include <hdual/oracle.hpp>

#include <optional>
#include <vector>

namespace hdual::composite {

using method_lib::StepsizeMatrix;
using method_lib::ThreeTermCoeffs;
using method_lib::TSequence;

// y^{+,alpha} = prox_{g/(alpha L)}(y - grad f(y) / (alpha L))
Vec prox_step(const CompositeOracle& F, const Vec& y, double alpha);

// Distance from 0 to L alpha (y+ - y) + grad f(y) + dg(y+). Empty when g exposes
// no subdifferential.
std::optional<double> prox_optimality_residual(const CompositeOracle& F, const Vec& y,
                                               double alpha);

// F(y+) - F(x+) - L alpha <y+ - y, x+ - y+> - (L/2)||y+ - y||^2, nonpositive.
double prox_grad_bracket(const CompositeOracle& F, const Vec& x, const Vec& y, double alpha);

struct CompositeTrajectory {
  std::vector<Vec> points;       // x_0..x_N
  std::vector<Vec> prox_points;  // x_0^{+,alpha}..x_N^{+,alpha}
  std::vector<double> prox_values;  // F at the prox points
  double lipschitz = 1.0;
  double alpha = 1.0;
  int n() const { return static_cast<int>(points.size()) - 1; }
};

// x_{k+1} = x_k - sum_{i<=k} alpha h_{k+1,i} (x_i - x_i^{+,alpha})
CompositeTrajectory run_composite(const StepsizeMatrix& H, const CompositeOracle& F,
                                  const Vec& x0, double alpha);

// x_{k+1} = x_k^+ + beta_k (x_k^+ - x_{k-1}^+) + gamma_k (x_k^+ - x_k), x_{-1}^+ = x_0,
// with + the alpha-proximal step. Its matrix in the form above is H(c) / alpha.
CompositeTrajectory run_composite_three_term(const ThreeTermCoeffs& c, const CompositeOracle& F,
                                             const Vec& x0, double alpha);

// First index with T_i > t_i^2, or -1.
int gfpgm_violation(const TSequence& ts, double rel_tol = 1e-12);
ThreeTermCoeffs gfpgm_coeffs(const TSequence& ts);
StepsizeMatrix gfpgm_H(const TSequence& ts);

// Lower-triangular N x N; row k, column i holds c_{k+1,i}.
struct CompositeCorrection {
  Mat entries;
  int n() const { return static_cast<int>(entries.rows()); }
};

CompositeCorrection build_C(const TSequence& ts);

// Both sides of the quadratic-form identity behind the correction matrix.
// The left side is symmetrized; the right side carries the t_i^2 / T_0 term
// that the feasibility condition also has.
struct ClaimSides {
  Mat lhs;
  Mat rhs;
  double residual() const { return (lhs - rhs).cwiseAbs().maxCoeff(); }
};
ClaimSides claim_sides(const TSequence& ts, bool include_T0_term = true);

// First k (0..N) failing the family condition, or -1.
int sfg_condition_violation(const TSequence& ts, double alpha, double rel_tol = 1e-12);

struct SfgFamily {
  StepsizeMatrix H;         // ((1/alpha) H_0 + (1/alpha^2) C)^A
  ThreeTermCoeffs primal;   // momentum form of (1/alpha) H_0 + (1/alpha^2) C, times alpha
  ThreeTermCoeffs dual;     // momentum form actually run
  double alpha;
};

// Throws InfeasibleError carrying the failing k.
SfgFamily sfg_family(const TSequence& ts, double alpha);
StepsizeMatrix sfg_family_H(const TSequence& ts, double alpha);

TSequence sfg_tsequence(int n);      // T_i = (i+2)(i+3)/4
ThreeTermCoeffs sfg_coeffs(int n);   // closed-form momentum coefficients, alpha = 4
StepsizeMatrix sfg_H(int n);         // H(sfg_coeffs) / 4

// T-sequence meeting every family condition with equality (t_0 = 2 - 1/alpha).
TSequence sfg_tight_tsequence(int n, double alpha);
// min ||dF(y_N^+)||^2 <= constant * L (F(y_0) - F*), constant = 2 (alpha+1)^2 / (alpha T_N).
double sfg_family_rate_constant(const TSequence& ts, double alpha);

struct GradientMappingBound {
  double bound;                  // L (alpha + 1) ||y - y+||
  std::optional<double> exact;   // min over dF(y+) of ||v||
};

GradientMappingBound gradient_mapping_bound(const CompositeOracle& F, const Vec& y, double alpha);

// Long accelerated proximal run; returns the best prox point and its value.
struct ReferenceSolution {
  Vec x;
  double F;
};
ReferenceSolution reference_minimum(const CompositeOracle& F, const Vec& x0, int iters = 20000);

}  // namespace hdual::composite

#endif
