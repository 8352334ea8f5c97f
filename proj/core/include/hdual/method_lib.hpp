#ifndef HDUAL_METHOD_LIB_HPP
#define HDUAL_METHOD_LIB_HPP

#include <hdual/oracle.hpp>
#include <hdual/types.hpp>

#include <vector>

namespace hdual::method_lib {

// Lower-triangular N x N stepsize matrix. Row k, column i (0-based) holds
// h_{k+1,i}: the weight of grad f(x_i) in the step producing x_{k+1}.
class StepsizeMatrix {
 public:
  explicit StepsizeMatrix(Mat entries);
  static StepsizeMatrix zeros(int n);
  static StepsizeMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int n() const { return static_cast<int>(m_.rows()); }
  double operator()(int k, int i) const { return m_(k, i); }
  const Mat& dense() const { return m_; }
  std::vector<std::vector<double>> rows() const;

 private:
  Mat m_;
};

StepsizeMatrix anti_transpose(const StepsizeMatrix& H);

// Largest |a - b| / max(1, |b|) over entries; sizes must agree.
double max_rel_diff(const StepsizeMatrix& a, const StepsizeMatrix& b);

struct ThetaSequence {
  std::vector<double> values;  // theta_0 .. theta_N
  int n() const { return static_cast<int>(values.size()) - 1; }
};

ThetaSequence theta_sequence(int n);

StepsizeMatrix ogm_H(int n);
StepsizeMatrix ogmg_H(int n);
StepsizeMatrix obl_f_H(int n);
StepsizeMatrix obl_g_H(int n);
StepsizeMatrix gd_H(int n, double h);

// t_0..t_N with running sums T_i.
struct TSequence {
  std::vector<double> t;
  std::vector<double> T;

  static TSequence from_t(std::vector<double> t);
  static TSequence from_T(std::vector<double> T);
  int n() const { return static_cast<int>(t.size()) - 1; }
  // First index violating t_i^2 <= 2 T_i (i < N), t_N^2 <= T_N; -1 if feasible.
  int gogm_violation(double rel_tol = 1e-12) const;
};

// Parameter choices under which the GOGM family reduces to known methods.
TSequence fgm_tsequence(int n);  // T_i = t_i^2
TSequence ogm_tsequence(int n);  // t_i^2 = 2 T_i, t_N^2 = T_N
TSequence obl_tsequence(int n);  // t_i = i + 1, t_N = sqrt(N(N+1)/2)

// x_{k+1} = x_k^+ + beta_k (x_k^+ - x_{k-1}^+) + gamma_k (x_k^+ - x_k), x_{-1}^+ = x_0.
struct ThreeTermCoeffs {
  std::vector<double> beta;
  std::vector<double> gamma;
  int n() const { return static_cast<int>(beta.size()); }
};

StepsizeMatrix three_term_to_H(const ThreeTermCoeffs& c);

// Coefficients of the method whose matrix is the anti-transpose. The pair
// (aux_beta, aux_gamma) stands in for the undefined (beta_N, gamma_N); the
// result's matrix does not depend on it.
ThreeTermCoeffs dual_three_term(const ThreeTermCoeffs& c, double aux_beta = 1.0,
                                double aux_gamma = 0.0);

ThreeTermCoeffs gogm_coeffs(const TSequence& ts);
// Closed-form dual coefficients. Requires t_i != 1 for 1 <= i <= N.
ThreeTermCoeffs gogm_dual_coeffs(const TSequence& ts);
StepsizeMatrix gogm_H(const TSequence& ts);
StepsizeMatrix gogm_dual_H(const TSequence& ts);

struct Trajectory {
  std::vector<Vec> points;
  std::vector<Vec> grads;
  std::vector<double> fvals;
  double lipschitz = 1.0;
  int n() const { return static_cast<int>(points.size()) - 1; }
};

// x_{k+1} = x_k - (1/L) sum_{i<=k} h_{k+1,i} grad f(x_i).
Trajectory run_fsfom(const StepsizeMatrix& H, const ConvexOracle& f, const Vec& x0, double L);

// Same method family driven by the momentum recursion directly.
Trajectory run_three_term(const ThreeTermCoeffs& c, const ConvexOracle& f, const Vec& x0,
                          double L);

}  // namespace hdual::method_lib

#endif
