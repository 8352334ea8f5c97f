#ifndef HDUAL_TEST_SUPPORT_HPP
#define HDUAL_TEST_SUPPORT_HPP

#include <hdual/certify.hpp>
#include <hdual/method_lib.hpp>
#include <hdual/testbed.hpp>

#include <vector>

namespace hdual::test {

using method_lib::StepsizeMatrix;
using testbed::Rng;

// Entries uniform in [-1, 1], diagonal shifted by +1.
StepsizeMatrix random_H(int n, Rng& rng);
// Positive nondecreasing, u_0 in [0.5, 1.5], increments in [0, 2].
certify::WeightSequence random_weights(int n, Rng& rng);
std::vector<Vec> random_bundle(int n, int d, Rng& rng);
double uniform(Rng& rng, double lo, double hi);

// Energy slacks evaluated straight from the bracket definitions, with the
// iterates produced by the update rule and arbitrary function values. None of
// the certificate-matrix code is used.
struct RawInputs {
  std::vector<Vec> g;  // gradients at x_0..x_N
  std::vector<double> fvals;
  Vec x0;
  Vec xstar;
  double fstar = 0.0;
  double L = 1.0;
};

// U_N - u_N (f_N - f*) - (L/2)|x* - x_0 + (1/L) sum (u_i - u_{i-1}) g_i|^2
double raw_U_slack(const StepsizeMatrix& H, const certify::WeightSequence& u, const RawInputs& in);
// V_N - |g_N|^2 / (2L)
double raw_V_slack(const StepsizeMatrix& HA, const certify::WeightSequence& v, const RawInputs& in);

RawInputs random_raw_inputs(int n, int d, Rng& rng);

}  // namespace hdual::test

#endif
