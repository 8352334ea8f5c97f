#include "support.hpp"

#include <random>

namespace hdual::test {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

StepsizeMatrix random_H(int n, Rng& rng) {
  Mat m = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i <= k; ++i) m(k, i) = uniform(rng, -1.0, 1.0) + (i == k ? 1.0 : 0.0);
  return StepsizeMatrix(m);
}

certify::WeightSequence random_weights(int n, Rng& rng) {
  certify::WeightSequence u;
  double acc = uniform(rng, 0.5, 1.5);
  for (int i = 0; i <= n; ++i) {
    u.values.push_back(acc);
    acc += uniform(rng, 0.0, 2.0);
  }
  return u;
}

std::vector<Vec> random_bundle(int n, int d, Rng& rng) {
  std::vector<Vec> g;
  for (int i = 0; i <= n; ++i) g.push_back(testbed::random_vec(d, rng));
  return g;
}

namespace {

std::vector<Vec> iterates(const StepsizeMatrix& H, const RawInputs& in) {
  std::vector<Vec> x{in.x0};
  for (int k = 0; k < H.n(); ++k) {
    Vec step = Vec::Zero(in.x0.size());
    for (int i = 0; i <= k; ++i) step += H(k, i) * in.g[i];
    x.push_back(x[k] - step / in.L);
  }
  return x;
}

// [[a, b]] = f(b) - f(a) + <g_b, a - b> + |g_a - g_b|^2 / (2L) on index pairs.
double coco(const std::vector<Vec>& x, const RawInputs& in, int a, int b) {
  return in.fvals[b] - in.fvals[a] + in.g[b].dot(x[a] - x[b]) +
         (in.g[a] - in.g[b]).squaredNorm() / (2.0 * in.L);
}

}  // namespace

double raw_U_slack(const StepsizeMatrix& H, const certify::WeightSequence& u, const RawInputs& in) {
  const int N = H.n();
  const auto x = iterates(H, in);
  const double L = in.L;
  double U = 0.5 * L * (in.x0 - in.xstar).squaredNorm();
  for (int i = 0; i < N; ++i) U += u.at(i) * coco(x, in, i, i + 1);
  Vec z = Vec::Zero(in.x0.size());
  for (int i = 0; i <= N; ++i) {
    const double du = u.at(i) - u.at(i - 1);
    // [[x*, x_i]] with grad f(x*) = 0
    const double star = in.fvals[i] - in.fstar + in.g[i].dot(in.xstar - x[i]) +
                        in.g[i].squaredNorm() / (2.0 * L);
    U += du * star;
    z += du * in.g[i];
  }
  return U - u.at(N) * (in.fvals[N] - in.fstar) - 0.5 * L * (in.xstar - in.x0 + z / L).squaredNorm();
}

double raw_V_slack(const StepsizeMatrix& HA, const certify::WeightSequence& v, const RawInputs& in) {
  const int N = HA.n();
  const auto y = iterates(HA, in);
  const double L = in.L;
  const double star_N = in.fstar - in.fvals[N] + in.g[N].squaredNorm() / (2.0 * L);
  double V = v.at(0) * (in.fvals[0] - in.fstar + star_N);
  for (int i = 0; i < N; ++i) {
    V += v.at(i + 1) * coco(y, in, i, i + 1);
    V += (v.at(i + 1) - v.at(i)) * coco(y, in, N, i);
  }
  return V - in.g[N].squaredNorm() / (2.0 * L);
}

RawInputs random_raw_inputs(int n, int d, Rng& rng) {
  RawInputs in;
  in.g = random_bundle(n, d, rng);
  for (int i = 0; i <= n; ++i) in.fvals.push_back(uniform(rng, -5.0, 5.0));
  in.x0 = testbed::random_vec(d, rng);
  in.xstar = testbed::random_vec(d, rng);
  in.fstar = uniform(rng, -10.0, -5.0);
  in.L = uniform(rng, 0.5, 4.0);
  return in;
}

}  // namespace hdual::test
