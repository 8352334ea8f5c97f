#include <doctest.h>

#include <hdual/composite.hpp>
#include <hdual/testbed.hpp>

#include "support.hpp"

#include <cmath>

using namespace hdual;
using namespace hdual::composite;
using method_lib::anti_transpose;
using method_lib::max_rel_diff;

namespace {

CompositeOracle smooth_only(std::shared_ptr<const ConvexOracle> f) {
  return {std::move(f), std::make_shared<testbed::ZeroProx>(), std::nullopt, std::nullopt};
}

TSequence random_tsequence(int n, testbed::Rng& rng) {
  std::vector<double> t;
  for (int i = 0; i <= n; ++i) t.push_back(test::uniform(rng, 0.5, 3.0));
  return TSequence::from_t(t);
}

}  // namespace

TEST_CASE("prox step without a nonsmooth part is a gradient step") {
  testbed::Rng rng(1);
  auto f = testbed::random_quadratic(6, rng);
  const auto F = smooth_only(f);
  const Vec y = testbed::random_vec(6, rng);
  for (double alpha : {1.0, 2.5}) {
    const Vec expect = y - f->gradient(y) / (alpha * f->lipschitz());
    CHECK((prox_step(F, y, alpha) - expect).norm() <= 1e-14 * expect.norm());
  }
  CHECK_THROWS_AS(prox_step(F, y, 0.0), Error);
}

TEST_CASE("l1 prox soft-thresholds at lambda / (alpha L)") {
  const double lambda = 0.4, alpha = 2.0;
  // f = 0 realized as a least-squares term with A = 0 is degenerate, so use
  // a tiny quadratic whose gradient vanishes at y = 0 shift.
  Mat A = Mat::Identity(3, 3);
  auto F = testbed::make_lasso(A, Vec::Zero(3), lambda);
  Vec y(3);
  y << 0.1, -0.9, 2.0;
  const double L = F.lipschitz();
  const Vec v = y - F.f->gradient(y) / (alpha * L);
  const double thr = lambda / (alpha * L);
  const Vec p = prox_step(F, y, alpha);
  for (int i = 0; i < 3; ++i) {
    const double expect = std::copysign(std::max(std::abs(v(i)) - thr, 0.0), v(i));
    CHECK(p(i) == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("prox optimality residuals") {
  testbed::Rng rng(2);
  auto lasso = testbed::random_lasso(30, 10, rng, 0.3);
  Mat A = Mat::Random(30, 10);
  auto box = testbed::make_box_ls(A, Vec::Random(30), -0.2, 0.3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec y = testbed::random_vec(10, rng);
    const double alpha = test::uniform(rng, 0.5, 5.0);
    worst = std::max(worst, *prox_optimality_residual(lasso, y, alpha));
    worst = std::max(worst, *prox_optimality_residual(box, y, alpha));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("composite minimizer is a prox fixed point") {
  testbed::Rng rng(3);
  auto F = testbed::random_lasso(60, 10, rng, 0.2);
  const auto ref = reference_minimum(F, Vec::Zero(10), 5000);
  CHECK((prox_step(F, ref.x, 4.0) - ref.x).norm() <= 1e-9);
  const auto gm = gradient_mapping_bound(F, ref.x, 4.0);
  CHECK(gm.bound <= 1e-8);
  CHECK(*gm.exact <= 1e-8);
}

TEST_CASE("generalized prox-grad bracket is nonpositive") {
  testbed::Rng rng(4);
  auto F = testbed::random_lasso(40, 12, rng, 0.5);
  const Vec y = testbed::random_vec(12, rng);
  const Vec yp = prox_step(F, y, 2.0);
  CHECK(prox_grad_bracket(F, y, y, 2.0) ==
        doctest::Approx(-0.5 * F.lipschitz() * (yp - y).squaredNorm()));
  double worst = -INFINITY;
  for (int k = 0; k < 1000; ++k) {
    const double alpha = test::uniform(rng, 1.0, 6.0);
    worst = std::max(worst, prox_grad_bracket(F, testbed::random_vec(12, rng),
                                              testbed::random_vec(12, rng), alpha));
  }
  CHECK(worst <= 1e-10);

  auto f = testbed::random_quadratic(5, rng);
  const auto G = smooth_only(f);
  const Vec x = testbed::random_vec(5, rng), z = testbed::random_vec(5, rng);
  const double L = f->lipschitz();
  const Vec xp = x - f->gradient(x) / L, zp = z - f->gradient(z) / L;
  const double classical =
      f->value(zp) - f->value(xp) - L * (zp - z).dot(xp - zp) - 0.5 * L * (zp - z).squaredNorm();
  CHECK(prox_grad_bracket(G, x, z, 1.0) == doctest::Approx(classical));
  CHECK(classical <= 1e-12);
}

TEST_CASE("composite runner reduces to the smooth runner") {
  testbed::Rng rng(5);
  auto f = testbed::random_quadratic(8, rng);
  const auto F = smooth_only(f);
  const Vec x0 = testbed::random_vec(8, rng);
  const auto H = method_lib::ogm_H(12);
  const auto a = run_composite(H, F, x0, 1.0);
  const auto b = method_lib::run_fsfom(H, *f, x0, f->lipschitz());
  for (int k = 0; k <= 12; ++k) CHECK((a.points[k] - b.points[k]).norm() <= 1e-12 * std::max(1.0, b.points[k].norm()));
}

TEST_CASE("GFPGM matrix and momentum forms") {
  const auto ts = method_lib::fgm_tsequence(10);
  const auto H = gfpgm_H(ts);
  for (int k = 0; k < 10; ++k)
    CHECK(H(k, k) == doctest::Approx(1.0 + (ts.t[k] - 1.0) * ts.t[k + 1] / ts.T[k + 1]));
  CHECK(max_rel_diff(H, method_lib::three_term_to_H(gfpgm_coeffs(ts))) <= 1e-12);

  const auto one = TSequence::from_t({1.0, 2.0});
  CHECK(gfpgm_H(one)(0, 0) == doctest::Approx(1.0));
  const auto two = TSequence::from_t({2.0, 3.0});
  CHECK(gfpgm_H(two)(0, 0) == doctest::Approx(1.0 + 1.0 * 3.0 / 5.0));

  testbed::Rng rng(6);
  auto F = testbed::random_lasso(40, 15, rng, 0.1);
  const Vec x0 = testbed::random_vec(15, rng);
  const auto a = run_composite(H, F, x0, 1.0);
  const auto b = run_composite_three_term(gfpgm_coeffs(ts), F, x0, 1.0);
  for (int k = 0; k <= 10; ++k)
    CHECK((a.points[k] - b.points[k]).norm() <= 1e-9 * std::max(1.0, a.points[k].norm()));
}

TEST_CASE("GFPGM rejects infeasible sequences") {
  const auto ts = sfg_tsequence(5);  // T_0 = t_0 = 3/2, then T_i > t_i^2
  CHECK(gfpgm_violation(ts) == 1);
  try {
    gfpgm_H(ts);
    FAIL("expected rejection");
  } catch (const InfeasibleError& e) {
    CHECK(e.index == 1);
  }
}

TEST_CASE("GFPGM function-value rate with the L factor") {
  testbed::Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto F = testbed::random_lasso(80, 30, rng, 0.1);
    const Vec x0 = testbed::random_vec(30, rng);
    const auto ref = reference_minimum(F, x0, 20000);
    const int N = 50;
    const auto ts = method_lib::fgm_tsequence(N);
    const auto tr = run_composite(gfpgm_H(ts), F, x0, 1.0);
    const double gap = tr.prox_values[N] - ref.F;
    CHECK(gap <= F.lipschitz() * (x0 - ref.x).squaredNorm() / (2.0 * ts.T[N]) + 1e-10);
  }
}

TEST_CASE("correction matrix") {
  const auto ts = sfg_tsequence(12);
  const auto C = build_C(ts);
  CHECK(C.entries(0, 0) == doctest::Approx(ts.t[1] / ts.T[1]));
  CHECK(C.entries(0, 0) == doctest::Approx(0.5));
  for (int k = 1; k < 12; ++k) CHECK(C.entries(k, k) == doctest::Approx(2.0 * (4 * k + 5) / (3.0 * (k + 4))));
  for (int k = 1; k < 12; ++k)
    for (int i = 0; i < k; ++i)
      CHECK(C.entries(k, i) == doctest::Approx((k + 1.0) / (k + 4.0) * C.entries(k - 1, i)));
  for (int k = 0; k < 12; ++k)
    for (int i = k + 1; i < 12; ++i) CHECK(C.entries(k, i) == 0.0);
}

TEST_CASE("correction matrix identity") {
  testbed::Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 12;
    const auto ts = random_tsequence(n, rng);
    const auto sides = claim_sides(ts);
    CHECK(sides.residual() <= 1e-10 * std::max(1.0, sides.rhs.cwiseAbs().maxCoeff()));
  }
  // Dropping the t_i^2 / T_0 diagonal term breaks the identity.
  const auto literal = claim_sides(sfg_tsequence(6), false);
  CHECK(literal.residual() > 1e-3);
}

TEST_CASE("family condition") {
  for (int n = 1; n <= 100; ++n) CHECK(sfg_condition_violation(sfg_tsequence(n), 4.0) == -1);
  CHECK(sfg_condition_violation(sfg_tsequence(10), 2.0) == 2);
  try {
    sfg_family(sfg_tsequence(10), 2.0);
    FAIL("expected rejection");
  } catch (const InfeasibleError& e) {
    CHECK(e.index == 2);
  }
  // Bisect the smallest feasible alpha for the quadratic T.
  double lo = 1.0, hi = 4.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sfg_condition_violation(sfg_tsequence(10), mid) == -1 ? hi : lo) = mid;
  }
  CHECK(hi > 2.0);
  CHECK(hi <= 4.0);
  CHECK(sfg_condition_violation(sfg_tsequence(10), 0.99 * hi) >= 0);
}

TEST_CASE("SFG closed form is the alpha = 4 family member") {
  const auto c = sfg_coeffs(7);
  CHECK(c.beta.back() == doctest::Approx(0.3));
  CHECK(c.gamma.back() == doctest::Approx(0.075));
  for (int n = 2; n <= 30; ++n) CHECK(max_rel_diff(sfg_H(n), sfg_family_H(sfg_tsequence(n), 4.0)) <= 1e-10);
  const auto fam = sfg_family(sfg_tsequence(9), 4.0);
  const auto closed = sfg_coeffs(9);
  // The first step only fixes beta + gamma; the split depends on the auxiliary pair.
  CHECK(fam.dual.beta[0] + fam.dual.gamma[0] ==
        doctest::Approx(closed.beta[0] + closed.gamma[0]).epsilon(1e-12));
  for (int k = 1; k < 9; ++k) {
    CHECK(fam.dual.beta[k] == doctest::Approx(closed.beta[k]).epsilon(1e-12));
    CHECK(fam.dual.gamma[k] == doctest::Approx(closed.gamma[k]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sfg_coeffs(0), Error);
  const Mat one = sfg_H(1).dense() - sfg_family_H(sfg_tsequence(1), 4.0).dense();
  CHECK(one.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("SFG runs: matrix and momentum forms, rate, family guarantee") {
  testbed::Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    auto F = testbed::random_lasso(100, 50, rng, 0.1);
    const Vec y0 = testbed::random_vec(50, rng);
    const auto ref = reference_minimum(F, y0, 20000);
    const int N = 40;
    const auto a = run_composite_three_term(sfg_coeffs(N), F, y0, 4.0);
    const auto b = run_composite(sfg_H(N), F, y0, 4.0);
    for (int k = 0; k <= N; ++k)
      CHECK((a.points[k] - b.points[k]).norm() <= 1e-9 * std::max(1.0, b.points[k].norm()));

    const double L = F.lipschitz();
    const double gap0 = F.value(y0) - ref.F;
    const auto gm = gradient_mapping_bound(F, a.points[N], 4.0);
    CHECK(*gm.exact <= gm.bound * (1 + 1e-12));
    CHECK((*gm.exact) * (*gm.exact) <= 50.0 * L * gap0 / ((N + 2.0) * (N + 3.0)));
    const double surrogate = 2.0 * L * (a.points[N] - a.prox_points[N]).squaredNorm();
    CHECK(surrogate <= gap0 / sfg_tsequence(N).T[N] * (1 + 1e-9));
  }
}

TEST_CASE("gradient mapping bound with a smooth objective") {
  testbed::Rng rng(10);
  auto f = testbed::random_quadratic(6, rng);
  const auto F = smooth_only(f);
  for (int k = 0; k < 20; ++k) {
    const Vec y = testbed::random_vec(6, rng);
    const auto b = gradient_mapping_bound(F, y, 4.0);
    const Vec yp = prox_step(F, y, 4.0);
    CHECK(*b.exact == doctest::Approx(f->gradient(yp).norm()));
    CHECK(*b.exact <= b.bound);
    CHECK(b.bound == doctest::Approx(5.0 * f->lipschitz() * (y - yp).norm()));
  }
  const auto at_min = gradient_mapping_bound(F, *f->minimizer(), 4.0);
  CHECK(at_min.bound <= 1e-10);
  CHECK(*at_min.exact <= 1e-10);
}

TEST_CASE("tight family sequence meets every condition with equality") {
  for (double alpha : {2.0, 3.8, 4.0}) {
    const auto ts = sfg_tight_tsequence(40, alpha);
    CHECK(sfg_condition_violation(ts, alpha, 1e-9) == -1);
    // With equality throughout, any smaller alpha fails.
    CHECK(sfg_condition_violation(ts, alpha * (1.0 - 1e-6), 1e-12) >= 0);
    CHECK(ts.t[0] == doctest::Approx(2.0 - 1.0 / alpha));
  }
  // SFG's quadratic sequence gives the constant 50 / ((N+2)(N+3)).
  const auto q = sfg_tsequence(30);
  CHECK(sfg_family_rate_constant(q, 4.0) == doctest::Approx(50.0 / (32.0 * 33.0)));
  // The tight sequence is at least as fast as the quadratic one at alpha = 4.
  CHECK(sfg_family_rate_constant(sfg_tight_tsequence(30, 4.0), 4.0) <=
        sfg_family_rate_constant(q, 4.0));
  CHECK_THROWS_AS(sfg_tight_tsequence(5, 0.4), Error);
}

TEST_CASE("tight family member satisfies its guarantee on lasso") {
  testbed::Rng rng(12);
  const double alpha = 3.8;
  const int N = 30;
  const auto fam = sfg_family(sfg_tight_tsequence(N, alpha), alpha);
  for (int trial = 0; trial < 3; ++trial) {
    auto F = testbed::random_lasso(60, 30, rng, 0.1);
    const Vec y0 = testbed::random_vec(30, rng);
    const auto ref = reference_minimum(F, y0, 20000);
    const auto tr = run_composite_three_term(fam.dual, F, y0, alpha);
    const auto gm = gradient_mapping_bound(F, tr.points[N], alpha);
    const double gap0 = F.value(y0) - ref.F;
    CHECK((*gm.exact) * (*gm.exact) <=
          sfg_family_rate_constant(sfg_tight_tsequence(N, alpha), alpha) * F.lipschitz() * gap0 + 1e-12);
  }
}
