// Acceptance run: one line per criterion with verdict, runtime and the worst
// observed quantity. Exit status is nonzero if any criterion fails.
#include "support.hpp"

#include <hdual/certify.hpp>
#include <hdual/composite.hpp>
#include <hdual/continuous.hpp>
#include <hdual/method_lib.hpp>
#include <hdual/testbed.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hdual;
using namespace hdual::method_lib;
using certify::WeightSequence;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects pass/fail plus the worst value seen for a named quantity.
class Tally {
 public:
  void check(bool ok) {
    ++cases_;
    if (!ok) ++failures_;
  }
  // Records value <= limit.
  void at_most(double value, double limit) {
    check(value <= limit && std::isfinite(value));
    worst_ = std::max(worst_, limit > 0.0 ? value / limit : value);
  }
  int cases() const { return cases_; }
  int failures() const { return failures_; }
  double worst_ratio() const { return worst_; }

 private:
  int cases_ = 0;
  int failures_ = 0;
  double worst_ = -1e300;
};

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_increase_rel(const std::vector<double>& e) {
  const double scale = std::max(std::abs(e.front()), 1e-300);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) worst = std::max(worst, (e[k + 1] - e[k]) / scale);
  return worst;
}

std::string summary(const Tally& t, const std::string& what) {
  std::ostringstream os;
  os << t.cases() << " checks, " << t.failures() << " violations, worst " << what << " "
     << t.worst_ratio();
  return os.str();
}

Outcome finish(const Tally& t, const std::string& what) {
  return {t.failures() == 0, summary(t, what)};
}

// ---------------------------------------------------------------------------

Outcome anti_transpose_dualities() {
  Tally t;
  for (int n = 1; n <= 50; ++n) {
    t.at_most(max_rel_diff(anti_transpose(ogm_H(n)), ogmg_H(n)), 1e-12);
    t.at_most(max_rel_diff(anti_transpose(obl_f_H(n)), obl_g_H(n)), 1e-12);
    for (double h : {0.5, 1.0, 1.5}) {
      const auto G = gd_H(n, h);
      t.check(anti_transpose(G).dense() == G.dense());
    }
  }
  return finish(t, "error/tolerance");
}

Outcome structured_certificates() {
  Tally t;
  for (int n = 1; n <= 30; ++n) {
    const auto u = certify::ogm_weights(n);
    t.at_most(max_abs(certify::build_S(ogm_H(n), u).entries), 1e-9);
    t.at_most(max_abs(certify::build_T(ogmg_H(n), certify::reciprocal_reversed(u)).entries), 1e-9);

    const auto w = certify::obl_weights(n);
    Mat expect = Mat::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) expect(i, i) = (w.at(i) - w.at(i - 1)) / 2.0;
    t.at_most(max_abs(certify::build_S(obl_f_H(n), w).entries - expect), 1e-9);
  }
  return finish(t, "entry/tolerance");
}

Outcome congruence_identity() {
  Tally t;
  testbed::Rng rng(301);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 15;
    const auto H = test::random_H(n, rng);
    const auto u = test::random_weights(n, rng);
    const auto rep = certify::verify_congruence(H, u, 1e-9);
    t.at_most(rep.max_abs_residual, 1e-9 * rep.scale);
    t.check(rep.pass);
  }
  return finish(t, "residual/tolerance");
}

Outcome trace_form_oracle() {
  Tally t;
  testbed::Rng rng(401);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    const auto in = test::random_raw_inputs(n, 5, rng);
    const auto H = test::random_H(n, rng);
    const auto u = test::random_weights(n, rng);
    const double raw_s = test::raw_U_slack(H, u, in);
    const double qf_s = certify::quadratic_form(certify::build_S(H, u), in.g, in.L);
    t.at_most(std::abs(raw_s - qf_s), 1e-8 * std::max(1.0, std::abs(raw_s)));

    const auto HA = test::random_H(n, rng);
    const auto v = test::random_weights(n, rng);
    const double raw_t = test::raw_V_slack(HA, v, in);
    const double qf_t = certify::quadratic_form(certify::build_T(HA, v), in.g, in.L);
    t.at_most(std::abs(raw_t - qf_t), 1e-8 * std::max(1.0, std::abs(raw_t)));
  }
  return finish(t, "error/tolerance");
}

// Shared by the rate and dissipativity criteria.
struct CatalogSweep {
  Tally rates;
  Tally energy;
};

CatalogSweep run_catalog(int instances, int d, int n) {
  constexpr double kSlack = 1e-8;
  CatalogSweep s;
  testbed::Rng rng(501);
  const double th = theta_sequence(n).values[n];
  const std::vector<TSequence> families = {fgm_tsequence(n), obl_tsequence(n)};

  for (int i = 0; i < instances; ++i) {
    const auto f = testbed::random_quadratic(d, rng);
    const Vec x0 = testbed::random_vec(d, rng);
    const double L = f->lipschitz();
    const Vec xs = *f->minimizer();
    const double fs = *f->fstar();
    const double LR2 = L * (x0 - xs).squaredNorm();
    const double gap0 = f->value(x0) - fs;

    auto primal = [&](const StepsizeMatrix& H, const WeightSequence& u, double coeff) {
      const auto tr = run_fsfom(H, *f, x0, L);
      s.rates.at_most(tr.fvals[n] - fs, coeff * LR2 / 2.0 + kSlack);
      s.energy.at_most(max_increase_rel(certify::energy_U(tr, u, xs, fs)), 1e-9);
      return tr;
    };
    auto dual = [&](const StepsizeMatrix& HA, const WeightSequence& v) {
      const auto tr = run_fsfom(HA, *f, x0, L);
      s.rates.at_most(tr.grads[n].squaredNorm() / (2.0 * L), v.at(0) * gap0 + kSlack);
      s.energy.at_most(max_increase_rel(certify::energy_V(tr, v, fs)), 1e-9);
    };

    primal(ogm_H(n), certify::ogm_weights(n), 1.0 / (th * th));
    for (const auto& ts : families) {
      const auto u = certify::gogm_weights(ts);
      primal(gogm_H(ts), u, 1.0 / ts.T.back());
      dual(gogm_dual_H(ts), certify::reciprocal_reversed(u));
    }
    for (double h : {0.5, 1.0}) {
      const auto tr = primal(gd_H(n, h), certify::gd_weights(n, h), 1.0 / (2.0 * n * h + 1.0));
      const auto cb = certify::gd_gradient_corollary_bound(n, h);
      s.rates.at_most(tr.grads[n].squaredNorm() / (2.0 * L), cb.evaluate(gap0, LR2) + kSlack);
    }
    dual(ogmg_H(n), certify::reciprocal_reversed(certify::ogm_weights(n)));
    dual(obl_g_H(n), certify::reciprocal_reversed(certify::obl_weights(n)));
  }
  return s;
}

Outcome rate_reproduction(CatalogSweep& sweep) {
  sweep = run_catalog(30, 10, 25);
  return finish(sweep.rates, "measured/bound");
}

Outcome dissipativity(const CatalogSweep& sweep) {
  return finish(sweep.energy, "increase/tolerance");
}

Outcome sfg() {
  Tally t;
  for (int n = 1; n <= 30; ++n) {
    const auto a = composite::sfg_H(n), b = composite::sfg_family_H(composite::sfg_tsequence(n), 4.0);
    t.at_most(max_abs(a.dense() - b.dense()), 1e-10);
  }

  constexpr int kN = 100, kD = 50;
  testbed::Rng rng(601);
  const auto H = composite::sfg_H(kN);
  const double bound_coeff = 50.0 / ((kN + 2.0) * (kN + 3.0));
  for (int i = 0; i < 10; ++i) {
    const auto F = testbed::random_lasso(2 * kD, kD, rng, 0.1);
    const Vec y0 = testbed::random_vec(kD, rng);
    const double Fstar = composite::reference_minimum(F, y0).F;
    const auto tr = composite::run_composite(H, F, y0, 4.0);
    const auto gm = composite::gradient_mapping_bound(F, tr.points[kN], 4.0);
    if (!gm.exact) {
      t.check(false);
      continue;
    }
    const double measured = *gm.exact * *gm.exact;
    t.at_most(measured, bound_coeff * F.lipschitz() * (F.value(y0) - Fstar));
  }

  for (int n = 1; n <= 12; ++n) {
    const auto sides = composite::claim_sides(composite::sfg_tsequence(n));
    t.at_most(sides.residual(), 1e-10);
  }
  return finish(t, "value/limit");
}

Outcome continuous_time() {
  Tally t;
  for (unsigned seed : {701u, 702u, 703u}) {
    testbed::Rng rng(seed);
    const auto f = testbed::random_quadratic(8, rng);
    const Vec x0 = testbed::random_vec(8, rng);
    for (double p : {2.0, 3.0}) {
      for (double C : {0.5, 1.0}) {
        const continuous::PFamily pf{p, C, 10.0};
        const auto prim = continuous::analyze_primal(pf, *f, x0, *f->minimizer(), *f->fstar());
        t.at_most(prim.rate.measured, prim.rate.bound * 1.05);
        t.at_most(prim.energy.max_increase_rel, 1e-6);
        const auto dual = continuous::analyze_dual(pf, *f, x0, *f->fstar());
        t.at_most(dual.rate.measured, dual.rate.bound * 1.05);
        t.at_most(dual.energy.max_increase_rel, 1e-6);
      }
    }
  }
  return finish(t, "value/limit");
}

Outcome property_suite() {
  Tally t;
  testbed::Rng rng(901);

  for (int trial = 0; trial < 300; ++trial) {
    const auto H = test::random_H(1 + trial % 20, rng);
    t.check(anti_transpose(anti_transpose(H)).dense() == H.dense());
  }

  auto random_coeffs = [&](int n) {
    ThreeTermCoeffs c;
    for (int k = 0; k < n; ++k) {
      c.beta.push_back(test::uniform(rng, 0.05, 1.0));
      c.gamma.push_back(test::uniform(rng, -0.5, 1.0));
    }
    return c;
  };

  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + trial % 12;
    const auto f = testbed::random_quadratic(6, rng);
    const Vec x0 = testbed::random_vec(6, rng);
    const auto c = random_coeffs(n);
    const auto a = run_three_term(c, *f, x0, f->lipschitz());
    const auto b = run_fsfom(three_term_to_H(c), *f, x0, f->lipschitz());
    double worst = 0.0;
    for (int k = 0; k <= n; ++k)
      worst = std::max(worst, (a.points[k] - b.points[k]).norm() / std::max(1.0, b.points[k].norm()));
    t.at_most(worst, 1e-9);
  }

  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_coeffs(1 + trial % 15);
    t.at_most(max_rel_diff(three_term_to_H(dual_three_term(c)), anti_transpose(three_term_to_H(c))),
              1e-10);
  }

  const auto lasso = testbed::random_lasso(30, 10, rng, 0.3);
  const auto box = testbed::make_box_ls(Mat::Random(30, 10), Vec::Random(30), -0.2, 0.3);
  for (int trial = 0; trial < 300; ++trial) {
    const Vec y = testbed::random_vec(10, rng, 3.0);
    const double alpha = test::uniform(rng, 0.5, 5.0);
    for (const auto* F : {&lasso, &box}) {
      const auto r = composite::prox_optimality_residual(*F, y, alpha);
      t.check(r.has_value());
      if (r) t.at_most(*r, 1e-10);
    }
  }

  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + trial % 6;
    std::shared_ptr<const ConvexOracle> f;
    switch (trial % 3) {
      case 0: f = testbed::random_quadratic(d, rng); break;
      case 1: f = testbed::random_logsumexp(3 * d, d, rng); break;
      default: f = testbed::random_lasso(2 * d, d, rng).f; break;
    }
    t.at_most(testbed::finite_difference_error(*f, rng, 20), 1e-6);
  }

  Outcome o = finish(t, "value/limit");
  if (t.cases() < 1000) {
    o.pass = false;
    o.detail += " (fewer than 1000 cases)";
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 when unbounded
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  CatalogSweep sweep;
  const std::vector<Criterion> criteria = {
      {1, "anti-transpose dualities", 1.0, anti_transpose_dualities},
      {2, "zero and structured certificates", 0.0, structured_certificates},
      {3, "congruence identity", 5.0, congruence_identity},
      {4, "trace-form oracle", 0.0, trace_form_oracle},
      {5, "rate reproduction", 10.0, [&] { return rate_reproduction(sweep); }},
      {6, "super FISTA-G", 30.0, sfg},
      {7, "continuous time", 30.0, continuous_time},
      {8, "dissipativity sweeps", 0.0, [&] { return dissipativity(sweep); }},
      {9, "property suite", 0.0, property_suite},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += " (over time limit)";
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d %-34s %s  %8.3f s", c.id, c.name, o.pass ? "PASS" : "FAIL", secs);
    if (c.time_limit > 0.0) std::printf(" (limit %.0f s)", c.time_limit);
    std::printf("  %s\n", o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
