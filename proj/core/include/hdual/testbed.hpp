#ifndef HDUAL_TESTBED_HPP
#define HDUAL_TESTBED_HPP

#include <hdual/oracle.hpp>

#include <cstdint>
#include <memory>
#include <random>
#include <string>

namespace hdual::testbed {

using Rng = std::mt19937_64;

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(const Mat& A, double tol = 1e-12, int max_iter = 200000);

// f(x) = 1/2 x'Ax - b'x
class QuadraticOracle final : public ConvexOracle {
 public:
  QuadraticOracle(Mat A, Vec b);
  int dim() const override { return static_cast<int>(b_.size()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  double lipschitz() const override { return L_; }
  std::optional<Vec> minimizer() const override { return xstar_; }
  std::optional<double> fstar() const override { return fstar_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  Mat A_;
  Vec b_;
  double L_;
  std::optional<Vec> xstar_;
  std::optional<double> fstar_;
};

// f(x) = mu log sum_i exp((a_i'x - b_i) / mu), L = ||A||_2^2 / mu.
class LogSumExpOracle final : public ConvexOracle {
 public:
  LogSumExpOracle(Mat A, Vec b, double mu);
  int dim() const override { return static_cast<int>(A_.cols()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  double lipschitz() const override { return L_; }

 private:
  Mat A_;
  Vec b_;
  double mu_;
  double L_;
};

// f(x) = 1/2 ||Ax - b||^2, L = ||A||_2^2.
class LeastSquaresOracle final : public ConvexOracle {
 public:
  LeastSquaresOracle(Mat A, Vec b);
  int dim() const override { return static_cast<int>(A_.cols()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  double lipschitz() const override { return L_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  Mat A_;
  Vec b_;
  double L_;
};

class ZeroProx final : public ProxFunction {
 public:
  double value(const Vec&) const override { return 0.0; }
  Vec prox(const Vec& v, double) const override { return v; }
  std::optional<double> min_norm_shifted_subgradient(const Vec&, const Vec& w) const override {
    return w.norm();
  }
  std::string name() const override { return "none"; }
};

// lambda ||x||_1
class L1Prox final : public ProxFunction {
 public:
  explicit L1Prox(double lambda);
  double value(const Vec& x) const override { return lambda_ * x.lpNorm<1>(); }
  Vec prox(const Vec& v, double step) const override;
  std::optional<double> min_norm_shifted_subgradient(const Vec& x, const Vec& w) const override;
  std::string name() const override { return "l1"; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

// Indicator of [lo, hi]^d. value() is 0 inside and +inf outside.
class BoxProx final : public ProxFunction {
 public:
  BoxProx(double lo, double hi);
  double value(const Vec& x) const override;
  Vec prox(const Vec& v, double step) const override;
  std::optional<double> min_norm_shifted_subgradient(const Vec& x, const Vec& w) const override;
  std::string name() const override { return "box"; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

std::shared_ptr<QuadraticOracle> make_quadratic(const Mat& A, const Vec& b);
std::shared_ptr<LogSumExpOracle> make_logsumexp(const Mat& A, const Vec& b, double mu);
CompositeOracle make_lasso(const Mat& A, const Vec& b, double lambda);
CompositeOracle make_box_ls(const Mat& A, const Vec& b, double lo, double hi);

// Generators. Every call is a pure function of the RNG state.
Mat random_spd(int d, Rng& rng, double lo_eig = 0.01, double hi_eig = 10.0);
std::shared_ptr<QuadraticOracle> random_quadratic(int d, Rng& rng);
std::shared_ptr<LogSumExpOracle> random_logsumexp(int m, int d, Rng& rng, double mu = 1.0);
CompositeOracle random_lasso(int m, int d, Rng& rng, double lambda = 0.1);
Vec random_vec(int d, Rng& rng, double scale = 1.0);

// Largest relative error between the gradient and central differences,
// sampled at `points` random points.
double finite_difference_error(const ConvexOracle& f, Rng& rng, int points = 100,
                               double h = 1e-6);
// Largest cocoercivity bracket value over `pairs` random pairs (should be <= 0).
double max_cocoercivity_bracket(const ConvexOracle& f, Rng& rng, int pairs = 1000,
                                double scale = 1.0);

// Fixture JSON: {"A": [[...]], "b": [...], "reg": {"type": "l1"|"box"|"none", ...},
// "Fstar": optional}
CompositeOracle composite_from_json(const std::string& text);
std::string composite_to_json(const CompositeOracle& F);
CompositeOracle load_composite_fixture(const std::string& path);

}  // namespace hdual::testbed

#endif
