#include <hdual/testbed.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hdual::testbed {

using nlohmann::json;

double power_iteration(const Mat& A, double tol, int max_iter) {
  if (A.rows() != A.cols() || A.rows() == 0) throw Error("power iteration needs a square matrix");
  const Eigen::Index d = A.rows();
  // Deterministic start with no special alignment to coordinate axes.
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = 1.0 + 0.1 * std::sin(1.0 + 3.0 * i);
  v.normalize();
  double lam = v.dot(A * v);
  for (int it = 0; it < max_iter; ++it) {
    Vec w = A * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    const double next = v.dot(A * v);
    if (std::abs(next - lam) <= tol * std::max(1.0, std::abs(next))) {
      lam = next;
      break;
    }
    lam = next;
  }
  return lam;
}

QuadraticOracle::QuadraticOracle(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != A_.cols() || A_.rows() != b_.size())
    throw Error("quadratic: A must be d x d and b length d");
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A_.cwiseAbs().maxCoeff()))
    throw Error("quadratic: A must be symmetric");
  L_ = power_iteration(A_);
  Eigen::LLT<Mat> llt(A_);
  if (llt.info() == Eigen::Success) {
    xstar_ = llt.solve(b_);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(A_);
    Vec x = cod.solve(b_);
    if ((A_ * x - b_).norm() > 1e-9 * std::max(1.0, b_.norm()))
      throw Error("quadratic: b is outside the range of a singular A, no minimizer");
    xstar_ = x;
  }
  fstar_ = value(*xstar_);
}

double QuadraticOracle::value(const Vec& x) const { return 0.5 * x.dot(A_ * x) - b_.dot(x); }

Vec QuadraticOracle::gradient(const Vec& x) const { return A_ * x - b_; }

LogSumExpOracle::LogSumExpOracle(Mat A, Vec b, double mu)
    : A_(std::move(A)), b_(std::move(b)), mu_(mu) {
  if (A_.rows() != b_.size() || A_.rows() == 0) throw Error("logsumexp: A rows must match b");
  if (!(mu_ > 0.0)) throw Error("logsumexp: smoothing must be positive");
  if (!A_.allFinite() || !b_.allFinite()) throw Error("logsumexp: non-finite data");
  L_ = power_iteration(A_.transpose() * A_) / mu_;
}

double LogSumExpOracle::value(const Vec& x) const {
  const Vec z = (A_ * x - b_) / mu_;
  const double m = z.maxCoeff();
  return mu_ * (m + std::log((z.array() - m).exp().sum()));
}

Vec LogSumExpOracle::gradient(const Vec& x) const {
  const Vec z = (A_ * x - b_) / mu_;
  const double m = z.maxCoeff();
  Vec p = (z.array() - m).exp().matrix();
  p /= p.sum();
  return A_.transpose() * p;
}

LeastSquaresOracle::LeastSquaresOracle(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size() || A_.rows() == 0) throw Error("least squares: A rows must match b");
  L_ = power_iteration(A_.transpose() * A_);
}

double LeastSquaresOracle::value(const Vec& x) const { return 0.5 * (A_ * x - b_).squaredNorm(); }

Vec LeastSquaresOracle::gradient(const Vec& x) const { return A_.transpose() * (A_ * x - b_); }

L1Prox::L1Prox(double lambda) : lambda_(lambda) {
  if (!(lambda_ >= 0.0)) throw Error("l1 weight must be nonnegative");
}

Vec L1Prox::prox(const Vec& v, double step) const {
  const double thr = lambda_ * step;
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out(i) = std::copysign(std::max(std::abs(v(i)) - thr, 0.0), v(i));
  return out;
}

// Coordinates with x_i != 0 have subgradient lambda*sign(x_i); at x_i = 0 the
// best choice in [-lambda, lambda] shrinks |w_i| by up to lambda.
std::optional<double> L1Prox::min_norm_shifted_subgradient(const Vec& x, const Vec& w) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = x(i) != 0.0 ? w(i) + lambda_ * (x(i) > 0 ? 1.0 : -1.0)
                                 : std::max(std::abs(w(i)) - lambda_, 0.0);
    s += r * r;
  }
  return std::sqrt(s);
}

BoxProx::BoxProx(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo_ <= hi_)) throw Error("box bounds must satisfy lo <= hi");
}

double BoxProx::value(const Vec& x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lo_ || x(i) > hi_) return std::numeric_limits<double>::infinity();
  return 0.0;
}

Vec BoxProx::prox(const Vec& v, double) const { return v.cwiseMax(lo_).cwiseMin(hi_); }

// Normal cone: at the lower face u_i <= 0, at the upper face u_i >= 0.
std::optional<double> BoxProx::min_norm_shifted_subgradient(const Vec& x, const Vec& w) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double r = w(i);
    const bool at_lo = x(i) <= lo_;
    const bool at_hi = x(i) >= hi_;
    if (at_lo && at_hi)
      r = 0.0;
    else if (at_lo)  // normal cone (-inf, 0]
      r = std::min(w(i), 0.0);
    else if (at_hi)  // normal cone [0, inf)
      r = std::max(w(i), 0.0);
    s += r * r;
  }
  return std::sqrt(s);
}

std::shared_ptr<QuadraticOracle> make_quadratic(const Mat& A, const Vec& b) {
  return std::make_shared<QuadraticOracle>(A, b);
}

std::shared_ptr<LogSumExpOracle> make_logsumexp(const Mat& A, const Vec& b, double mu) {
  return std::make_shared<LogSumExpOracle>(A, b, mu);
}

CompositeOracle make_lasso(const Mat& A, const Vec& b, double lambda) {
  CompositeOracle F;
  F.f = std::make_shared<LeastSquaresOracle>(A, b);
  F.g = std::make_shared<L1Prox>(lambda);
  return F;
}

CompositeOracle make_box_ls(const Mat& A, const Vec& b, double lo, double hi) {
  CompositeOracle F;
  F.f = std::make_shared<LeastSquaresOracle>(A, b);
  F.g = std::make_shared<BoxProx>(lo, hi);
  return F;
}

Vec random_vec(int d, Rng& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = nd(rng);
  return v;
}

Mat random_spd(int d, Rng& rng, double lo_eig, double hi_eig) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(lo_eig, hi_eig);
  Mat G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Vec lam(d);
  for (int i = 0; i < d; ++i) lam(i) = ud(rng);
  Mat A = Q * lam.asDiagonal() * Q.transpose();
  return 0.5 * (A + A.transpose());
}

std::shared_ptr<QuadraticOracle> random_quadratic(int d, Rng& rng) {
  Mat A = random_spd(d, rng);
  Vec b = random_vec(d, rng);
  return make_quadratic(A, b);
}

std::shared_ptr<LogSumExpOracle> random_logsumexp(int m, int d, Rng& rng, double mu) {
  Mat A(m, d);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = nd(rng);
  return make_logsumexp(A, random_vec(m, rng), mu);
}

CompositeOracle random_lasso(int m, int d, Rng& rng, double lambda) {
  Mat A(m, d);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = nd(rng);
  return make_lasso(A, random_vec(m, rng), lambda);
}

double finite_difference_error(const ConvexOracle& f, Rng& rng, int points, double h) {
  double worst = 0.0;
  const int d = f.dim();
  for (int p = 0; p < points; ++p) {
    Vec x = random_vec(d, rng);
    Vec g = f.gradient(x);
    Vec fd(d);
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (f.value(xp) - f.value(xm)) / (2.0 * h);
    }
    worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
  }
  return worst;
}

double max_cocoercivity_bracket(const ConvexOracle& f, Rng& rng, int pairs, double scale) {
  double worst = -std::numeric_limits<double>::infinity();
  const double L = f.lipschitz();
  for (int p = 0; p < pairs; ++p) {
    Vec x = random_vec(f.dim(), rng, scale);
    Vec y = random_vec(f.dim(), rng, scale);
    const Vec gx = f.gradient(x), gy = f.gradient(y);
    const double v =
        f.value(y) - f.value(x) + gy.dot(x - y) + (gx - gy).squaredNorm() / (2.0 * L);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

Mat mat_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw Error("fixture: empty matrix");
  Mat A(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw Error("fixture: ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) A(i, k) = rows[i][k];
  }
  return A;
}

Vec vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

CompositeOracle composite_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("fixture: malformed JSON: ") + e.what());
  }
  if (!j.contains("A") || !j.contains("b")) throw Error("fixture: needs A and b");
  const Mat A = mat_from_json(j["A"]);
  const Vec b = vec_from_json(j["b"]);
  if (A.rows() != b.size()) throw Error("fixture: A rows must match b");
  const json reg = j.value("reg", json{{"type", "none"}});
  const std::string type = reg.value("type", "none");
  CompositeOracle F;
  if (type == "l1") {
    F = make_lasso(A, b, reg.at("lambda").get<double>());
  } else if (type == "box") {
    F = make_box_ls(A, b, reg.at("lo").get<double>(), reg.at("hi").get<double>());
  } else if (type == "none") {
    F.f = std::make_shared<LeastSquaresOracle>(A, b);
    F.g = std::make_shared<ZeroProx>();
  } else {
    throw Error("fixture: unknown regularizer type '" + type + "'");
  }
  if (j.contains("Fstar") && !j["Fstar"].is_null()) F.Fstar = j["Fstar"].get<double>();
  return F;
}

std::string composite_to_json(const CompositeOracle& F) {
  const auto* ls = dynamic_cast<const LeastSquaresOracle*>(F.f.get());
  if (!ls) throw Error("fixture export supports least-squares smooth parts only");
  json j;
  std::vector<std::vector<double>> A(ls->A().rows(), std::vector<double>(ls->A().cols()));
  for (Eigen::Index i = 0; i < ls->A().rows(); ++i)
    for (Eigen::Index k = 0; k < ls->A().cols(); ++k) A[i][k] = ls->A()(i, k);
  j["A"] = A;
  j["b"] = std::vector<double>(ls->b().data(), ls->b().data() + ls->b().size());
  if (const auto* l1 = dynamic_cast<const L1Prox*>(F.g.get()))
    j["reg"] = {{"type", "l1"}, {"lambda", l1->lambda()}};
  else if (const auto* box = dynamic_cast<const BoxProx*>(F.g.get()))
    j["reg"] = {{"type", "box"}, {"lo", box->lo()}, {"hi", box->hi()}};
  else
    j["reg"] = {{"type", "none"}};
  if (F.Fstar) j["Fstar"] = *F.Fstar;
  return j.dump(1);
}

CompositeOracle load_composite_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixture " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return composite_from_json(ss.str());
}

}  // namespace hdual::testbed
