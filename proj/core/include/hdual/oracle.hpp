#ifndef HDUAL_ORACLE_HPP
#define HDUAL_ORACLE_HPP

#include <hdual/types.hpp>

#include <memory>
#include <optional>

namespace hdual {

// L-smooth convex function with a certified smoothness constant.
class ConvexOracle {
 public:
  virtual ~ConvexOracle() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual double lipschitz() const = 0;
  virtual std::optional<Vec> minimizer() const { return std::nullopt; }
  virtual std::optional<double> fstar() const { return std::nullopt; }
};

// Closed proper convex g, reached only through its prox map.
class ProxFunction {
 public:
  virtual ~ProxFunction() = default;
  virtual double value(const Vec& x) const = 0;
  // argmin_z g(z) + ||z - v||^2 / (2 step)
  virtual Vec prox(const Vec& v, double step) const = 0;
  // min over u in dg(x) of ||w + u||. Empty if g has no computable subdifferential.
  virtual std::optional<double> min_norm_shifted_subgradient(const Vec& x,
                                                             const Vec& w) const {
    (void)x;
    (void)w;
    return std::nullopt;
  }
  virtual std::string name() const = 0;
};

// F = f + g.
struct CompositeOracle {
  std::shared_ptr<const ConvexOracle> f;
  std::shared_ptr<const ProxFunction> g;
  std::optional<double> Fstar;
  std::optional<Vec> xstar;

  double value(const Vec& x) const { return f->value(x) + g->value(x); }
  double lipschitz() const { return f->lipschitz(); }
  int dim() const { return f->dim(); }
};

}  // namespace hdual

#endif
