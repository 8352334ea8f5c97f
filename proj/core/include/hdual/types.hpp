#ifndef HDUAL_TYPES_HPP
#define HDUAL_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hdual {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run produced a non-finite iterate. `index` is the first bad iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int index) : Error(what), index(index) {}
  int index;
};

// A parameter sequence violates a feasibility condition; `index` is the
// first failing condition (k in the condition's own numbering).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, int index) : Error(what), index(index) {}
  int index;
};

// A formula would divide by zero.
class DivisionGuardError : public Error {
 public:
  DivisionGuardError(const std::string& what, int index) : Error(what), index(index) {}
  int index;
};

}  // namespace hdual

#endif
