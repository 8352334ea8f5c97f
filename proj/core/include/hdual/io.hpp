#ifndef HDUAL_IO_HPP
#define HDUAL_IO_HPP

#include <hdual/composite.hpp>
#include <hdual/continuous.hpp>
#include <hdual/method_lib.hpp>

#include <iosfwd>
#include <string>

namespace hdual::io {

// {"n": N, "rows": [[h_{1,0}], [h_{2,0}, h_{2,1}], ...]}
std::string h_to_json(const method_lib::StepsizeMatrix& H);
// Throws Error on malformed input (wrong row lengths, non-numeric, n mismatch).
method_lib::StepsizeMatrix h_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Shortest round-tripping decimal form; stable across runs.
std::string fmt(double x);

// iter,f,grad_norm[,x0,x1,...]
void write_trajectory_csv(std::ostream& os, const method_lib::Trajectory& tr, bool coords = false);
// iter,F,gap_norm[,x0,...] where gap_norm = |x_k - x_k^+|
void write_composite_csv(std::ostream& os, const composite::CompositeTrajectory& tr,
                         bool coords = false);
// t,f,grad_norm[,x0,...]
void write_ode_csv(std::ostream& os, const continuous::OdeTrajectory& tr, bool coords = false);

}  // namespace hdual::io

#endif
