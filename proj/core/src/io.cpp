#include <hdual/io.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace hdual::io {

using nlohmann::json;

std::string h_to_json(const method_lib::StepsizeMatrix& H) {
  json j;
  j["n"] = H.n();
  j["rows"] = H.rows();
  return j.dump(2) + "\n";
}

method_lib::StepsizeMatrix h_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed H-matrix JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array())
    throw Error("H-matrix JSON needs a \"rows\" array");
  std::vector<std::vector<double>> rows;
  for (const auto& row : j["rows"]) {
    if (!row.is_array()) throw Error("H-matrix row is not an array");
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) throw Error("H-matrix entry is not a number");
      r.push_back(v.get<double>());
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error("H-matrix has no rows");
  if (j.contains("n") && (!j["n"].is_number_integer() || j["n"].get<long>() != static_cast<long>(rows.size())))
    throw Error("H-matrix \"n\" does not match the row count");
  return method_lib::StepsizeMatrix::from_rows(rows);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed for " + path);
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace {

void coords_header(std::ostream& os, long d) {
  for (long i = 0; i < d; ++i) os << ",x" << i;
}

void coords_row(std::ostream& os, const Vec& x) {
  for (long i = 0; i < x.size(); ++i) os << ',' << fmt(x(i));
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const method_lib::Trajectory& tr, bool coords) {
  os << "iter,f,grad_norm";
  if (coords && !tr.points.empty()) coords_header(os, tr.points[0].size());
  os << '\n';
  for (std::size_t k = 0; k < tr.points.size(); ++k) {
    os << k << ',' << fmt(tr.fvals[k]) << ',' << fmt(tr.grads[k].norm());
    if (coords) coords_row(os, tr.points[k]);
    os << '\n';
  }
}

void write_composite_csv(std::ostream& os, const composite::CompositeTrajectory& tr, bool coords) {
  os << "iter,F,gap_norm";
  if (coords && !tr.points.empty()) coords_header(os, tr.points[0].size());
  os << '\n';
  for (std::size_t k = 0; k < tr.points.size(); ++k) {
    os << k << ',' << fmt(tr.prox_values[k]) << ','
       << fmt((tr.points[k] - tr.prox_points[k]).norm());
    if (coords) coords_row(os, tr.prox_points[k]);
    os << '\n';
  }
}

void write_ode_csv(std::ostream& os, const continuous::OdeTrajectory& tr, bool coords) {
  os << "t,f,grad_norm";
  if (coords && !tr.X.empty()) coords_header(os, tr.X[0].size());
  os << '\n';
  for (std::size_t j = 0; j < tr.size(); ++j) {
    os << fmt(tr.t[j]) << ',' << fmt(tr.f[j]) << ',' << fmt(tr.G[j].norm());
    if (coords) coords_row(os, tr.X[j]);
    os << '\n';
  }
}

}  // namespace hdual::io
