#include "cli.hpp"

#include <hdual/certify.hpp>
#include <hdual/composite.hpp>
#include <hdual/continuous.hpp>
#include <hdual/io.hpp>
#include <hdual/method_lib.hpp>
#include <hdual/testbed.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hdual::cli {

namespace {

using json = nlohmann::ordered_json;
using certify::Kind;
using certify::WeightSequence;
using method_lib::StepsizeMatrix;
using method_lib::TSequence;

class UsageError : public Error {
 public:
  using Error::Error;
};

const std::vector<std::string> kMethods = {"ogm",   "ogmg",      "obl-f", "obl-g", "gd",
                                           "gogm",  "gogm-dual", "gfpgm", "sfg",   "sfg-family"};

// ---------------------------------------------------------------- methods

struct MethodOptions {
  std::string name = "ogm";
  int n = 10;
  double h = 1.0;
  double alpha = 4.0;
  std::string tseq;  // empty selects the method's default
};

struct Method {
  std::string name;
  StepsizeMatrix H = StepsizeMatrix::zeros(1);
  bool composite = false;
  double alpha = 1.0;
  std::optional<WeightSequence> weights;  // smooth methods
  Kind kind = Kind::C1;
  std::optional<TSequence> ts;  // composite methods
};

TSequence make_tsequence(const std::string& kind, int n, double alpha) {
  if (kind == "fgm") return method_lib::fgm_tsequence(n);
  if (kind == "ogm") return method_lib::ogm_tsequence(n);
  if (kind == "obl") return method_lib::obl_tsequence(n);
  if (kind == "quadratic") return composite::sfg_tsequence(n);
  if (kind == "tight") return composite::sfg_tight_tsequence(n, alpha);
  throw UsageError("unknown t-sequence '" + kind + "' (fgm, ogm, obl, quadratic, tight)");
}

WeightSequence as_role(WeightSequence w, certify::WeightRole role) {
  w.role = role;
  return w;
}

Method build_method(const MethodOptions& o) {
  if (o.n < 1) throw UsageError("--n must be at least 1");
  Method m;
  m.name = o.name;
  const auto fv = certify::WeightRole::FunctionValue;
  const auto gn = certify::WeightRole::GradientNorm;
  auto tseq = [&](const char* fallback) {
    return make_tsequence(o.tseq.empty() ? fallback : o.tseq, o.n, o.alpha);
  };
  if (o.name == "ogm") {
    m.H = method_lib::ogm_H(o.n);
    m.weights = as_role(certify::ogm_weights(o.n), fv);
  } else if (o.name == "ogmg") {
    m.H = method_lib::ogmg_H(o.n);
    m.weights = as_role(certify::reciprocal_reversed(certify::ogm_weights(o.n)), gn);
    m.kind = Kind::C2;
  } else if (o.name == "obl-f") {
    m.H = method_lib::obl_f_H(o.n);
    m.weights = as_role(certify::obl_weights(o.n), fv);
  } else if (o.name == "obl-g") {
    m.H = method_lib::obl_g_H(o.n);
    m.weights = as_role(certify::reciprocal_reversed(certify::obl_weights(o.n)), gn);
    m.kind = Kind::C2;
  } else if (o.name == "gd") {
    if (!(o.h > 0.0)) throw UsageError("--h must be positive");
    m.H = method_lib::gd_H(o.n, o.h);
    m.weights = as_role(certify::gd_weights(o.n, o.h), fv);
  } else if (o.name == "gogm") {
    const TSequence ts = tseq("fgm");
    m.H = method_lib::gogm_H(ts);
    m.weights = as_role(certify::gogm_weights(ts), fv);
  } else if (o.name == "gogm-dual") {
    const TSequence ts = tseq("fgm");
    m.H = method_lib::gogm_dual_H(ts);
    m.weights = as_role(certify::reciprocal_reversed(certify::gogm_weights(ts)), gn);
    m.kind = Kind::C2;
  } else if (o.name == "gfpgm") {
    m.ts = tseq("fgm");
    m.H = composite::gfpgm_H(*m.ts);
    m.composite = true;
  } else if (o.name == "sfg") {
    m.ts = composite::sfg_tsequence(o.n);
    m.H = composite::sfg_H(o.n);
    m.composite = true;
    m.alpha = 4.0;
  } else if (o.name == "sfg-family") {
    if (!(o.alpha > 0.0)) throw UsageError("--alpha must be positive");
    m.ts = tseq("quadratic");
    m.H = composite::sfg_family_H(*m.ts, o.alpha);
    m.composite = true;
    m.alpha = o.alpha;
  } else {
    throw UsageError("unknown method '" + o.name + "'");
  }
  return m;
}

const char* kind_name(Kind k) { return k == Kind::C1 ? "C1" : "C2"; }

Kind parse_kind(const std::string& s) {
  if (s == "C1" || s == "c1") return Kind::C1;
  if (s == "C2" || s == "c2") return Kind::C2;
  throw UsageError("kind must be C1 or C2");
}

json method_info(const Method& m) {
  json j;
  j["method"] = m.name;
  j["n"] = m.H.n();
  if (m.weights) {
    j["kind"] = kind_name(m.kind);
    j["weights"] = m.weights->values;
  }
  if (m.composite) {
    j["alpha"] = m.alpha;
    j["t"] = m.ts->t;
    j["T"] = m.ts->T;
  }
  return j;
}

// ---------------------------------------------------------------- helpers

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(what + ": malformed JSON (" + e.what() + ")");
  }
}

StepsizeMatrix load_H(const std::string& path) {
  try {
    return io::h_from_json(io::read_file(path));
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    io::write_file(path, text);
}

std::uint64_t resolve_seed(std::uint64_t config_seed, bool flag_given, std::uint64_t flag_seed) {
  if (flag_given) return flag_seed;
  if (const char* env = std::getenv("HDUAL_SEED"); env && *env) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("HDUAL_SEED is not an unsigned integer: ") + env);
    }
  }
  return config_seed;
}

double max_increase_rel(const std::vector<double>& e) {
  const double scale = std::max(std::abs(e.front()), 1e-300);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) worst = std::max(worst, (e[i + 1] - e[i]) / scale);
  return worst;
}

// Prefixes every data line of a CSV block (header skipped) with `tag,`.
void append_tagged_csv(std::ostringstream& dst, const std::string& block, const std::string& tag,
                       const std::string& tag_name, bool with_header) {
  std::istringstream in(block);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (with_header) dst << tag_name << ',' << line << '\n';
      continue;
    }
    dst << tag << ',' << line << '\n';
  }
}

// ---------------------------------------------------------------- problems

struct Instance {
  CompositeOracle F;  // smooth problems carry a zero regularizer
  bool smooth = true;
  Vec x0;
  Vec xstar;
  double fstar = 0.0;
};

CompositeOracle smooth_composite(std::shared_ptr<const ConvexOracle> f) {
  return {std::move(f), std::make_shared<testbed::ZeroProx>(), std::nullopt, std::nullopt};
}

void fill_reference(Instance& inst) {
  const auto ref = composite::reference_minimum(inst.F, inst.x0, 20000);
  inst.xstar = ref.x;
  inst.fstar = inst.F.Fstar ? std::min(*inst.F.Fstar, ref.F) : ref.F;
}

Instance make_instance(const std::string& problem, int d, testbed::Rng& rng) {
  if (d < 1) throw UsageError("--d must be at least 1");
  Instance inst;
  if (problem == "quadratic") {
    auto f = testbed::random_quadratic(d, rng);
    inst.F = smooth_composite(f);
    inst.x0 = testbed::random_vec(d, rng);
    inst.xstar = *f->minimizer();
    inst.fstar = *f->fstar();
    return inst;
  }
  if (problem == "logsumexp") {
    inst.F = smooth_composite(testbed::random_logsumexp(3 * d, d, rng, 1.0));
    inst.x0 = testbed::random_vec(d, rng);
  } else if (problem == "lasso") {
    inst.F = testbed::random_lasso(2 * d, d, rng, 0.1);
    inst.x0 = testbed::random_vec(d, rng);
    inst.smooth = false;
  } else if (problem == "box") {
    Mat A(2 * d, d);
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(2.0 * d));
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(rng);
    inst.F = testbed::make_box_ls(A, testbed::random_vec(2 * d, rng, 2.0), -1.0, 1.0);
    inst.x0 = testbed::random_vec(d, rng);
    inst.smooth = false;
  } else {
    std::string text;
    try {
      text = io::read_file(problem);
    } catch (const Error&) {
      throw UsageError("unknown problem '" + problem +
                       "' (quadratic, logsumexp, lasso, box or a fixture path)");
    }
    const json j = parse_json(text, problem);
    try {
      inst.F = testbed::composite_from_json(text);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    inst.smooth = inst.F.g->name() == "none";
    if (j.contains("x0")) {
      const auto v = j["x0"].get<std::vector<double>>();
      inst.x0 = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
      if (inst.x0.size() != inst.F.dim()) throw UsageError("fixture x0 has the wrong dimension");
    } else {
      inst.x0 = testbed::random_vec(inst.F.dim(), rng);
    }
  }
  // Start inside the domain of g so that F(x0) is finite.
  if (!std::isfinite(inst.F.g->value(inst.x0))) inst.x0 = inst.F.g->prox(inst.x0, 1.0);
  fill_reference(inst);
  return inst;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const MethodOptions& o, const std::string& out_path, std::ostream& out) {
  const Method m = build_method(o);
  const std::string text = io::h_to_json(m.H) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    io::write_file(out_path, text);
    out << method_info(m).dump(2) << '\n';
  }
  return kPass;
}

// ---------------------------------------------------------------- dualize

int cmd_dualize(const std::string& in_path, const std::string& out_path, std::ostream& out) {
  const StepsizeMatrix H = load_H(in_path);
  emit(out_path, io::h_to_json(method_lib::anti_transpose(H)) + "\n", out);
  return kPass;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  std::string h_path;
  std::string weights_path;
  std::vector<double> weights;
  std::string kind;
  double tol = 1e-9;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  const StepsizeMatrix H = load_H(o.h_path);
  WeightSequence w;
  std::optional<Kind> kind;
  if (!o.weights_path.empty()) {
    const json j = parse_json(io::read_file(o.weights_path), o.weights_path);
    if (!j.contains("weights") || !j["weights"].is_array())
      throw UsageError(o.weights_path + ": needs a 'weights' array");
    try {
      w.values = j["weights"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw UsageError(o.weights_path + ": weights must be numbers");
    }
    if (j.contains("kind")) kind = parse_kind(j["kind"].get<std::string>());
  } else if (!o.weights.empty()) {
    w.values = o.weights;
  } else {
    throw UsageError("verify needs --weights or --w");
  }
  if (!o.kind.empty()) kind = parse_kind(o.kind);
  const Kind k = kind.value_or(Kind::C1);
  if (w.n() != H.n()) throw UsageError("weights need n + 1 entries");
  w.role = k == Kind::C1 ? certify::WeightRole::FunctionValue : certify::WeightRole::GradientNorm;

  const bool weights_valid = w.positive() && w.nondecreasing();
  const certify::Verdict verdict =
      k == Kind::C1 ? certify::check_C1(H, w, o.tol) : certify::check_C2(H, w, o.tol);
  std::optional<certify::CongruenceReport> cong;
  if (w.positive()) {
    // The identity relates the primal pair (H, u) to its dual (H^A, v).
    cong = k == Kind::C1
               ? certify::verify_congruence(H, w, o.tol)
               : certify::verify_congruence(method_lib::anti_transpose(H),
                                            certify::reciprocal_reversed(w), o.tol);
  }
  const bool pass = weights_valid && verdict.pass && cong && cong->pass;

  json j;
  j["kind"] = kind_name(k);
  j["n"] = H.n();
  j["min_eig"] = verdict.min_eig;
  j["residual_congruence"] = cong ? json(cong->max_abs_residual) : json(nullptr);
  j["pass"] = pass;
  if (pass) {
    const auto b = certify::rate_from_certificate(k, w, verdict);
    j["bound"] = {{"coefficient", b.coefficient}, {"formula", b.formula}};
  } else {
    j["bound"] = nullptr;
  }
  j["weights_valid"] = weights_valid;
  j["psd"] = verdict.pass;
  out << j.dump(2) << '\n';
  return pass ? kPass : kVerifyFail;
}

// ---------------------------------------------------------------- run

struct RunOptions {
  MethodOptions method;
  std::string h_file;
  std::string weights_file;
  std::string kind;
  std::string problem = "quadratic";
  int d = 10;
  int instances = 1;
  std::uint64_t seed = 1;
  std::string csv;
  std::string summary;
  double slack = 1e-8;
};

struct Row {
  int instance;
  std::string quantity;
  std::string formula;
  double measured;
  double bound;
  bool pass;
};

json row_json(const Row& r) {
  json j;
  j["instance"] = r.instance;
  j["quantity"] = r.quantity;
  j["formula"] = r.formula;
  j["measured"] = r.measured;
  j["bound"] = r.bound;
  j["pass"] = r.pass;
  return j;
}

Method method_from_file(const RunOptions& o) {
  Method m;
  m.name = "file:" + o.h_file;
  m.H = load_H(o.h_file);
  if (o.weights_file.empty()) throw UsageError("--h-file needs --weights for the bound");
  const json j = parse_json(io::read_file(o.weights_file), o.weights_file);
  if (!j.contains("weights")) throw UsageError(o.weights_file + ": needs a 'weights' array");
  WeightSequence w;
  w.values = j["weights"].get<std::vector<double>>();
  if (w.n() != m.H.n()) throw UsageError("weights need n + 1 entries");
  m.kind = o.kind.empty() ? (j.contains("kind") ? parse_kind(j["kind"].get<std::string>()) : Kind::C1)
                          : parse_kind(o.kind);
  w.role = m.kind == Kind::C1 ? certify::WeightRole::FunctionValue
                              : certify::WeightRole::GradientNorm;
  m.weights = w;
  return m;
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  if (o.instances < 1) throw UsageError("--instances must be at least 1");
  const Method m = o.h_file.empty() ? build_method(o.method) : method_from_file(o);
  std::optional<certify::Bound> bound;
  if (m.weights) {
    const auto verdict = m.kind == Kind::C1 ? certify::check_C1(m.H, *m.weights)
                                            : certify::check_C2(m.H, *m.weights);
    if (verdict.pass && m.weights->positive() && m.weights->nondecreasing())
      bound = certify::rate_from_certificate(m.kind, *m.weights, verdict);
    else
      err << "warning: certificate check failed; no bound available\n";
  }
  const int N = m.H.n();
  testbed::Rng rng(o.seed);
  std::vector<Row> rows;
  std::ostringstream csv;
  auto add = [&](int i, std::string q, std::string formula, double measured, double b,
                 double slack) {
    rows.push_back({i, std::move(q), std::move(formula), measured, b, measured <= b + slack});
  };

  for (int i = 0; i < o.instances; ++i) {
    const Instance inst = make_instance(o.problem, o.d, rng);
    const double L = inst.F.lipschitz();
    const double LR2 = L * (inst.x0 - inst.xstar).squaredNorm();
    if (!m.composite) {
      if (!inst.smooth) throw UsageError("method '" + m.name + "' needs a smooth problem");
      const auto& f = *inst.F.f;
      const auto tr = method_lib::run_fsfom(m.H, f, inst.x0, L);
      std::ostringstream block;
      io::write_trajectory_csv(block, tr);
      append_tagged_csv(csv, block.str(), std::to_string(i), "instance", i == 0);
      const double gap0 = f.value(inst.x0) - inst.fstar;
      const double g2 = tr.grads[N].squaredNorm() / (2.0 * L);
      if (m.kind == Kind::C1) {
        const double measured = tr.fvals[N] - inst.fstar;
        if (bound)
          add(i, "f_gap", bound->formula, measured, bound->evaluate(LR2), o.slack);
        const auto U = certify::energy_U(tr, *m.weights, inst.xstar, inst.fstar);
        add(i, "energy_U_increase", "max_k (U_{k+1} - U_k) / |U_{-1}| <= 1e-9",
            max_increase_rel(U), 1e-9, 0.0);
      } else {
        if (bound) add(i, "grad_sq_over_2L", bound->formula, g2, bound->evaluate(gap0), o.slack);
        const auto V = certify::energy_V(tr, *m.weights, inst.fstar);
        add(i, "energy_V_increase", "max_k (V_{k+1} - V_k) / |V_0| <= 1e-9", max_increase_rel(V),
            1e-9, 0.0);
      }
      if (m.name == "gd" && o.method.h <= 1.0) {
        const auto cb = certify::gd_gradient_corollary_bound(N, o.method.h);
        add(i, "gd_grad_sq_over_2L",
            "||grad f(x_N)||^2/(2L) <= min(f-gap/(2Nh+1), L R^2/(2(2floor(N/2)h+1)(2ceil(N/2)h+1)))",
            g2, cb.evaluate(gap0, LR2), o.slack);
      }
    } else {
      const auto tr = composite::run_composite(m.H, inst.F, inst.x0, m.alpha);
      std::ostringstream block;
      io::write_composite_csv(block, tr);
      append_tagged_csv(csv, block.str(), std::to_string(i), "instance", i == 0);
      if (m.name == "gfpgm") {
        add(i, "F_gap", "F(x_N^+) - F* <= L ||x_0 - x*||^2 / (2 T_N)", tr.prox_values[N] - inst.fstar,
            LR2 / (2.0 * m.ts->T.back()), o.slack);
      } else {
        const auto gm = composite::gradient_mapping_bound(inst.F, tr.points[N], m.alpha);
        const double measured = gm.exact ? (*gm.exact) * (*gm.exact) : gm.bound * gm.bound;
        const double c = composite::sfg_family_rate_constant(*m.ts, m.alpha);
        const double gap0 = inst.F.value(inst.x0) - inst.fstar;
        add(i, "min_subgrad_sq",
            "min ||dF(y_N^+)||^2 <= 2(alpha+1)^2/(alpha T_N) * L (F(y_0) - F*)", measured,
            c * L * gap0, o.slack);
      }
    }
  }

  int violations = 0;
  json summary;
  summary["command"] = "run";
  summary["method"] = m.name;
  summary["n"] = N;
  if (m.composite) summary["alpha"] = m.alpha;
  summary["problem"] = o.problem;
  summary["d"] = o.d;
  summary["seed"] = o.seed;
  summary["instances"] = o.instances;
  summary["slack"] = o.slack;
  json jr = json::array();
  for (const Row& r : rows) {
    violations += r.pass ? 0 : 1;
    jr.push_back(row_json(r));
  }
  summary["rows"] = jr;
  summary["violations"] = violations;
  summary["pass"] = violations == 0 && (bound || m.composite);
  if (!o.csv.empty()) io::write_file(o.csv, csv.str());
  emit(o.summary, summary.dump(2) + "\n", out);
  return summary["pass"].get<bool>() ? kPass : kVerifyFail;
}

// ---------------------------------------------------------------- ode

struct OdeCmdOptions {
  std::string family = "p";
  double p = 2.0;
  double C = 0.5;
  double r = 3.0;
  double T = 10.0;
  std::string side = "both";
  std::string problem = "quadratic";
  int d = 10;
  std::uint64_t seed = 1;
  double rtol = 1e-8;
  double atol = 1e-10;
  std::string csv;
};

int cmd_ode(const OdeCmdOptions& o, std::ostream& out) {
  if (o.problem != "quadratic" && o.problem != "logsumexp")
    throw UsageError("ode supports the quadratic and logsumexp problems");
  testbed::Rng rng(o.seed);
  const Instance inst = make_instance(o.problem, o.d, rng);
  const auto& f = *inst.F.f;
  continuous::OdeOptions opts;
  opts.rtol = o.rtol;
  opts.atol = o.atol;
  const bool primal = o.side == "primal" || o.side == "both";
  const bool dual = o.side == "dual" || o.side == "both";
  json j;
  j["command"] = "ode";
  j["family"] = o.family;
  j["problem"] = o.problem;
  j["d"] = o.d;
  j["seed"] = o.seed;
  j["T"] = o.T;
  bool pass = true;
  std::ostringstream csv;
  bool header = true;
  auto add_csv = [&](const continuous::OdeTrajectory& tr, const char* side) {
    std::ostringstream block;
    io::write_ode_csv(block, tr);
    append_tagged_csv(csv, block.str(), side, "side", header);
    header = false;
  };

  if (o.family == "p") {
    const continuous::PFamily pf{o.p, o.C, o.T};
    j["p"] = o.p;
    j["C"] = o.C;
    auto report = [&](const continuous::RateCheck& rate, const continuous::EnergyCurve& e,
                      std::size_t steps) {
      json s;
      s["measured"] = rate.measured;
      s["bound"] = rate.bound;
      s["energy_end"] = rate.energy_end;
      s["rate_pass"] = rate.holds(0.05);
      s["energy_max_increase_rel"] = e.max_increase_rel;
      s["energy_identity_residual"] = e.identity_residual;
      s["monotone"] = e.max_increase_rel <= 1e-6;
      s["grid_points"] = steps;
      pass = pass && rate.holds(0.05) && e.max_increase_rel <= 1e-6;
      return s;
    };
    if (primal) {
      const auto rep = continuous::analyze_primal(pf, f, inst.x0, inst.xstar, inst.fstar, opts);
      j["primal"] = report(rep.rate, rep.energy, rep.traj.size());
      j["primal"]["formula"] = "f(X(T)) - f* <= ||x0 - x*||^2 / (2 C T^p)";
      add_csv(rep.traj, "primal");
    }
    if (dual) {
      const auto rep = continuous::analyze_dual(pf, f, inst.x0, inst.fstar, opts);
      j["dual"] = report(rep.rate, rep.energy, rep.traj.size());
      j["dual"]["formula"] = "||grad f(Y(T))||^2 / 2 <= (f(y0) - f*) / (C T^p)";
      j["dual"]["terminal_velocity_error"] = rep.traj.terminal_velocity_error;
      add_csv(rep.traj, "dual");
    }
  } else if (o.family == "r") {
    const continuous::RFamily rf{o.r, o.T};
    j["r"] = o.r;
    auto report = [&](const continuous::SosResidual& s) {
      json k;
      k["lhs"] = s.lhs;
      k["rhs"] = s.rhs;
      k["boundary"] = s.boundary;
      k["integral"] = s.integral;
      k["relative"] = s.relative;
      k["pass"] = s.relative <= 1e-4;
      pass = pass && s.relative <= 1e-4;
      return k;
    };
    if (primal) {
      j["primal"] = report(continuous::sos_identity_check(rf, f, inst.x0, continuous::Side::Primal,
                                                          inst.xstar, inst.fstar, opts));
      add_csv(continuous::integrate_primal(rf, f, inst.x0, opts), "primal");
    }
    if (dual) {
      j["dual"] = report(continuous::sos_identity_check(rf, f, inst.x0, continuous::Side::Dual,
                                                        std::nullopt, inst.fstar, opts));
      add_csv(continuous::integrate_dual(rf, f, inst.x0, opts), "dual");
    }
  } else {
    throw UsageError("--family must be p or r");
  }
  j["pass"] = pass;
  if (!o.csv.empty()) io::write_file(o.csv, csv.str());
  out << j.dump(2) << '\n';
  return pass ? kPass : kVerifyFail;
}

// ---------------------------------------------------------------- sfg-sweep

struct SweepOptions {
  std::vector<double> alphas{3.8, 4.0};
  std::vector<int> ns{10, 25, 50, 100};
  std::string tseq = "tight";
  int instances = 3;
  int d = 20;
  std::uint64_t seed = 1;
};

int cmd_sfg_sweep(const SweepOptions& o, std::ostream& out) {
  if (o.instances < 1) throw UsageError("--instances must be at least 1");
  testbed::Rng rng(o.seed);
  std::vector<Instance> insts;
  for (int i = 0; i < o.instances; ++i) insts.push_back(make_instance("lasso", o.d, rng));
  json rows = json::array();
  bool pass = true;
  for (double alpha : o.alphas) {
    for (int n : o.ns) {
      if (n < 1) throw UsageError("--n entries must be at least 1");
      const TSequence ts = make_tsequence(o.tseq, n, alpha);
      const int bad = composite::sfg_condition_violation(ts, alpha, 1e-9);
      json r;
      r["alpha"] = alpha;
      r["n"] = n;
      r["feasible"] = bad < 0;
      r["violation_index"] = bad < 0 ? json(nullptr) : json(bad);
      if (bad < 0) {
        const double c = composite::sfg_family_rate_constant(ts, alpha);
        const auto fam = composite::sfg_family(ts, alpha);
        double worst = 0.0;
        bool ok = true;
        for (const Instance& inst : insts) {
          const auto tr = composite::run_composite_three_term(fam.dual, inst.F, inst.x0, alpha);
          const auto gm = composite::gradient_mapping_bound(inst.F, tr.points[n], alpha);
          const double L = inst.F.lipschitz();
          const double gap0 = inst.F.value(inst.x0) - inst.fstar;
          const double measured = (*gm.exact) * (*gm.exact);
          worst = std::max(worst, measured / (L * gap0));
          ok = ok && measured <= c * L * gap0 + 1e-8;
        }
        r["constant_times_n2"] = c * n * n;
        r["empirical_ratio_times_n2"] = worst * n * n;
        r["guarantee_holds"] = ok;
        pass = pass && ok;
      }
      rows.push_back(r);
    }
  }
  json j;
  j["command"] = "sfg-sweep";
  j["t"] = o.tseq;
  j["d"] = o.d;
  j["seed"] = o.seed;
  j["instances"] = o.instances;
  j["rows"] = rows;
  j["pass"] = pass;
  out << j.dump(2) << '\n';
  return pass ? kPass : kVerifyFail;
}

// ---------------------------------------------------------------- config merge

template <class T>
void from_config(const json& cfg, const char* key, CLI::Option* opt, T& field) {
  if (!cfg.contains(key) || opt->count() > 0) return;
  try {
    field = cfg[key].get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config: bad value for '") + key + "'");
  }
}

void add_method_options(CLI::App* sub, MethodOptions& m, std::map<std::string, CLI::Option*>& opts) {
  opts["method"] = sub->add_option("method", m.name, "Catalog method")
                       ->check(CLI::IsMember(kMethods));
  opts["n"] = sub->add_option("--n", m.n, "Number of steps N")->capture_default_str();
  opts["h"] = sub->add_option("--h", m.h, "Gradient-descent step h")->capture_default_str();
  opts["alpha"] =
      sub->add_option("--alpha", m.alpha, "Proximal parameter alpha (sfg-family)")->capture_default_str();
  opts["t"] = sub->add_option("--t", m.tseq, "t-sequence: fgm, ogm, obl, quadratic, tight");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"H-duality toolkit: generate, dualize, verify and run fixed-step first-order methods"};
  // -h stays free for the gradient-descent step flag --h.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // gen
  MethodOptions gen_opts;
  std::string gen_out;
  std::map<std::string, CLI::Option*> gen_map;
  CLI::App* gen = app.add_subcommand("gen", "Write a method's stepsize matrix as JSON");
  add_method_options(gen, gen_opts, gen_map);
  gen_map["method"]->required();
  gen->add_option("-o,--out", gen_out, "Output file (stdout when omitted); weights then go to stdout");

  // dualize
  std::string dual_in, dual_out;
  CLI::App* dualize = app.add_subcommand("dualize", "Write the anti-transpose of a stepsize matrix");
  dualize->add_option("input", dual_in, "Stepsize matrix JSON")->required();
  dualize->add_option("-o,--out", dual_out, "Output file (stdout when omitted)");

  // verify
  VerifyOptions ver;
  CLI::App* verify = app.add_subcommand("verify", "Check a Lyapunov certificate and report JSON");
  verify->add_option("--matrix,--H", ver.h_path, "Stepsize matrix JSON")->required();
  verify->add_option("--weights", ver.weights_path, "Weights JSON with a 'weights' array");
  verify->add_option("--w", ver.weights, "Inline weights, comma separated")->delimiter(',');
  verify->add_option("--kind", ver.kind, "C1 (function value) or C2 (gradient norm)");
  verify->add_option("--tol", ver.tol, "PSD and congruence tolerance")->capture_default_str();

  // run
  RunOptions run_opts;
  std::string run_config;
  std::map<std::string, CLI::Option*> run_map;
  CLI::App* runc = app.add_subcommand("run", "Run a method on seeded problems; CSV trace plus JSON summary");
  add_method_options(runc, run_opts.method, run_map);
  runc->add_option("--config", run_config, "JSON config; flags given explicitly take precedence");
  run_map["h_file"] = runc->add_option("--h-file", run_opts.h_file, "Custom stepsize matrix JSON");
  run_map["weights"] = runc->add_option("--weights", run_opts.weights_file, "Weights JSON for --h-file");
  run_map["kind"] = runc->add_option("--kind", run_opts.kind, "C1 or C2 for --h-file");
  run_map["problem"] = runc->add_option("--problem", run_opts.problem,
                                        "quadratic, logsumexp, lasso, box, or a fixture path")
                           ->capture_default_str();
  run_map["d"] = runc->add_option("--d", run_opts.d, "Problem dimension")->capture_default_str();
  run_map["instances"] =
      runc->add_option("--instances", run_opts.instances, "Number of seeded instances")->capture_default_str();
  std::uint64_t run_seed_flag = 1;
  CLI::Option* run_seed = runc->add_option("--seed", run_seed_flag, "Seed (overrides HDUAL_SEED)");
  run_map["csv"] = runc->add_option("--csv", run_opts.csv, "Trajectory CSV path");
  run_map["summary"] = runc->add_option("--summary", run_opts.summary, "Summary JSON path (stdout when omitted)");
  run_map["slack"] = runc->add_option("--slack", run_opts.slack, "Additive slack on bounds")->capture_default_str();

  // ode
  OdeCmdOptions ode_opts;
  CLI::App* ode = app.add_subcommand("ode", "Integrate a continuous-time pair and check rates");
  ode->add_option("--family", ode_opts.family, "p or r")->check(CLI::IsMember({"p", "r"}))->capture_default_str();
  ode->add_option("--p", ode_opts.p, "p-family exponent")->capture_default_str();
  ode->add_option("--C", ode_opts.C, "p-family constant")->capture_default_str();
  ode->add_option("--r", ode_opts.r, "r-family exponent")->capture_default_str();
  ode->add_option("--T", ode_opts.T, "Terminal time")->capture_default_str();
  ode->add_option("--side", ode_opts.side, "primal, dual or both")
      ->check(CLI::IsMember({"primal", "dual", "both"}))
      ->capture_default_str();
  ode->add_option("--problem", ode_opts.problem, "quadratic or logsumexp")->capture_default_str();
  ode->add_option("--d", ode_opts.d, "Problem dimension")->capture_default_str();
  std::uint64_t ode_seed_flag = 1;
  CLI::Option* ode_seed = ode->add_option("--seed", ode_seed_flag, "Seed (overrides HDUAL_SEED)");
  ode->add_option("--rtol", ode_opts.rtol, "Relative tolerance")->capture_default_str();
  ode->add_option("--atol", ode_opts.atol, "Absolute tolerance")->capture_default_str();
  ode->add_option("--csv", ode_opts.csv, "Trajectory CSV path");

  // sfg-sweep
  SweepOptions sw;
  CLI::App* sweep = app.add_subcommand("sfg-sweep", "Scan alpha and N for the gradient-mapping family");
  sweep->add_option("--alpha", sw.alphas, "Alpha values, comma separated")->delimiter(',')->capture_default_str();
  sweep->add_option("--n", sw.ns, "N values, comma separated")->delimiter(',')->capture_default_str();
  sweep->add_option("--t", sw.tseq, "t-sequence: tight or quadratic")
      ->check(CLI::IsMember({"tight", "quadratic"}))
      ->capture_default_str();
  sweep->add_option("--instances", sw.instances, "Lasso instances per point")->capture_default_str();
  sweep->add_option("--d", sw.d, "Lasso dimension")->capture_default_str();
  std::uint64_t sweep_seed_flag = 1;
  CLI::Option* sweep_seed = sweep->add_option("--seed", sweep_seed_flag, "Seed (overrides HDUAL_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_opts, gen_out, out);
    if (dualize->parsed()) return cmd_dualize(dual_in, dual_out, out);
    if (verify->parsed()) return cmd_verify(ver, out);
    if (runc->parsed()) {
      std::uint64_t config_seed = 1;
      if (!run_config.empty()) {
        const json cfg = parse_json(io::read_file(run_config), run_config);
        if (!cfg.is_object()) throw UsageError("config must be a JSON object");
        from_config(cfg, "method", run_map["method"], run_opts.method.name);
        from_config(cfg, "n", run_map["n"], run_opts.method.n);
        from_config(cfg, "h", run_map["h"], run_opts.method.h);
        from_config(cfg, "alpha", run_map["alpha"], run_opts.method.alpha);
        from_config(cfg, "t", run_map["t"], run_opts.method.tseq);
        from_config(cfg, "h_file", run_map["h_file"], run_opts.h_file);
        from_config(cfg, "weights", run_map["weights"], run_opts.weights_file);
        from_config(cfg, "kind", run_map["kind"], run_opts.kind);
        from_config(cfg, "problem", run_map["problem"], run_opts.problem);
        from_config(cfg, "d", run_map["d"], run_opts.d);
        from_config(cfg, "instances", run_map["instances"], run_opts.instances);
        from_config(cfg, "csv", run_map["csv"], run_opts.csv);
        from_config(cfg, "summary", run_map["summary"], run_opts.summary);
        from_config(cfg, "slack", run_map["slack"], run_opts.slack);
        if (cfg.contains("seed")) config_seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("method") && run_map["method"]->count() == 0 &&
            std::find(kMethods.begin(), kMethods.end(), run_opts.method.name) == kMethods.end())
          throw UsageError("config: unknown method '" + run_opts.method.name + "'");
      } else if (run_map["method"]->count() == 0 && run_opts.h_file.empty()) {
        throw UsageError("run needs a method, --h-file or --config");
      }
      run_opts.seed = resolve_seed(config_seed, run_seed->count() > 0, run_seed_flag);
      return cmd_run(run_opts, out, err);
    }
    if (ode->parsed()) {
      ode_opts.seed = resolve_seed(1, ode_seed->count() > 0, ode_seed_flag);
      return cmd_ode(ode_opts, out);
    }
    if (sweep->parsed()) {
      sw.seed = resolve_seed(1, sweep_seed->count() > 0, sweep_seed_flag);
      return cmd_sfg_sweep(sw, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << " (condition index " << e.index << ")\n";
    return kVerifyFail;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << " (iterate " << e.index << ")\n";
    return kDivergence;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace hdual::cli
