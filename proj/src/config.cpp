/*
 Copyright 2026 The koopman-hj Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "khj/config.hpp"

#include <fstream>
#include <set>

namespace khj {

using nlohmann::json;

namespace {

// Strict object reader: every key must be consumed.
class Obj {
 public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Obj() = default;

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const json& at(const std::string& k) {
    seen_.insert(k);
    if (!j_.contains(k)) throw ConfigError(where_ + "." + k + " is required");
    return j_.at(k);
  }
  template <class T>
  T get(const std::string& k, T def) {
    if (!has(k)) return def;
    try {
      return j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + k + " has the wrong type");
    }
  }
  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where_ + "." + it.key());
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Box default_domain(const SystemSpec& s) {
  Vec h;
  if (s.builtin == "example1") {
    h = Vec::Constant(2, 1.0);
  } else if (s.builtin == "pendulum") {
    h.resize(3);
    h << 3.0, 5.0, 5.0;
  } else if (s.builtin == "cubic1d") {
    h = Vec::Constant(1, 0.5);
  } else {
    throw ConfigError("domain is required for polynomial systems");
  }
  return Box::symmetric(h);
}

int system_dim(const SystemSpec& s) {
  if (s.builtin == "example1") return 2;
  if (s.builtin == "pendulum") return 3;
  if (s.builtin == "cubic1d") return 1;
  return s.poly->n;
}

}  // namespace

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Mat mat_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty matrix");
  const size_t r = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(what + " must be a list of rows");
  const size_t c = j[0].size();
  Mat m(r, c);
  for (size_t i = 0; i < r; ++i) {
    if (!j[i].is_array() || j[i].size() != c) throw ConfigError(what + " has ragged rows");
    for (size_t k = 0; k < c; ++k) {
      if (!j[i][k].is_number()) throw ConfigError(what + " entries must be numbers");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

Vec vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty list");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  Obj root(j, "config");
  cfg.schema_version = root.get<int>("schema_version", -1);
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));

  {
    Obj s(root.at("system"), "system");
    if (s.has("builtin")) {
      cfg.system.builtin = s.get<std::string>("builtin", "");
      if (cfg.system.builtin != "example1" && cfg.system.builtin != "pendulum" &&
          cfg.system.builtin != "cubic1d")
        throw ConfigError("system.builtin must be example1, pendulum or cubic1d");
      cfg.system.gravity = s.get<double>("gravity", 9.81);
      if (cfg.system.builtin != "pendulum" && s.has("gravity"))
        throw ConfigError("system.gravity only applies to the pendulum");
      if (!(cfg.system.gravity > 0.0)) throw ConfigError("system.gravity must be positive");
    } else {
      Obj p(s.at("polynomial"), "system.polynomial");
      PolynomialSpec ps;
      ps.n = p.get<int>("n", 0);
      if (ps.n <= 0) throw ConfigError("system.polynomial.n must be positive");
      const json& f = p.at("f");
      if (!f.is_array() || static_cast<int>(f.size()) != ps.n)
        throw ConfigError("system.polynomial.f must have n term lists");
      for (size_t i = 0; i < f.size(); ++i) {
        std::vector<PolyTerm> row;
        if (!f[i].is_array()) throw ConfigError("system.polynomial.f rows must be lists");
        for (const auto& t : f[i]) {
          Obj to(t, "system.polynomial.f term");
          PolyTerm term;
          term.exponent = to.get<std::vector<int>>("exponent", {});
          term.coeff = to.get<double>("coeff", 0.0);
          to.finish();
          if (static_cast<int>(term.exponent.size()) != ps.n)
            throw ConfigError("polynomial exponent must have n entries");
          int deg = 0;
          for (int e : term.exponent) {
            if (e < 0) throw ConfigError("polynomial exponents must be non-negative");
            deg += e;
          }
          if (deg == 0 && term.coeff != 0.0)
            throw ConfigError("polynomial drift must vanish at the origin");
          row.push_back(term);
        }
        ps.f.push_back(row);
      }
      ps.B = mat_from_json(p.at("B"), "system.polynomial.B");
      ps.Q = mat_from_json(p.at("Q"), "system.polynomial.Q");
      ps.D = mat_from_json(p.at("D"), "system.polynomial.D");
      p.finish();
      if (ps.B.rows() != ps.n || ps.Q.rows() != ps.n || ps.Q.cols() != ps.n ||
          ps.D.rows() != ps.B.cols() || ps.D.cols() != ps.B.cols())
        throw ConfigError("system.polynomial matrix shapes are inconsistent");
      cfg.system.poly = ps;
    }
    s.finish();
  }

  cfg.procedure = root.get<int>("procedure", 1);
  if (cfg.procedure != 1 && cfg.procedure != 2) throw ConfigError("procedure must be 1 or 2");
  const int n = system_dim(cfg.system);

  if (root.has("domain")) {
    Obj d(root.at("domain"), "domain");
    cfg.domain.lo = vec_from_json(d.at("lo"), "domain.lo");
    cfg.domain.hi = vec_from_json(d.at("hi"), "domain.hi");
    d.finish();
  } else {
    cfg.domain = default_domain(cfg.system);
  }
  if (cfg.domain.dim() != n || cfg.domain.hi.size() != n)
    throw ConfigError("domain has the wrong dimension");
  for (int i = 0; i < n; ++i)
    if (!(cfg.domain.hi(i) > cfg.domain.lo(i))) throw ConfigError("domain is degenerate");

  cfg.eigenfunctions = root.get<std::string>("eigenfunctions", "galerkin");
  if (cfg.eigenfunctions != "galerkin" && cfg.eigenfunctions != "analytic")
    throw ConfigError("eigenfunctions must be galerkin or analytic");
  if (cfg.eigenfunctions == "analytic" && cfg.system.builtin != "example1" &&
      cfg.system.builtin != "cubic1d")
    throw ConfigError("analytic eigenfunctions exist only for example1 and cubic1d");

  if (root.has("basis")) {
    Obj b(root.at("basis"), "basis");
    cfg.degree = b.get<int>("degree", cfg.degree);
    cfg.d1 = b.get<int>("d1", cfg.d1);
    cfg.d2 = b.get<int>("d2", cfg.d2);
    cfg.d3 = b.get<int>("d3", cfg.d3);
    b.finish();
  }
  if (cfg.degree < 2 || cfg.d1 < 2 || cfg.d2 < 1 || cfg.d3 < 2)
    throw ConfigError("basis degrees: degree >= 2, d1 >= 2, d2 >= 1, d3 >= 2");

  cfg.samples = root.get<Eigen::Index>("samples", cfg.samples);
  if (cfg.samples < 1) throw ConfigError("samples must be positive");
  cfg.seed = root.get<std::uint64_t>("seed", cfg.seed);

  if (root.has("procedure2")) {
    Obj p(root.at("procedure2"), "procedure2");
    cfg.p_scale = p.get<double>("p_scale", cfg.p_scale);
    cfg.fit_samples = p.get<Eigen::Index>("fit_samples", cfg.fit_samples);
    cfg.psd = p.get<bool>("psd", cfg.psd);
    cfg.fit_value = p.get<bool>("fit_value", cfg.fit_value);
    p.finish();
  }
  if (!(cfg.p_scale > 0.0) || cfg.fit_samples < 1)
    throw ConfigError("procedure2.p_scale and fit_samples must be positive");

  if (root.has("integrator")) {
    Obj in(root.at("integrator"), "integrator");
    cfg.dt = in.get<double>("dt", cfg.dt);
    cfg.T = in.get<double>("T", cfg.T);
    in.finish();
  }
  if (!(cfg.dt > 0.0) || !(cfg.T >= cfg.dt)) throw ConfigError("integrator needs dt > 0, T >= dt");

  if (root.has("evaluation")) {
    Obj ev(root.at("evaluation"), "evaluation");
    cfg.grid_per_axis = ev.get<int>("grid_per_axis", cfg.grid_per_axis);
    ev.finish();
  }
  if (cfg.grid_per_axis < 2) throw ConfigError("evaluation.grid_per_axis must be >= 2");

  if (root.has("simulate")) {
    Obj sm(root.at("simulate"), "simulate");
    SimulateSpec& s = cfg.simulate;
    if (sm.has("initial_conditions")) {
      const json& ics = sm.at("initial_conditions");
      if (!ics.is_array()) throw ConfigError("simulate.initial_conditions must be a list");
      for (const auto& ic : ics) {
        Vec v = vec_from_json(ic, "simulate.initial_conditions entry");
        if (v.size() != n) throw ConfigError("initial condition has the wrong dimension");
        s.initial_conditions.push_back(v);
      }
    }
    if (sm.has("ic_cloud")) {
      Obj c(sm.at("ic_cloud"), "simulate.ic_cloud");
      s.cloud_center = vec_from_json(c.at("center"), "simulate.ic_cloud.center");
      s.cloud_spread = c.get<double>("spread", s.cloud_spread);
      s.cloud_count = c.get<int>("count", s.cloud_count);
      s.cloud_seed = c.get<std::uint64_t>("seed", s.cloud_seed);
      c.finish();
      if (s.cloud_center.size() != n || s.cloud_count < 1 || !(s.cloud_spread >= 0.0))
        throw ConfigError("simulate.ic_cloud is inconsistent");
    }
    s.controllers = sm.get<std::vector<std::string>>("controllers", s.controllers);
    for (const auto& c : s.controllers)
      if (c != "procedure" && c != "lqr" && c != "zero")
        throw ConfigError("controllers must be procedure, lqr or zero");
    if (sm.has("linear_gains")) {
      for (const auto& g : sm.at("linear_gains")) {
        Obj go(g, "simulate.linear_gains entry");
        LinearGainSpec lg;
        lg.name = go.get<std::string>("name", "");
        lg.K = mat_from_json(go.at("K"), "linear gain K");
        go.finish();
        if (lg.name.empty() || lg.K.cols() != n) throw ConfigError("linear gain is inconsistent");
        s.linear_gains.push_back(lg);
      }
    }
    s.write_trajectories = sm.get<bool>("write_trajectories", s.write_trajectories);
    sm.finish();
  }
  if (cfg.simulate.initial_conditions.empty() && cfg.simulate.cloud_center.size() == 0) {
    if (cfg.system.builtin == "pendulum") {
      cfg.simulate.cloud_center.resize(3);
      cfg.simulate.cloud_center << 0.7, -4.2, 6.2;
    } else {
      cfg.simulate.cloud_center = 0.5 * cfg.domain.hi;
    }
  }

  if (root.has("converge")) {
    Obj c(root.at("converge"), "converge");
    cfg.converge.L_list = c.get<std::vector<Eigen::Index>>("L_list", cfg.converge.L_list);
    cfg.converge.trials = c.get<int>("trials", cfg.converge.trials);
    cfg.converge.block = c.get<int>("block", cfg.converge.block);
    cfg.converge.eval_per_axis = c.get<int>("eval_per_axis", cfg.converge.eval_per_axis);
    c.finish();
  }
  if (cfg.converge.L_list.empty() || cfg.converge.trials < 1 || cfg.converge.eval_per_axis < 2)
    throw ConfigError("converge needs L_list, trials >= 1, eval_per_axis >= 2");
  for (auto L : cfg.converge.L_list)
    if (L < 1) throw ConfigError("converge.L_list entries must be positive");
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json resolved_config(const RunConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  json sys;
  if (!cfg.system.builtin.empty()) {
    sys["builtin"] = cfg.system.builtin;
    if (cfg.system.builtin == "pendulum") sys["gravity"] = cfg.system.gravity;
  } else {
    const PolynomialSpec& p = *cfg.system.poly;
    json f = json::array();
    for (const auto& row : p.f) {
      json r = json::array();
      for (const auto& t : row) r.push_back({{"exponent", t.exponent}, {"coeff", t.coeff}});
      f.push_back(r);
    }
    sys["polynomial"] = {{"n", p.n}, {"f", f}, {"B", to_json(p.B)}, {"Q", to_json(p.Q)},
                         {"D", to_json(p.D)}};
  }
  j["system"] = sys;
  j["procedure"] = cfg.procedure;
  j["domain"] = {{"lo", to_json(cfg.domain.lo)}, {"hi", to_json(cfg.domain.hi)}};
  j["eigenfunctions"] = cfg.eigenfunctions;
  j["basis"] = {{"degree", cfg.degree}, {"d1", cfg.d1}, {"d2", cfg.d2}, {"d3", cfg.d3}};
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  j["procedure2"] = {{"p_scale", cfg.p_scale},
                      {"fit_value", cfg.fit_value},
                      {"fit_samples", cfg.fit_samples},
                      {"psd", cfg.psd}};
  j["integrator"] = {{"dt", cfg.dt}, {"T", cfg.T}};
  j["evaluation"] = {{"grid_per_axis", cfg.grid_per_axis}};
  json sm;
  if (!cfg.simulate.initial_conditions.empty()) {
    json ics = json::array();
    for (const auto& v : cfg.simulate.initial_conditions) ics.push_back(to_json(v));
    sm["initial_conditions"] = ics;
  }
  if (cfg.simulate.cloud_center.size())
    sm["ic_cloud"] = {{"center", to_json(cfg.simulate.cloud_center)},
                      {"spread", cfg.simulate.cloud_spread},
                      {"count", cfg.simulate.cloud_count},
                      {"seed", cfg.simulate.cloud_seed}};
  sm["controllers"] = cfg.simulate.controllers;
  json gains = json::array();
  for (const auto& g : cfg.simulate.linear_gains)
    gains.push_back({{"name", g.name}, {"K", to_json(g.K)}});
  sm["linear_gains"] = gains;
  sm["write_trajectories"] = cfg.simulate.write_trajectories;
  j["simulate"] = sm;
  j["converge"] = {{"L_list", cfg.converge.L_list},
                   {"trials", cfg.converge.trials},
                   {"block", cfg.converge.block},
                   {"eval_per_axis", cfg.converge.eval_per_axis}};
  return j;
}

ControlAffineSystem build_system(const SystemSpec& spec) {
  ControlAffineSystem sys;
  if (spec.builtin == "example1")
    sys = builtin_example1();
  else if (spec.builtin == "pendulum")
    sys = builtin_pendulum(spec.gravity);
  else if (spec.builtin == "cubic1d")
    sys = builtin_cubic1d();
  else if (spec.poly)
    sys = polynomial_system(*spec.poly);
  else
    throw ConfigError("system spec is empty");
  sys.validate();
  return sys;
}

json basis_descriptor(const MonomialBasis& b) {
  return {{"dim_in", b.dim_in()}, {"exponents", b.exponents()}};
}

MonomialBasis basis_from_descriptor(const json& j) {
  try {
    return MonomialBasis(j.at("dim_in").get<int>(), j.at("exponents").get<std::vector<Exponent>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad basis descriptor: ") + e.what());
  }
}

EigenfunctionSet build_eigenfunctions(const RunConfig& cfg, const ControlAffineSystem& sys) {
  if (cfg.eigenfunctions == "analytic") {
    if (sys.name == "example1") return example1_analytic_eigenfunctions(cfg.domain);
    return cubic1d_analytic_eigenfunction(cfg.domain);
  }
  auto basis = std::make_shared<const MonomialBasis>(monomial_basis(sys.n, 2, cfg.degree));
  const SampleSet samples = sample_domain(cfg.domain, cfg.samples, cfg.seed);
  return approximate_eigenfunction_set(sys.f, linearize(sys).A, basis, samples);
}

json solution_to_json(const HJSolution1& sol) {
  const EigenfunctionSet& e = sol.eig();
  json j;
  j["procedure"] = 1;
  j["system"] = sol.system().name;
  j["n"] = sol.system().n;
  j["Lambda"] = to_json(e.Lambda);
  j["Vt"] = to_json(e.Vt);
  j["L"] = to_json(sol.L());
  j["R1"] = to_json(sol.R1());
  j["Q1"] = to_json(sol.Q1());
  j["riccati_residual"] = sol.riccati_residual();
  json ef;
  ef["kind"] = e.has_basis() ? "galerkin" : "analytic";
  ef["box"] = {{"lo", to_json(e.box.lo)}, {"hi", to_json(e.box.hi)}};
  ef["block_start"] = e.block_start;
  ef["block_size"] = e.block_size;
  if (e.has_basis()) {
    ef["basis"] = basis_descriptor(*e.basis);
    ef["Theta"] = to_json(e.Theta);
    ef["residual_rms"] = e.residual_rms;
    ef["cond_J"] = e.cond_J;
  }
  j["eigenfunctions"] = ef;
  return j;
}

json solution_to_json(const HJSolution2& sol, const std::optional<JnFit>& fit) {
  const UnstableEigenfunctions& e = sol.eigs();
  json j;
  j["procedure"] = 2;
  j["system"] = sol.system().name;
  j["n"] = e.n;
  j["Wu_t"] = to_json(e.Wu_t);
  j["U"] = to_json(e.U);
  j["Lambda_u"] = to_json(e.Lambda_u);
  j["block_start"] = e.block_start;
  j["block_size"] = e.block_size;
  j["basis"] = {{"n", e.basis.n}, {"d1", e.basis.d1}, {"d2", e.basis.d2}};
  j["box"] = {{"lo", to_json(e.box.lo)}, {"hi", to_json(e.box.hi)}};
  j["residual_rms"] = e.residual_rms;
  j["cond_J"] = e.cond_J;
  j["Jl"] = to_json(sol.Jl());
  j["Jl_asymmetry"] = sol.Jl_asymmetry();
  if (sol.has_value()) {
    j["xi3"] = basis_descriptor(sol.xi3());
    j["Jn"] = to_json(*sol.Jn());
  }
  if (fit) {
    j["fit"] = {{"Jn_raw", to_json(fit->Jn)},
                {"Jn_psd", to_json(fit->Jn_psd)},
                {"fit_residual", fit->fit_residual},
                {"fit_residual_psd", fit->fit_residual_psd},
                {"objective", fit->objective},
                {"objective_psd", fit->objective_psd}};
  }
  return j;
}

namespace {

Box box_from_json(const json& j) {
  return Box{vec_from_json(j.at("lo"), "box.lo"), vec_from_json(j.at("hi"), "box.hi")};
}

void check_solution(const json& j, int procedure, const ControlAffineSystem& sys) {
  if (!j.is_object() || j.value("procedure", 0) != procedure)
    throw ConfigError("solution file is not a procedure " + std::to_string(procedure) + " result");
  if (j.value("n", 0) != sys.n || j.value("system", std::string()) != sys.name)
    throw ConfigError("solution file was made for a different system");
}

}  // namespace

HJSolution1 solution1_from_json(const json& j, const ControlAffineSystem& sys) {
  check_solution(j, 1, sys);
  try {
    const json& ef = j.at("eigenfunctions");
    const Box box = box_from_json(ef.at("box"));
    EigenfunctionSet e;
    if (ef.at("kind") == "galerkin") {
      auto basis = std::make_shared<const MonomialBasis>(basis_from_descriptor(ef.at("basis")));
      e = EigenfunctionSet::galerkin(mat_from_json(j.at("Vt"), "Vt"),
                                     mat_from_json(j.at("Lambda"), "Lambda"), basis,
                                     mat_from_json(ef.at("Theta"), "Theta"), box);
    } else if (sys.name == "example1") {
      e = example1_analytic_eigenfunctions(box);
    } else if (sys.name == "cubic1d") {
      e = cubic1d_analytic_eigenfunction(box);
    } else {
      throw ConfigError("analytic eigenfunctions unavailable for " + sys.name);
    }
    e.block_start = ef.at("block_start").get<std::vector<int>>();
    e.block_size = ef.at("block_size").get<std::vector<int>>();
    return HJSolution1(sys, e, mat_from_json(j.at("L"), "L"), mat_from_json(j.at("R1"), "R1"),
                       mat_from_json(j.at("Q1"), "Q1"), j.at("riccati_residual").get<double>());
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad solution file: ") + ex.what());
  }
}

HJSolution2 solution2_from_json(const json& j, const ControlAffineSystem& sys) {
  check_solution(j, 2, sys);
  try {
    UnstableEigenfunctions e;
    e.n = sys.n;
    const json& b = j.at("basis");
    e.basis = procedure2_basis(b.at("n").get<int>(), b.at("d1").get<int>(), b.at("d2").get<int>());
    e.Wu_t = mat_from_json(j.at("Wu_t"), "Wu_t");
    e.U = mat_from_json(j.at("U"), "U");
    e.Lambda_u = mat_from_json(j.at("Lambda_u"), "Lambda_u");
    e.block_start = j.at("block_start").get<std::vector<int>>();
    e.block_size = j.at("block_size").get<std::vector<int>>();
    e.residual_rms = j.at("residual_rms").get<std::vector<double>>();
    e.cond_J = j.at("cond_J").get<std::vector<double>>();
    e.box = box_from_json(j.at("box"));
    if (e.Wu_t.rows() != sys.n || e.Wu_t.cols() != 2 * sys.n || e.U.rows() != sys.n ||
        e.U.cols() != e.basis.M())
      throw ConfigError("solution file matrices have the wrong shape");
    HJSolution2 sol(sys, e);
    if (j.contains("Jn"))
      sol.set_value(basis_from_descriptor(j.at("xi3")), mat_from_json(j.at("Jn"), "Jn"));
    return sol;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad solution file: ") + ex.what());
  }
}

}  // namespace khj
