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

// khj: Koopman eigenfunction HJ solver front end.
//
//   khj eigfun   --config run.json --out DIR
//   khj solve    --config run.json --out DIR [--states states.csv]
//   khj simulate --config run.json --out DIR [--solution DIR/solution.json]
//   khj converge --config run.json --out DIR
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "khj/config.hpp"
#include "khj/csv.hpp"

namespace fs = std::filesystem;
using namespace khj;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
};

class Report {
 public:
  void line(const std::string& s) { ss_ << s << '\n'; }
  void kv(const std::string& k, double v) { ss_ << k << ": " << fmt17(v) << '\n'; }
  void kv(const std::string& k, const std::string& v) { ss_ << k << ": " << v << '\n'; }
  void mat(const std::string& k, const Mat& m) {
    ss_ << k << ":\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      ss_ << " ";
      for (Eigen::Index j = 0; j < m.cols(); ++j) ss_ << ' ' << fmt17(m(i, j));
      ss_ << '\n';
    }
  }
  void write(const fs::path& p) const {
    std::ofstream o(p);
    if (!o) throw ConfigError("cannot write " + p.string());
    o << ss_.str();
  }

 private:
  std::ostringstream ss_;
};

RunConfig prepare(const Common& c, const char* command, Report& rep) {
  RunConfig cfg = load_config(c.config);
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (c.threads > 0) omp_set_num_threads(c.threads);
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out);
  const json resolved = resolved_config(cfg);
  std::ofstream(fs::path(c.out) / "resolved_config.json") << resolved.dump(2) << '\n';
  rep.kv("command", command);
  rep.line("resolved config:");
  rep.line(resolved.dump(2));
  return cfg;
}

std::vector<std::string> indexed(const std::string& stem, int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

int cmd_eigfun(const Common& c) {
  Report rep;
  RunConfig cfg = prepare(c, "eigfun", rep);
  const ControlAffineSystem sys = build_system(cfg.system);
  EigenfunctionSet eig = build_eigenfunctions(cfg, sys);
  const int n = sys.n;
  if (!eig.has_basis()) {
    const SampleSet check = sample_domain(cfg.domain, std::max<Eigen::Index>(cfg.samples / 5, 1),
                                          derive_seed(cfg.seed, 1));
    for (size_t b = 0; b < eig.block_start.size(); ++b)
      eig.residual_rms.push_back(
          eigen_residual_rms(eig, sys.f, check, eig.block_start[b], eig.block_size[b]));
  }
  const int M = eig.has_basis() ? eig.basis->size() : 0;
  CsvWriter csv((fs::path(c.out) / "eigenfunctions.csv").string());
  std::vector<std::string> head{"block", "row", "lambda_re", "lambda_im"};
  head = concat(head, indexed("w_", n));
  head = concat(head, indexed("theta_", M));
  head.push_back("residual_rms");
  head.push_back("cond_J");
  csv.header(head);
  double worst = 0.0;
  for (size_t b = 0; b < eig.block_start.size(); ++b) {
    const int r0 = eig.block_start[b], k = eig.block_size[b];
    const double re = eig.Lambda(r0, r0);
    const double im = k == 2 ? eig.Lambda(r0 + 1, r0) : 0.0;
    for (int i = 0; i < k; ++i) {
      csv.cell(static_cast<int>(b)).cell(r0 + i).cell(re).cell(i == 0 ? im : -im);
      csv.cells(eig.Vt.row(r0 + i).transpose());
      if (M) csv.cells(eig.Theta.row(r0 + i).transpose());
      csv.cell(eig.residual_rms[b]);
      if (eig.cond_J.empty())
        csv.cell(std::string());
      else
        csv.cell(eig.cond_J[b]);
      csv.end_row();
    }
    worst = std::max(worst, eig.residual_rms[b]);
    rep.kv("block " + std::to_string(b) + " residual_rms", eig.residual_rms[b]);
    if (!eig.cond_J.empty()) rep.kv("block " + std::to_string(b) + " cond_J", eig.cond_J[b]);
  }
  if (eig.has_basis()) {
    CsvWriter ex((fs::path(c.out) / "basis_exponents.csv").string());
    ex.header(concat({"index"}, indexed("e_", n)));
    for (int j = 0; j < M; ++j) {
      ex.cell(j);
      for (int e : eig.basis->exponents()[j]) ex.cell(e);
      ex.end_row();
    }
  }
  rep.mat("Lambda", eig.Lambda);
  rep.mat("Vt", eig.Vt);
  rep.kv("max residual_rms", worst);
  rep.write(fs::path(c.out) / "report.txt");
  std::printf("eigfun: %zu blocks, max held-out residual RMS %.3e\n", eig.block_start.size(),
              worst);
  return 0;
}

struct Evaluator {
  std::function<double(const Vec&)> value;  // may be empty
  VecField grad;
  Controller control;
};

void write_eval(const std::string& path, const ControlAffineSystem& sys, const Evaluator& ev,
                const std::vector<Vec>& pts, int& failures) {
  CsvWriter csv(path);
  csv.header(concat(concat(indexed("x_", sys.n), {"V"}), indexed("u_", sys.p)));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Vec& x : pts) {
    csv.cells(x);
    try {
      csv.cell(ev.value ? ev.value(x) : nan);
      csv.cells(ev.control(x));
    } catch (const NumericalError&) {
      ++failures;
      for (int i = 0; i < sys.p; ++i) csv.cell(nan);
    }
    csv.end_row();
  }
}

int cmd_solve(const Common& c, const std::string& states) {
  Report rep;
  RunConfig cfg = prepare(c, "solve", rep);
  const ControlAffineSystem sys = build_system(cfg.system);
  const Linearization lin = linearize(sys);
  const LQRGain lqr = lqr_controller(lin);
  json sol_json;
  Evaluator ev;
  std::shared_ptr<HJSolution1> s1;
  std::shared_ptr<HJSolution2> s2;
  if (cfg.procedure == 1) {
    s1 = std::make_shared<HJSolution1>(procedure1_solve(sys, build_eigenfunctions(cfg, sys)));
    sol_json = solution_to_json(*s1);
    ev.value = [s1](const Vec& x) { return s1->value(x); };
    ev.grad = [s1](const Vec& x) { return s1->grad_value(x); };
    ev.control = [s1](const Vec& x) { return s1->control(x); };
    rep.mat("Lambda", s1->eig().Lambda);
    rep.mat("R1", s1->R1());
    rep.mat("Q1", s1->Q1());
    rep.mat("L", s1->L());
    rep.kv("riccati_residual", s1->riccati_residual());
    rep.mat("P_embedded (Vt' L Vt)", s1->eig().Vt.transpose() * s1->L() * s1->eig().Vt);
  } else {
    Procedure2Options opt;
    opt.d1 = cfg.d1;
    opt.d2 = cfg.d2;
    opt.d3 = cfg.d3;
    opt.L = cfg.samples;
    opt.seed = cfg.seed;
    opt.p_scale = cfg.p_scale;
    opt.L_fit = cfg.fit_samples;
    opt.use_psd = cfg.psd;
    opt.fit_value = cfg.fit_value;
    Procedure2Result res = procedure2_solve(sys, cfg.domain, opt);
    s2 = std::make_shared<HJSolution2>(res.solution);
    sol_json = solution_to_json(*s2, res.fit);
    if (s2->has_value()) ev.value = [s2](const Vec& x) { return s2->value(x); };
    ev.grad = [s2](const Vec& x) { return s2->p_star(x); };
    ev.control = [s2](const Vec& x) { return s2->control(x); };
    rep.mat("Wu_t", s2->eigs().Wu_t);
    rep.mat("Lambda_u", s2->eigs().Lambda_u);
    for (size_t b = 0; b < s2->eigs().residual_rms.size(); ++b)
      rep.kv("block " + std::to_string(b) + " residual_rms", s2->eigs().residual_rms[b]);
    rep.mat("Jl", s2->Jl());
    rep.kv("Jl_asymmetry", s2->Jl_asymmetry());
    if (res.fit) {
      rep.mat("Jn", res.fit->Jn);
      rep.kv("fit_residual", res.fit->fit_residual);
      rep.kv("fit_residual_psd", res.fit->fit_residual_psd);
    }
  }
  rep.mat("P_lqr", lqr.P);
  rep.mat("K_lqr", lqr.K);
  {
    std::ofstream o(fs::path(c.out) / "solution.json");
    o << sol_json.dump(2) << '\n';
  }
  const Mat grid = uniform_grid(cfg.domain, cfg.grid_per_axis);
  std::vector<Vec> pts;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) pts.push_back(grid.row(i).transpose());
  int failures = 0;
  write_eval((fs::path(c.out) / "value_grid.csv").string(), sys, ev, pts, failures);
  {
    CsvWriter csv((fs::path(c.out) / "hj_residual.csv").string());
    csv.header(concat(indexed("x_", sys.n), {"residual"}));
    double worst = 0.0;
    for (const Vec& x : pts) {
      csv.cells(x);
      try {
        const double r = hj_residual(sys, ev.grad, x);
        worst = std::max(worst, std::abs(r));
        csv.cell(r);
      } catch (const NumericalError&) {
        csv.cell(std::numeric_limits<double>::quiet_NaN());
      }
      csv.end_row();
    }
    rep.kv("max |HJ residual| on grid", worst);
  }
  if (!states.empty()) {
    std::vector<Vec> st = read_csv_rows(states);
    for (const auto& x : st)
      if (x.size() != sys.n) throw ConfigError("state rows must have n entries");
    write_eval((fs::path(c.out) / "batch_eval.csv").string(), sys, ev, st, failures);
  }
  rep.kv("evaluation failures (G2 singular)", static_cast<double>(failures));
  rep.write(fs::path(c.out) / "report.txt");
  std::printf("solve: procedure %d done, results in %s\n", cfg.procedure, c.out.c_str());
  return 0;
}

int cmd_simulate(const Common& c, const std::string& solution) {
  Report rep;
  RunConfig cfg = prepare(c, "simulate", rep);
  const ControlAffineSystem sys = build_system(cfg.system);
  std::vector<NamedController> ctrls;
  for (const auto& name : cfg.simulate.controllers) {
    if (name == "lqr") {
      const LQRGain g = lqr_controller(linearize(sys));
      ctrls.push_back({"lqr", linear_feedback(g.K)});
      rep.mat("K_lqr", g.K);
    } else if (name == "zero") {
      const int p = sys.p;
      ctrls.push_back({"zero", [p](const Vec&) { return Vec(Vec::Zero(p)); }});
    } else if (cfg.procedure == 1) {
      std::shared_ptr<HJSolution1> s;
      if (!solution.empty()) {
        std::ifstream in(solution);
        if (!in) throw ConfigError("cannot open solution " + solution);
        json j;
        try {
          in >> j;
        } catch (const json::exception& e) {
          throw ConfigError(std::string("solution is not valid JSON: ") + e.what());
        }
        s = std::make_shared<HJSolution1>(solution1_from_json(j, sys));
      } else {
        s = std::make_shared<HJSolution1>(procedure1_solve(sys, build_eigenfunctions(cfg, sys)));
      }
      rep.mat("L", s->L());
      ctrls.push_back({"procedure1", [s](const Vec& x) { return s->control(x); }});
    } else {
      std::shared_ptr<HJSolution2> s;
      if (!solution.empty()) {
        std::ifstream in(solution);
        if (!in) throw ConfigError("cannot open solution " + solution);
        json j;
        try {
          in >> j;
        } catch (const json::exception& e) {
          throw ConfigError(std::string("solution is not valid JSON: ") + e.what());
        }
        s = std::make_shared<HJSolution2>(solution2_from_json(j, sys));
      } else {
        Procedure2Options opt;
        opt.d1 = cfg.d1;
        opt.d2 = cfg.d2;
        opt.d3 = cfg.d3;
        opt.L = cfg.samples;
        opt.seed = cfg.seed;
        opt.p_scale = cfg.p_scale;
        opt.fit_value = false;
        s = std::make_shared<HJSolution2>(procedure2_solve(sys, cfg.domain, opt).solution);
      }
      rep.mat("Jl", s->Jl());
      ctrls.push_back({"procedure2", [s](const Vec& x) { return s->control(x); }});
    }
  }
  for (const auto& g : cfg.simulate.linear_gains) ctrls.push_back({g.name, linear_feedback(g.K)});

  std::vector<Vec> ics = cfg.simulate.initial_conditions;
  if (ics.empty())
    ics = initial_condition_cloud(cfg.simulate.cloud_center, cfg.simulate.cloud_spread,
                                  cfg.simulate.cloud_count, cfg.simulate.cloud_seed);
  ComparisonReport table = compare_controllers(sys, ctrls, ics, cfg.dt, cfg.T);

  CsvWriter csv((fs::path(c.out) / "comparison.csv").string());
  csv.header(concat(concat({"controller", "ic"}, indexed("x0_", sys.n)),
                    {"converged", "diverged", "cost", "max_norm", "final_norm", "failure_time",
                     "diagnostic"}));
  if (cfg.simulate.write_trajectories) fs::create_directories(fs::path(c.out) / "trajectories");
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const ComparisonRow& row = table.rows[r];
    csv.cell(row.controller).cell(row.ic).cells(row.x0);
    csv.cell(row.converged ? 1 : 0).cell(row.diverged ? 1 : 0).cell(row.cost);
    csv.cell(row.max_norm).cell(row.final_norm).cell(row.failure_time).cell(row.diagnostic);
    csv.end_row();
    if (cfg.simulate.write_trajectories) {
      const Trajectory& tr = table.trajectories[r];
      CsvWriter t((fs::path(c.out) / "trajectories" /
                   (row.controller + "_ic" + std::to_string(row.ic) + ".csv"))
                      .string());
      t.header(concat(concat({"t"}, indexed("x_", sys.n)),
                      concat(indexed("u_", sys.p), {"cumulative_cost"})));
      for (Eigen::Index k = 0; k < tr.states.rows(); ++k) {
        t.cell(tr.times[k]).cells(tr.states.row(k).transpose());
        t.cells(tr.inputs.row(k).transpose()).cell(tr.cumulative_cost[k]);
        t.end_row();
      }
    }
  }
  for (const auto& ctl : ctrls) {
    int conv = 0, total = 0;
    for (const auto& row : table.rows)
      if (row.controller == ctl.name) {
        ++total;
        conv += row.converged;
      }
    rep.kv(ctl.name + " converged", std::to_string(conv) + "/" + std::to_string(total));
    std::printf("simulate: %s converged on %d/%d initial conditions\n", ctl.name.c_str(), conv,
                total);
  }
  rep.write(fs::path(c.out) / "report.txt");
  return 0;
}

int cmd_converge(const Common& c) {
  Report rep;
  RunConfig cfg = prepare(c, "converge", rep);
  const ControlAffineSystem sys = build_system(cfg.system);
  const MonomialBasis basis = monomial_basis(sys.n, 2, cfg.degree);
  ConvergenceOptions opt;
  opt.L_list = cfg.converge.L_list;
  opt.trials = cfg.converge.trials;
  opt.seed = cfg.seed;
  opt.block = cfg.converge.block;
  opt.eval_per_axis = cfg.converge.eval_per_axis;
  ConvergenceTable table = convergence_study(sys.f, linearize(sys).A, basis, cfg.domain, opt);
  {
    CsvWriter csv((fs::path(c.out) / "convergence.csv").string());
    csv.header({"L", "trial", "error"});
    for (const auto& r : table.rows) csv.cell(static_cast<long long>(r.L)).cell(r.trial).cell(r.error).end_row();
  }
  {
    CsvWriter csv((fs::path(c.out) / "convergence_summary.csv").string());
    csv.header({"L", "mean", "q25", "median", "q75"});
    for (const auto& s : table.summary)
      csv.cell(static_cast<long long>(s.L)).cell(s.mean).cell(s.q25).cell(s.median).cell(s.q75).end_row();
  }
  bool monotone = true;
  for (size_t i = 1; i < table.summary.size(); ++i)
    monotone = monotone && table.summary[i].median < table.summary[i - 1].median;
  rep.kv("reference quadrature points", static_cast<double>(table.reference_points));
  rep.kv("slope (log median error vs log L)", table.slope_median);
  rep.kv("slope (log mean error vs log L)", table.slope_mean);
  rep.kv("medians strictly decreasing", monotone ? "yes" : "no");
  rep.write(fs::path(c.out) / "report.txt");
  std::printf("converge: median slope %.3f, mean slope %.3f\n", table.slope_median,
              table.slope_mean);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman eigenfunction Hamilton-Jacobi solver"};
  app.require_subcommand(1);
  Common common;
  std::string states, solution;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "run configuration (JSON)")->required();
    sub->add_option("--out", common.out, "output directory")->required();
    sub->add_option("--seed", common.seed, "override the config seed");
    sub->add_option("--threads", common.threads, "OpenMP threads (results do not depend on it)");
  };
  CLI::App* eigfun = app.add_subcommand("eigfun", "principal eigenfunctions by Galerkin projection");
  CLI::App* solve = app.add_subcommand("solve", "HJ solution by procedure 1 or 2");
  CLI::App* simulate = app.add_subcommand("simulate", "closed-loop rollouts against LQR");
  CLI::App* converge = app.add_subcommand("converge", "eigenfunction error vs sample count");
  for (auto* s : {eigfun, solve, simulate, converge}) add_common(s);
  solve->add_option("--states", states, "CSV of states to evaluate V and u at");
  simulate->add_option("--solution", solution, "saved solution.json to use as the controller");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (*eigfun) return cmd_eigfun(common);
    if (*solve) return cmd_solve(common, states);
    if (*simulate) return cmd_simulate(common, solution);
    if (*converge) return cmd_converge(common);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
