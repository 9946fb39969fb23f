#include "cli.hpp"

#include <phinv/auxsolve.hpp>
#include <phinv/oracle.hpp>
#include <phinv/states.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace phinv::cli {

namespace {

using Timings = std::vector<std::pair<std::string, double>>;

template <class F>
auto stage(const std::string& name, Timings* timings, F&& f) {
  auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    if (timings) {
      std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
      timings->emplace_back(name, d.count());
    }
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

bool uses_table(const Scenario& s) {
  return s.omega.kind == CoefficientFunction::Kind::table ||
         s.lambda.kind == CoefficientFunction::Kind::table;
}

// Times at which finite-difference checks run; tables cannot be sampled past their ends.
std::vector<double> sweep_times(const Scenario& s, double margin, bool include_t0) {
  std::vector<double> ts;
  for (int i = include_t0 ? 0 : 1; i <= 10; ++i) {
    double t = s.t0 + 0.1 * i * (s.t1 - s.t0);
    if (uses_table(s)) t = std::clamp(t, s.t0 + margin, s.t1 - margin);
    ts.push_back(t);
  }
  return ts;
}

const std::map<std::string, double Tolerances::*>& tolerance_of() {
  static const std::map<std::string, double Tolerances::*> m = {
      {"ph_relation", &Tolerances::ph_relation},
      {"liouville", &Tolerances::liouville},
      {"liouville_hermitian", &Tolerances::liouville},
      {"similarity_invariant", &Tolerances::similarity},
      {"similarity_hermiticity", &Tolerances::similarity},
      {"rho_h_rho_inv", &Tolerances::rho_h_rho_inv},
      {"spectrum", &Tolerances::spectrum},
      {"tdse", &Tolerances::tdse},
      {"propagator", &Tolerances::propagator},
      {"eta_norm", &Tolerances::eta_norm},
      {"orthonormality", &Tolerances::orthonormality},
      {"phase_imag", &Tolerances::phase_imag},
      {"phase_overlap", &Tolerances::phase_overlap},
  };
  return m;
}

// Max residual per check, in order of first appearance.
std::vector<std::pair<std::string, double>> max_per_check(const std::vector<ResidualRecord>& recs) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : recs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.check; });
    double v = std::isfinite(r.residual) ? r.residual : INFINITY;
    if (it == out.end()) {
      out.emplace_back(r.check, v);
    } else {
      it->second = std::isnan(v) || v > it->second ? v : it->second;
    }
  }
  return out;
}

std::vector<Verdict> verdicts_for(const std::vector<ResidualRecord>& recs, const Tolerances& tol) {
  std::vector<Verdict> out;
  for (const auto& [check, residual] : max_per_check(recs)) {
    auto it = tolerance_of().find(check);
    if (it == tolerance_of().end()) continue;  // diagnostic only
    double t = tol.*(it->second);
    out.push_back({check, residual, t, std::isfinite(residual) && residual <= t});
  }
  return out;
}

void write_csv_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  body(os);
  write_file_atomic(path, os.str());
}

}  // namespace

// ---------------------------------------------------------------------------

bool RunReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json head;
  head["command"] = command;
  head["flip_lambda"] = flip_lambda;
  nlohmann::ordered_json tj = nlohmann::ordered_json::object();
  for (const auto& [name, secs] : timings) tj[name] = secs;
  head["timings_s"] = tj;
  j["header"] = head;
  j["passed"] = passed();
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    vs.push_back({{"check", v.check},
                  {"residual", v.residual},
                  {"tolerance", v.tolerance},
                  {"verdict", v.pass ? "PASS" : "FAIL"}});
  }
  j["verdicts"] = vs;
  j["scenario"] = scenario_text;
  return j.dump(2) + "\n";
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------

CheckSuite run_checks(const Scenario& s, bool flip_lambda, Timings* timings) {
  CheckSuite suite;
  auto& recs = suite.records;
  const Hamiltonian h = Hamiltonian::from(s, flip_lambda);

  AuxTrace aux = stage("auxsolve", timings, [&] { return solve_aux(s); });
  recs.push_back({"aux_residual_sigma", s.t1, 0, s.step(), 0, aux.residual_sigma, 0.0});
  recs.push_back({"aux_residual_alpha", s.t1, 0, s.step(), 0, aux.residual_alpha, 0.0});

  stage("operators", timings, [&] {
    FockModel fm(s, aux, h);
    const int D = fm.dim();
    const int B = fm.edge_band();
    const double dt = s.dt_fd;
    std::vector<cplx> first;
    for (double t : sweep_times(s, dt, true)) {
      CheckResidual ph = fm.check_ph_relation(t, dt);
      recs.push_back({"ph_relation", t, D, dt, B, ph.residual, ph.condition_eta});
      CheckResidual phe = fm.check_ph_relation_eta_form(t, dt);
      recs.push_back({"ph_relation_eta_form", t, D, dt, B, phe.residual, phe.condition_eta});
      CheckResidual st = fm.check_static_pseudo_hermiticity(t);
      recs.push_back({"static_pseudo_hermiticity", t, D, 0.0, B, st.residual, st.condition_eta});
      CheckResidual lv = fm.check_liouville(t, dt);
      recs.push_back({"liouville", t, D, dt, B, lv.residual, ph.condition_eta});
      CheckResidual lh = fm.check_liouville_hermitian(t, dt);
      recs.push_back({"liouville_hermitian", t, D, dt, B, lh.residual, ph.condition_eta});
      SimilarityResidual sim = fm.check_similarity(t, dt);
      recs.push_back({"similarity_invariant", t, D, dt, B, sim.invariant, sim.condition_eta});
      recs.push_back({"similarity_hermiticity", t, D, dt, B, sim.hermiticity, sim.condition_eta});
      recs.push_back({"rho_h_rho_inv", t, D, dt, B, sim.explicit_form, sim.condition_eta});
      SpectrumReport sp = fm.spectrum(t, std::max(1, D / 8));
      if (first.empty()) first = sp.ipH;
      double drift = 0.0;
      for (size_t k = 0; k < sp.ipH.size() && k < first.size(); ++k) {
        drift = std::max(drift, std::abs(sp.ipH[k] - first[k]));
      }
      double sres = std::max({sp.max_imag_ipH, sp.max_rel_dev, drift});
      recs.push_back({"spectrum", t, D, 0.0, B, sres, ph.condition_eta});
    }
  });

  const Grid grid = stage("grid", timings, [&] { return scenario_grid(s); });
  std::vector<PhaseTrace> phases;
  for (int n : s.quantum_n) phases.push_back(phase(n, s, aux));
  suite.eps_t1 = phases.front().eps.back();

  stage("states", timings, [&] {
    const int top = std::max(6, *std::max_element(s.quantum_n.begin(), s.quantum_n.end()));
    const size_t K = aux.size();
    for (int i = 1; i <= 10; ++i) {
      size_t k = std::min(K - 1, static_cast<size_t>(i) * (K - 1) / 10);
      double worst = 0.0;
      for (int a = 0; a <= top; ++a) {
        for (int b = 0; b <= top; ++b) {
          worst = std::max(worst, std::abs(eta_inner(a, b, s, aux, k, grid) - (a == b ? 1.0 : 0.0)));
        }
      }
      recs.push_back({"orthonormality", aux.t[k], grid.N, 0.0, 0, worst, 0.0});
    }
    const int stride = std::max(1, s.n_steps / 200);
    for (int n : s.quantum_n) {
      PhaseReality pr = check_phase_reality(n, s, aux, h, grid, stride);
      recs.push_back({"phase_imag", s.t1, grid.N, s.step(), 0, pr.max_imag, 0.0});
      recs.push_back({"phase_real", s.t1, grid.N, s.step(), 0, pr.max_real_dev, 0.0});
    }
    MeanValue mv = mean_H_eta(s.quantum_n.front(), s, aux, K - 1, h, grid);
    suite.mean_H_eta_t1 = mv.quadrature;
    double rel = std::abs(mv.quadrature - mv.closed_form) / std::max(1e-300, std::abs(mv.closed_form));
    recs.push_back({"mean_value_closed_form", s.t1, grid.N, 0.0, 0, rel, 0.0});
  });

  stage("oracle", timings, [&] {
    for (size_t i = 0; i < s.quantum_n.size(); ++i) {
      const int n = s.quantum_n[i];
      const PhaseTrace& ph = phases[i];
      for (double t : sweep_times(s, s.dt_fd, false)) {
        double r = tdse_residual(n, s, aux, ph, h, t, s.dt_fd, grid);
        recs.push_back({"tdse", t, grid.N, s.dt_fd, 0, r, 0.0});
      }
      WaveSample psi0 = solution_Phi(n, s, aux, ph, 0, grid);
      const long steps = std::max(1L, std::lround((s.t1 - s.t0) / s.dt_prop));
      const int save_every = static_cast<int>(std::max(1L, steps / 10));
      Trajectory tr = propagate(psi0, s, h, s.t0, s.t1, s.dt_prop, save_every, &aux);
      WaveSample exact = solution_Phi(n, s, aux, ph, aux.size() - 1, grid);
      recs.push_back({"propagator", s.t1, grid.N, s.dt_prop, 0,
                      l2_distance(tr.states.back(), exact), 0.0});
      for (size_t k = 0; k < tr.times.size(); ++k) {
        double t = tr.times[k];
        double drift = std::abs(tr.eta_norm[k] - tr.eta_norm[0]) / tr.eta_norm[0];
        recs.push_back({"eta_norm", t, grid.N, s.dt_prop, 0, drift, 0.0});
        recs.push_back({"plain_norm_drift", t, grid.N, s.dt_prop, 0,
                        std::abs(tr.plain_norm[k] - tr.plain_norm[0]), 0.0});
        double extracted = overlap_phase(n, s, aux_at(s, aux, t), tr.states[k]);
        recs.push_back({"phase_overlap", t, grid.N, s.dt_prop, 0,
                        std::abs(angle_diff(extracted, phase_at(s, aux, ph, t))), 0.0});
      }
    }
  });

  suite.verdicts = verdicts_for(recs, s.tol);
  return suite;
}

RunReport cmd_verify(const Scenario& s, const fs::path& out_dir, bool flip_lambda) {
  RunReport rep;
  rep.command = "verify";
  rep.scenario_text = serialize_scenario(s);
  rep.flip_lambda = flip_lambda;
  CheckSuite suite = run_checks(s, flip_lambda, &rep.timings);
  rep.records = std::move(suite.records);
  rep.verdicts = std::move(suite.verdicts);
  stage("write", &rep.timings, [&] {
    write_file_atomic(out_dir / "residuals.json", residual_report_json(rep.records));
  });
  write_file_atomic(out_dir / "run_report.json", rep.to_json());
  return rep;
}

RunReport cmd_solve(const Scenario& s, const fs::path& out_dir, bool flip_lambda) {
  RunReport rep;
  rep.command = "solve";
  rep.scenario_text = serialize_scenario(s);
  rep.flip_lambda = flip_lambda;
  Timings* tm = &rep.timings;
  const Hamiltonian h = Hamiltonian::from(s, flip_lambda);

  AuxTrace aux = stage("auxsolve", tm, [&] { return solve_aux(s); });
  write_csv_file(out_dir / "aux.csv", [&](std::ostream& os) { write_aux_csv(os, aux); });
  const Grid grid = stage("grid", tm, [&] { return scenario_grid(s); });

  std::vector<double> save_t = s.save_t.empty() ? std::vector<double>{s.t0, s.t1} : s.save_t;
  const size_t K = aux.size();
  const size_t stride = std::max<size_t>(1, (K - 1 + 99) / 100);

  for (int n : s.quantum_n) {
    const std::string tag = "n" + std::to_string(n);
    PhaseTrace ph = stage("phase", tm, [&] { return phase(n, s, aux); });
    write_csv_file(out_dir / ("phase_" + tag + ".csv"), [&](std::ostream& os) { write_phase_csv(os, ph); });

    stage("states", tm, [&] {
      for (double t : save_t) {
        WaveSample w = solution_Phi_at(n, s, aux, ph, t, grid);
        write_csv_file(out_dir / ("wave_" + tag + "_t" + fmt_short(t) + ".csv"),
                       [&](std::ostream& os) { write_wave_csv(os, w); });
      }
      std::ostringstream os;
      os << "t,eps_n,mean_H_eta,eta_norm\n";
      for (size_t k = 0; k < K; ++k) {
        if (k % stride != 0 && k + 1 != K) continue;
        MeanValue mv = mean_H_eta(n, s, aux, k, h, grid);
        WaveSample phi = solution_Phi(n, s, aux, ph, k, grid);
        EtaNorm en = eta_norm(phi, s, aux.at(k));
        os << fmt17(aux.t[k]) << ',' << fmt17(ph.eps[k]) << ',' << fmt17(mv.quadrature) << ','
           << fmt17(en.value) << '\n';
      }
      write_file_atomic(out_dir / ("observables_" + tag + ".csv"), os.str());
    });

    stage("propagate", tm, [&] {
      WaveSample psi0 = solution_Phi(n, s, aux, ph, 0, grid);
      const long steps = std::max(1L, std::lround((s.t1 - s.t0) / s.dt_prop));
      const int save_every = static_cast<int>(std::max(1L, steps / 10));
      Trajectory tr = propagate(psi0, s, h, s.t0, s.t1, s.dt_prop, save_every, &aux);
      fs::path dir = out_dir / ("trajectory_" + tag);
      fs::create_directories(dir);
      std::ostringstream os;
      os << "t,plain_norm,eta_norm\n";
      for (size_t k = 0; k < tr.times.size(); ++k) {
        os << fmt17(tr.times[k]) << ',' << fmt17(tr.plain_norm[k]) << ',' << fmt17(tr.eta_norm[k])
           << '\n';
        write_csv_file(dir / ("state_t" + fmt_short(tr.times[k]) + ".csv"),
                       [&](std::ostream& o) { write_wave_csv(o, tr.states[k]); });
      }
      write_file_atomic(dir / "norms.csv", os.str());
    });
  }
  write_file_atomic(out_dir / "run_report.json", rep.to_json());
  return rep;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> p = {"a", "omega0", "n", "dt", "N", "fock_dim"};
  return p;
}

Scenario with_parameter(const Scenario& base, const std::string& param, double value) {
  using Kind = CoefficientFunction::Kind;
  Scenario s = base;
  auto as_int = [&](double v) {
    if (v != std::floor(v)) throw ValidationError(param + " needs integer values");
    return static_cast<int>(v);
  };
  if (param == "a") {
    if (s.lambda.kind != Kind::linear && s.lambda.kind != Kind::constant) {
      throw ValidationError("sweeping a needs lambda = linear(a)");
    }
    s.lambda = CoefficientFunction::linear(value);
  } else if (param == "omega0") {
    if (s.omega.kind == Kind::constant) {
      s.omega = CoefficientFunction::constant(value);
    } else if (s.omega.kind == Kind::sin_mod) {
      s.omega.p0 = value;
    } else {
      throw ValidationError("sweeping omega0 needs omega = const or sin_mod");
    }
  } else if (param == "n") {
    s.quantum_n = {as_int(value)};
  } else if (param == "dt") {
    s.dt_fd = value;
    s.dt_prop = value;
  } else if (param == "N") {
    s.grid_N = as_int(value);
  } else if (param == "fock_dim") {
    s.fock_dim = as_int(value);
  } else {
    throw ValidationError("unknown sweep parameter '" + param + "'");
  }
  validate(s);
  return s;
}

RunReport cmd_sweep(const Scenario& s, const std::string& param, const std::vector<double>& values,
                    const fs::path& out_dir, bool flip_lambda, int workers) {
  RunReport rep;
  rep.command = "sweep";
  rep.scenario_text = serialize_scenario(s);
  rep.flip_lambda = flip_lambda;

  std::vector<Scenario> points;
  for (double v : values) points.push_back(with_parameter(s, param, v));

  std::vector<CheckSuite> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<size_t> next{0};
  auto start = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> pool;
    const size_t nthreads = std::clamp<size_t>(static_cast<size_t>(workers), 1, points.size());
    for (size_t w = 0; w < nthreads; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < points.size(); i = next++) {
          try {
            results[i] = run_checks(points[i], flip_lambda);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
  rep.timings.emplace_back("sweep", d.count());
  for (size_t i = 0; i < points.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw StageError("sweep " + param + "=" + fmt_short(values[i]), e.what());
    }
  }

  std::ostringstream csv;
  csv << "param,value,check,residual\n";
  for (size_t i = 0; i < points.size(); ++i) {
    const std::string v = fmt17(values[i]);
    for (const auto& [check, residual] : max_per_check(results[i].records)) {
      csv << param << ',' << v << ',' << check << ',' << fmt17(residual) << '\n';
    }
    csv << param << ',' << v << ",eps_t1," << fmt17(results[i].eps_t1) << '\n';
    csv << param << ',' << v << ",mean_H_eta_t1," << fmt17(results[i].mean_H_eta_t1) << '\n';
    for (Verdict vd : results[i].verdicts) {
      vd.check = param + "=" + fmt_short(values[i]) + ":" + vd.check;
      rep.verdicts.push_back(std::move(vd));
    }
  }
  write_file_atomic(out_dir / "sweep.csv", csv.str());
  write_file_atomic(out_dir / "run_report.json", rep.to_json());
  return rep;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Pseudo-Hermitian invariant solver and verification harness", "phinv"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out;
    int workers = 0;
    bool flip = false;
  } opt;
  std::string param;
  std::vector<double> values;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory")->required();
    sub->add_option("--workers", opt.workers, "Worker threads (default: config value)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--flip-lambda", opt.flip, "Negate lambda in the Hamiltonian under test");
  };
  CLI::App* solve = app.add_subcommand("solve", "Solve auxiliaries and write states, phases and observables");
  CLI::App* verify = app.add_subcommand("verify", "Run every operator and propagation check");
  CLI::App* sweep = app.add_subcommand("sweep", "Repeat the checks over a parameter list");
  add_common(solve);
  add_common(verify);
  add_common(sweep);
  sweep->add_option("--param", param, "Parameter to vary")->required()->check(CLI::IsMember(sweep_parameters()));
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Scenario s;
  try {
    s = load_scenario(opt.config);
    if (opt.workers > 0) s.workers = opt.workers;
    fs::create_directories(opt.out);
  } catch (const std::exception& e) {
    std::cerr << "phinv: config error: " << e.what() << "\n";
    return 2;
  }

  RunReport rep;
  try {
    if (solve->parsed()) {
      rep = cmd_solve(s, opt.out, opt.flip);
    } else if (verify->parsed()) {
      rep = cmd_verify(s, opt.out, opt.flip);
    } else {
      rep = cmd_sweep(s, param, values, opt.out, opt.flip, s.workers);
    }
  } catch (const ValidationError& e) {
    // Raised outside any stage only for a bad sweep parameter/value combination.
    std::cerr << "phinv: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "phinv: " << e.what() << "\n";
    return 1;
  }

  for (const auto& v : rep.verdicts) {
    std::printf("%-4s %-28s residual %.3e  tolerance %.1e\n", v.pass ? "PASS" : "FAIL",
                v.check.c_str(), v.residual, v.tolerance);
  }
  std::printf("%s: %s\n", rep.command.c_str(), rep.passed() ? "PASS" : "FAIL");
  return rep.passed() ? 0 : 1;
}

}  // namespace phinv::cli
