// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface: one subcommand per figure/experiment, each emitting
// CSV data plus a JSON run manifest. Links the shared C API only.
//
// Exit codes: 0 success, 2 invalid arguments, 3 numerical failure,
// 4 tolerance failure in check commands.
#include "spcs/spcs.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sha256.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitBadArgs = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTolerance = 4;

struct CommandError {
  int code;
  std::string message;
};

void check(spcs_status s, const std::string &where) {
  if (s != SPCS_OK) {
    std::ostringstream msg;
    msg << where << ": " << spcs_status_str(s) << " (" << spcs_last_error() << ")";
    throw CommandError{s == SPCS_ERR_INVALID_ARGUMENT ? kExitBadArgs
                                                      : kExitNumerical,
                       msg.str()};
  }
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(const fs::path &path, const std::string &header) : path_(path) {
    out_.open(path);
    if (!out_) throw CommandError{kExitNumerical, "cannot open " + path.string()};
    out_ << header << "\n";
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ",";
      out_ << fmt17(v);
      first = false;
    }
    out_ << "\n";
  }
  void raw_row(const std::string &line) { out_ << line << "\n"; }
  void close() { out_.close(); }
  const fs::path &path() const { return path_; }

private:
  fs::path path_;
  std::ofstream out_;
};

struct RunContext {
  std::string command;
  fs::path out_dir = ".";
  uint64_t seed = 1;
  bool gnuplot = false;
  json params;
  std::vector<fs::path> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  fs::path file(const std::string &name) const { return out_dir / name; }

  void write_manifest() {
    const double dur =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    json m;
    m["command"] = command;
    m["params"] = params;
    m["seed"] = seed;
    m["version"] = spcs_version();
    m["duration_s"] = dur;
    m["outputs"] = json::array();
    for (const auto &p : outputs)
      m["outputs"].push_back(
          {{"path", p.filename().string()}, {"sha256", spcs_cli::sha256_file(p.string())}});
    std::ofstream out(file(command + ".manifest.json"));
    out << m.dump(2) << "\n";
  }
};

std::vector<double> parse_list(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

void write_gnuplot(RunContext &ctx, const std::string &script) {
  if (!ctx.gnuplot) return;
  const fs::path p = ctx.file(ctx.command + ".gp");
  std::ofstream out(p);
  out << script;
  ctx.outputs.push_back(p);
}

// ---- h-curve ---------------------------------------------------------------

int cmd_h_curve(RunContext &ctx, double alpha, int dim, std::vector<double> ds,
                double u_min, double u_max, int u_steps,
                const spcs_quad_cfg &cfg) {
  ctx.params = {{"alpha", alpha}, {"dim", dim}, {"D", ds},
                {"u_min", u_min}, {"u_max", u_max}, {"u_steps", u_steps}};
  CsvWriter csv(ctx.file("h_curve.csv"), "u,D,H,dH_du");
  for (double D : ds) {
    const spcs_params p{dim, alpha, D};
    for (double u : linspace(u_min, u_max, u_steps)) {
      double h = 0, dh = 0;
      check(spcs_eval_h(&p, u, &cfg, &h), "eval H");
      check(spcs_eval_dh_du(&p, u, &cfg, &dh), "eval dH/du");
      csv.row({u, D, h, dh});
    }
  }
  csv.close();
  ctx.outputs.push_back(csv.path());
  write_gnuplot(ctx,
                "set datafile separator ','\n"
                "set key autotitle columnheader\n"
                "set xlabel 'u'\nset ylabel 'H(u,D)'\n"
                "plot for [d in system(\"awk -F, 'NR>1{print $2}' h_curve.csv | sort -u\")] \\\n"
                "  'h_curve.csv' using 1:($2==d+0?$3:1/0) with lines title 'D='.d\n");
  ctx.write_manifest();
  return 0;
}

// ---- bifurcation -----------------------------------------------------------

int cmd_bifurcation(RunContext &ctx, std::vector<double> alphas, int dim,
                    double d_min, double d_max, double d_step, int threads,
                    const spcs_quad_cfg &cfg) {
  ctx.params = {{"alpha", alphas}, {"dim", dim}, {"d_min", d_min},
                {"d_max", d_max}, {"d_step", d_step}, {"threads", threads}};
  struct CurveOut {
    spcs_bifurcation *b = nullptr;
    spcs_status status = SPCS_OK;
  };
  std::vector<CurveOut> curves(alphas.size());
  // Curves are independent; warm starts run along D inside each curve.
  const unsigned nt = std::max(1, threads);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < alphas.size();
         i = next.fetch_add(1))
      curves[i].status = spcs_trace_bifurcation(alphas[i], dim, d_min, d_max,
                                                d_step, &cfg, &curves[i].b);
  };
  if (nt <= 1) {
    work();
  } else {
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto &t : pool) t.join();
  }

  CsvWriter csv(ctx.file("bifurcation.csv"), "alpha,D,u,dH_du_at_root");
  json dcs = json::array();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    check(curves[i].status, "trace bifurcation");
    for (int s = 0; s < spcs_bifurcation_size(curves[i].b); ++s) {
      double D = 0, u = 0, dh = 0;
      spcs_bifurcation_sample(curves[i].b, s, &D, &u, &dh);
      csv.row({alphas[i], D, u, dh});
    }
    dcs.push_back({{"alpha", alphas[i]},
                   {"d_critical", spcs_bifurcation_dc(curves[i].b)},
                   {"slope_at_zero", spcs_bifurcation_slope_at_zero(curves[i].b)}});
    spcs_bifurcation_free(curves[i].b);
  }
  csv.close();
  ctx.outputs.push_back(csv.path());
  ctx.params["results"] = dcs;
  write_gnuplot(ctx,
                "set datafile separator ','\n"
                "set xlabel 'D'\nset ylabel 'u(D)'\n"
                "plot for [a in system(\"awk -F, 'NR>1{print $1}' bifurcation.csv | sort -un\")] \\\n"
                "  'bifurcation.csv' using ($1==a+0?$2:1/0):3 with lines title 'alpha='.a\n");
  ctx.write_manifest();
  return 0;
}

// ---- phase diagram ----------------------------------------------------------

int cmd_phase_diagram(RunContext &ctx, double a_min, double a_max, int a_steps,
                      double d_min, double d_max, int d_steps, int dim,
                      int threads, const spcs_quad_cfg &cfg) {
  ctx.params = {{"alpha_min", a_min}, {"alpha_max", a_max}, {"alpha_steps", a_steps},
                {"d_min", d_min},     {"d_max", d_max},     {"d_steps", d_steps},
                {"dim", dim},         {"threads", threads}};
  const auto alphas = linspace(a_min, a_max, a_steps);
  const auto ds = linspace(d_min, d_max, d_steps);
  spcs_phase_diagram *pd = nullptr;
  check(spcs_phase_scan(alphas.data(), static_cast<int>(alphas.size()), ds.data(),
                        static_cast<int>(ds.size()), dim, &cfg, threads, &pd),
        "phase scan");

  CsvWriter grid(ctx.file("phase_grid.csv"), "alpha,D,n_states");
  int errors = 0;
  for (int i = 0; i < spcs_phase_grid_size(pd); ++i) {
    double a = 0, D = 0;
    int n = 0, status = 0;
    spcs_phase_grid_point(pd, i, &a, &D, &n, &status);
    if (status != SPCS_OK) {
      ++errors;
      grid.row({a, D, -1.0});
    } else {
      grid.row({a, D, static_cast<double>(n)});
    }
  }
  grid.close();
  ctx.outputs.push_back(grid.path());

  CsvWriter boundary(ctx.file("phase_boundary.csv"), "alpha,D_c");
  for (int i = 0; i < spcs_phase_boundary_size(pd); ++i) {
    double a = 0, dc = 0;
    spcs_phase_boundary_point(pd, i, &a, &dc);
    boundary.row({a, dc});
  }
  boundary.close();
  ctx.outputs.push_back(boundary.path());
  ctx.params["grid_errors"] = errors;
  spcs_phase_diagram_free(pd);
  write_gnuplot(ctx,
                "set datafile separator ','\n"
                "set xlabel 'D'\nset ylabel 'alpha'\n"
                "plot 'phase_grid.csv' using 2:($3==2?$1:1/0) with points pt 7 lc rgb 'red' title 'ordered+disordered', \\\n"
                "     'phase_grid.csv' using 2:($3==1?$1:1/0) with points pt 7 lc rgb 'blue' title 'disordered only', \\\n"
                "     'phase_boundary.csv' using 2:1 with lines lc rgb 'black' title 'D_c(alpha)'\n");
  ctx.write_manifest();
  return 0;
}

// ---- dc ----------------------------------------------------------------------

int cmd_dc(RunContext &ctx, double alpha, int dim, const spcs_quad_cfg &cfg) {
  ctx.params = {{"alpha", alpha}, {"dim", dim}};
  double dc = 0;
  check(spcs_critical_noise(alpha, dim, &cfg, &dc), "critical noise");
  CsvWriter csv(ctx.file("dc.csv"), "alpha,dim,D_c");
  csv.row({alpha, static_cast<double>(dim), dc});
  csv.close();
  ctx.outputs.push_back(csv.path());
  ctx.params["d_critical"] = dc;
  ctx.write_manifest();
  std::printf("D_c(alpha=%g, dim=%d) = %.12g\n", alpha, dim, dc);
  return 0;
}

// ---- simulate ----------------------------------------------------------------

int cmd_simulate(RunContext &ctx, const spcs_sim_config &cfg) {
  ctx.params = {{"dim", cfg.params.dim},
                {"alpha", cfg.params.alpha},
                {"noise", cfg.params.noise},
                {"n_particles", cfg.n_particles},
                {"dt", cfg.dt},
                {"t_end", cfg.t_end},
                {"n_runs", cfg.n_runs},
                {"record_every", cfg.record_every},
                {"init_kind", cfg.init_kind},
                {"init_mean", {cfg.init_mean[0], cfg.init_mean[1], cfg.init_mean[2]}},
                {"init_sigma", cfg.init_sigma},
                {"hist_bins", cfg.hist_bins},
                {"threads", cfg.threads}};
  ctx.seed = cfg.seed;

  spcs_trace *trace = nullptr;
  check(spcs_run_ensemble(&cfg, &trace), "run ensemble");

  const int dim = cfg.params.dim;
  const bool has_fe = spcs_trace_has_free_energy(trace) != 0;
  std::string header = "t";
  if (dim == 1) {
    header += ",mean_v";
  } else {
    for (int c = 0; c < dim; ++c) header += ",mean_v" + std::to_string(c + 1);
  }
  if (has_fe) header += ",free_energy";

  CsvWriter csv(ctx.file("trace.csv"), header);
  for (int i = 0; i < spcs_trace_snapshots(trace); ++i) {
    double t = 0, mv[3] = {0, 0, 0};
    spcs_trace_time(trace, i, &t);
    spcs_trace_mean_velocity(trace, i, mv);
    std::string line = fmt17(t);
    for (int c = 0; c < dim; ++c) line += "," + fmt17(mv[c]);
    if (has_fe) {
      double fe = 0;
      spcs_trace_free_energy(trace, i, &fe);
      line += "," + fmt17(fe);
    }
    csv.raw_row(line);
  }
  csv.close();
  ctx.outputs.push_back(csv.path());

  const int nb = spcs_trace_hist_bins(trace);
  std::vector<double> lo(nb), hi(nb), mass(nb);
  check(spcs_trace_histogram(trace, lo.data(), hi.data(), mass.data()),
        "trace histogram");
  CsvWriter hist(ctx.file("histogram.csv"), "bin_lo,bin_hi,mass");
  for (int b = 0; b < nb; ++b) hist.row({lo[b], hi[b], mass[b]});
  hist.close();
  ctx.outputs.push_back(hist.path());

  ctx.params["runs_completed"] = spcs_trace_runs_completed(trace);
  double term[3] = {0, 0, 0}, se1 = 0;
  spcs_trace_terminal(trace, term, &se1);
  ctx.params["terminal_mean_v1"] = term[0];
  ctx.params["terminal_se1"] = se1;
  spcs_trace_free(trace);

  write_gnuplot(ctx, "set datafile separator ','\n"
                     "set xlabel 't'\nset ylabel 'mean velocity'\n"
                     "plot 'trace.csv' using 1:2 with lines title 'mean_v'\n");
  ctx.write_manifest();
  return 0;
}

// ---- laplace-check -------------------------------------------------------------

int cmd_laplace_check(RunContext &ctx, double alpha, int dim,
                      const spcs_quad_cfg &cfg) {
  ctx.params = {{"alpha", alpha}, {"dim", dim}};
  bool ok = true;
  CsvWriter csv(ctx.file("laplace_check.csv"),
                "name,closed_form,quadrature,abs_diff,status");
  auto emit = [&](const std::string &name, double closed, double quad, double tol,
                  bool relative) {
    const double diff = std::abs(closed - quad);
    const double bound = relative ? tol * std::max(std::abs(closed), 1e-300) : tol;
    const bool pass = diff <= bound;
    ok = ok && pass;
    csv.raw_row(name + "," + fmt17(closed) + "," + fmt17(quad) + "," + fmt17(diff) +
                "," + (pass ? "pass" : "FAIL"));
  };

  // Appendix moment table: closed forms vs gaussian_moment, 1e-12 relative.
  double closed[7], assembled[7];
  int count = 0;
  check(spcs_moment_table(alpha, dim, closed, assembled, &count), "moment table");
  for (int i = 0; i < count; ++i)
    emit(spcs_moment_name(alpha, dim, i), closed[i], assembled[i], 1e-12, true);

  spcs_laplace_coeffs lc;
  check(spcs_laplace_coefficients(alpha, dim, &lc), "laplace coefficients");

  // Quadrature limits at D = 1e-3 against the closed-form limits.
  const spcs_params p{dim, alpha, 1e-3};
  double dh_du = 0, dh_dd = 0;
  check(spcs_eval_dh_du(&p, 1.0, &cfg, &dh_du), "dH/du at small D");
  check(spcs_eval_dh_dd(&p, 1.0, &cfg, &dh_dd), "dH/dD at small D");
  emit("dHdu_limit", lc.dh_du_limit, dh_du, 2e-2, false);
  emit("dHdD_limit", lc.dh_dd_limit, dh_dd, 3e-2, false);
  emit("dudD_slope", lc.bif_slope, -dh_dd / dh_du, 3e-2, false);

  // Expansion convergence order: residual slopes approximately 1; leading
  // coefficients against a Richardson extrapolation of the two smallest D.
  spcs_expansion_report rep;
  check(spcs_expansion_check(alpha, dim, 1.0, 4, &cfg, &rep), "expansion check");
  for (int k = 0; k < 3; ++k) {
    const int j1 = rep.n_points - 1, j2 = rep.n_points - 2;
    const double d1 = rep.noise[j1], d2 = rep.noise[j2];
    const double extrap = (d2 * rep.g[k][j1] - d1 * rep.g[k][j2]) / (d2 - d1);
    emit("coeff_c" + std::to_string(k), rep.coeff[k], extrap, 5e-3, true);
    emit("order_F" + std::to_string(k), 1.0, rep.slope[k], 0.1, false);
  }
  csv.close();
  ctx.outputs.push_back(csv.path());
  ctx.params["pass"] = ok;
  ctx.write_manifest();
  std::printf("laplace-check: %s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : kExitTolerance;
}

std::string find_preset(int argc, char **argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--preset" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--preset=", 0) == 0) return a.substr(9);
  }
  return "";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"spcs: stationary states and noise-driven phase transition of "
               "the noisy self-propelled Cucker-Smale model"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  std::string out_dir = ".";
  int threads = 0;
  bool gnuplot = false;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = auto)")
      ->capture_default_str();
  app.add_flag("--gnuplot", gnuplot, "also emit a gnuplot script");

  spcs_quad_cfg qcfg = spcs_quad_cfg_default();
  app.add_option("--rel-tol", qcfg.rel_tol, "quadrature relative tolerance")
      ->capture_default_str();

  double alpha = 2.0;
  int dim = 1;
  app.add_option("--alpha", alpha, "self-propulsion intensity")
      ->capture_default_str();
  app.add_option("--dim", dim, "velocity dimension")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();

  // h-curve
  auto *hc = app.add_subcommand("h-curve", "H(u,D) against u for several D");
  hc->fallthrough();
  std::string d_list = "0.1,0.25,0.5,1.0,2.0";
  double u_min = 0.0, u_max = 2.0;
  int u_steps = 81;
  hc->add_option("--d-list", d_list, "comma-separated D values")
      ->capture_default_str();
  hc->add_option("--u-min", u_min)->capture_default_str();
  hc->add_option("--u-max", u_max)->capture_default_str();
  hc->add_option("--u-steps", u_steps)->capture_default_str();

  // bifurcation
  auto *bf = app.add_subcommand("bifurcation", "roots u(D) with dH/du overlay");
  bf->fallthrough();
  std::string alpha_list = "2,4,6,8,10,12,14";
  double d_min = 1e-3, d_max = 2.0, d_step = 0.0;
  bf->add_option("--alpha-list", alpha_list, "comma-separated alpha values")
      ->capture_default_str();
  bf->add_option("--d-min", d_min)->capture_default_str();
  bf->add_option("--d-max", d_max)->capture_default_str();
  bf->add_option("--d-step", d_step, "initial continuation step (0 = auto)")
      ->capture_default_str();

  // phase-diagram
  auto *ph = app.add_subcommand("phase-diagram",
                                "alpha-D classification and critical boundary");
  ph->fallthrough();
  double a_min = 0.5, a_max = 10.0;
  int a_steps = 12, d_steps = 16;
  double pd_d_min = 0.05, pd_d_max = 1.0;
  ph->add_option("--alpha-min", a_min)->capture_default_str();
  ph->add_option("--alpha-max", a_max)->capture_default_str();
  ph->add_option("--alpha-steps", a_steps)->capture_default_str();
  ph->add_option("--d-min", pd_d_min)->capture_default_str();
  ph->add_option("--d-max", pd_d_max)->capture_default_str();
  ph->add_option("--d-steps", d_steps)->capture_default_str();

  // dc
  auto *dc = app.add_subcommand("dc", "critical noise D_c(alpha)");
  dc->fallthrough();

  // simulate
  auto *sim = app.add_subcommand("simulate", "Euler-Maruyama particle ensemble");
  sim->fallthrough();
  spcs_sim_config scfg = spcs_sim_config_default();
  const std::string preset = find_preset(argc, argv);
  if (preset == "stability") {
    scfg.n_particles = 10000;
    scfg.dt = 0.01;
    scfg.t_end = 6000;
    scfg.n_runs = 10;
    scfg.record_every = 100;
  } else if (preset == "histogram") {
    scfg.n_particles = 10000;
    scfg.dt = 0.01;
    scfg.t_end = 500;
    scfg.n_runs = 100;
    scfg.record_every = 100;
  } else if (preset == "free-energy") {
    scfg.n_particles = 10000;
    scfg.dt = 0.001;
    scfg.t_end = 25;
    scfg.n_runs = 100;
    scfg.record_every = 25;
  } else if (!preset.empty()) {
    std::fprintf(stderr, "unknown preset '%s' (stability, histogram, free-energy)\n",
                 preset.c_str());
    return kExitBadArgs;
  }
  std::string preset_opt;
  sim->add_option("--preset", preset_opt,
                  "experiment preset: stability, histogram, free-energy");
  double noise = 0.1;
  uint64_t seed = 1;
  sim->add_option("--noise", noise, "diffusion coefficient D")
      ->capture_default_str();
  sim->add_option("--particles", scfg.n_particles)->capture_default_str();
  sim->add_option("--dt", scfg.dt)->capture_default_str();
  sim->add_option("--t-end", scfg.t_end)->capture_default_str();
  sim->add_option("--runs", scfg.n_runs)->capture_default_str();
  sim->add_option("--seed", seed)->capture_default_str();
  sim->add_option("--record-every", scfg.record_every)->capture_default_str();
  sim->add_option("--init-mean", scfg.init_mean[0], "initial mean velocity (axis 1)")
      ->capture_default_str();
  sim->add_option("--init-sigma", scfg.init_sigma)->capture_default_str();
  sim->add_option("--hist-bins", scfg.hist_bins)->capture_default_str();

  // laplace-check
  auto *lp = app.add_subcommand("laplace-check",
                                "closed forms vs quadrature extrapolations");
  lp->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadArgs;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);

  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  ctx.gnuplot = gnuplot;

  try {
    if (*hc) {
      ctx.command = "h-curve";
      return cmd_h_curve(ctx, alpha, dim, parse_list(d_list), u_min, u_max,
                         u_steps, qcfg);
    }
    if (*bf) {
      ctx.command = "bifurcation";
      return cmd_bifurcation(ctx, parse_list(alpha_list), dim, d_min, d_max,
                             d_step, threads, qcfg);
    }
    if (*ph) {
      ctx.command = "phase-diagram";
      return cmd_phase_diagram(ctx, a_min, a_max, a_steps, pd_d_min, pd_d_max,
                               d_steps, dim, threads, qcfg);
    }
    if (*dc) {
      ctx.command = "dc";
      return cmd_dc(ctx, alpha, dim, qcfg);
    }
    if (*sim) {
      ctx.command = "simulate";
      scfg.params = {dim, alpha, noise};
      scfg.seed = seed;
      scfg.threads = threads;
      return cmd_simulate(ctx, scfg);
    }
    if (*lp) {
      ctx.command = "laplace-check";
      return cmd_laplace_check(ctx, alpha, dim, qcfg);
    }
  } catch (const CommandError &e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitBadArgs;
}
