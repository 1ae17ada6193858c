// qdlab command-line scenario runner.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure (health
// abort, integrator breakdown, or a failing check).
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdlab/checks.hpp"
#include "qdlab/csv.hpp"
#include "qdlab/error.hpp"
#include "qdlab/lindblad.hpp"
#include "qdlab/parallel.hpp"
#include "qdlab/sjcm.hpp"

namespace {

using namespace qdlab;

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

const std::vector<std::string> kSubcommands{"sjcm-evolve",         "sjcm-sweep",  "dephasing-evolve",
                                            "dephasing-amplitude", "pump-evolve", "check"};

// Flat JSON object -> "--key value" arguments. Booleans become bare flags.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw Error("config file '" + path + "' must hold a flat JSON object");
  std::vector<std::string> args;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") throw Error("config file cannot reference another config file");
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.insert(args.end(), {flag, value.get<std::string>()});
    } else if (value.is_number()) {
      args.insert(args.end(), {flag, format_double(value.get<double>())});
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!v.is_number()) throw Error("config key '" + key + "': arrays must hold numbers");
        joined += (joined.empty() ? "" : ",") + format_double(v.get<double>());
      }
      args.insert(args.end(), {flag, joined});
    } else {
      throw Error("config key '" + key + "' must be a number, string, boolean or number array");
    }
  }
  return args;
}

// Inserts config-file arguments right after the subcommand so explicit flags,
// which come later, take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  std::size_t at = 0;
  while (at < args.size() && std::find(kSubcommands.begin(), kSubcommands.end(), args[at]) == kSubcommands.end()) ++at;
  if (at == args.size()) throw Error("--config needs a subcommand");
  const auto extra = config_arguments(*path);
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at) + 1, extra.begin(), extra.end());
  return args;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw Error(what + ": empty list");
  return out;
}

// a:b:log|lin:n
std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) throw Error("grid '" + text + "' must look like a:b:log:n or a:b:lin:n");
  const double a = parse_list(parts[0], "grid start").front();
  const double b = parse_list(parts[1], "grid end").front();
  const double nd = parse_list(parts[3], "grid count").front();
  if (nd < 1 || nd != std::floor(nd)) throw Error("grid count must be a positive integer");
  const auto n = static_cast<int>(nd);
  const bool log = parts[2] == "log";
  if (!log && parts[2] != "lin") throw Error("grid spacing must be 'log' or 'lin'");
  if (log && !(a > 0.0 && b > 0.0)) throw Error("log grid needs positive end points");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(log ? std::exp(std::log(a) + u * (std::log(b) - std::log(a))) : a + u * (b - a));
  }
  return out;
}

struct IntegratorFlags {
  std::string method = "rk45";
  std::optional<double> dt;
  double rtol = 1e-9;
  double atol = 1e-12;
  std::optional<double> t1;
  std::optional<double> sample_every;

  void attach(CLI::App* app) {
    app->add_option("--method", method, "rk45 (adaptive) or rk4 (fixed step)")
        ->check(CLI::IsMember({"rk45", "rk4"}));
    app->add_option("--dt", dt, "fixed step size (default 0.001 pi / g)");
    app->add_option("--rtol", rtol, "adaptive relative tolerance");
    app->add_option("--atol", atol, "adaptive absolute tolerance");
    app->add_option("--t1", t1, "final time");
    app->add_option("--sample-every", sample_every, "output sampling interval");
  }

  IntegratorConfig build(double g, double default_t1, double default_sample) const {
    IntegratorConfig cfg;
    cfg.method = method == "rk4" ? Method::rk4_fixed : Method::rk45_adaptive;
    cfg.dt = dt.value_or(default_fixed_step(g));
    cfg.rtol = rtol;
    cfg.atol = atol;
    cfg.t1 = t1.value_or(default_t1);
    cfg.sample_every = sample_every.value_or(default_sample);
    cfg.validate();
    return cfg;
  }
};

void emit(const TimeSeries& series, const std::string& out) {
  if (out == "-") {
    write_csv(std::cout, series);
  } else {
    write_csv_file(out, series);
  }
}

// Writes a table whose first column is not time.
void emit_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                const std::string& out) {
  std::ostringstream text;
  for (std::size_t i = 0; i < header.size(); ++i) text << (i ? "," : "") << header[i];
  text << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) text << (i ? "," : "") << format_double(row[i]);
    text << "\n";
  }
  if (out == "-") {
    std::cout << text.str();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot open '" + out + "' for writing");
  f << text.str();
}

struct Common {
  double g = 0.5;
  std::string out = "-";

  void attach(CLI::App* app, const std::string& out_help = "output CSV path, '-' for stdout") {
    app->add_option("--g", g, "light-matter coupling (default 0.5, i.e. 2g = 1)");
    app->add_option("--out", out, out_help);
  }
};

struct SjcmFlags {
  std::optional<double> p1;
  std::string photons;
  std::optional<double> fe, fh, delta, O, C, I;
  std::optional<int> n_max;

  void attach(CLI::App* app) {
    app->add_option("--p1", p1, "probability of one photon (rest in vacuum)");
    app->add_option("--photons", photons, "photon distribution p0,p1,...");
    app->add_option("--fe", fe, "electron occupation");
    app->add_option("--fh", fh, "hole occupation");
    app->add_option("--delta", delta, "electron-hole correlation (default 0)");
    app->add_option("--O", O, "oscillation ability");
    app->add_option("--C", C, "charge (default 0)");
    app->add_option("--I", I, "inversion (default 0)");
    app->add_option("--n-max", n_max, "photon cutoff (default: largest occupied + 1)");
  }

  sjcm::QdInitSpec spec() const {
    sjcm::QdInitSpec s;
    if (!photons.empty()) {
      if (p1) throw Error("give either --p1 or --photons, not both");
      s.photon_dist = parse_list(photons, "--photons");
    } else if (p1) {
      s.photon_dist = {1.0 - *p1, *p1};
    } else {
      throw Error("a photon distribution is required (--p1 or --photons)");
    }
    const bool occ = fe || fh || delta;
    const bool oci = O || C || I;
    if (occ && oci) throw Error("give either --fe/--fh/--delta or --O/--C/--I, not both");
    if (occ) {
      if (!fe || !fh) throw Error("--fe and --fh are both required");
      s.qd = sjcm::Occupations{*fe, *fh, delta.value_or(0.0)};
    } else if (oci) {
      if (!O) throw Error("--O is required with --C/--I");
      s.qd = sjcm::OCI{*O, C.value_or(0.0), I.value_or(0.0)};
    } else {
      throw Error("a dot state is required (--fe/--fh[/--delta] or --O[/--C/--I])");
    }
    s.coefficients();
    return s;
  }
};

struct DephasingFlags {
  double Gamma = 0.3;
  double beta = 0.0;
  double P = 0.0;
  std::string variant = "config";
  int n_max = 2;
  std::string loss_matrix;
  bool force = false;

  void attach(CLI::App* app, bool pump) {
    app->add_option("--Gamma", Gamma, "p-exciton loss rate");
    app->add_option("--beta", beta, "s-exciton loss rate");
    if (pump) app->add_option("--P", P, "p-exciton pump rate");
    app->add_option("--variant", variant, "loss operators: config (configuration resolved) or sp (single particle)")
        ->check(CLI::IsMember({"config", "sp"}));
    app->add_option("--n-max", n_max, "photon cutoff");
    app->add_option("--loss-matrix", loss_matrix,
                    "p-shell rate matrix g11,g12,g21,g22 over {|G><Xp|, |Xs><XX|}; replaces --Gamma");
    app->add_flag("--force", force, "accept a rate matrix that is not positive semidefinite (warns)");
  }

  DephasingParams params(double g) const {
    DephasingParams p;
    p.g = g;
    p.Gamma = Gamma;
    p.beta = beta;
    p.P = P;
    p.variant = variant == "sp" ? Variant::single_particle : Variant::configuration;
    p.n_max = n_max;
    p.psd = force ? PsdPolicy::warn : PsdPolicy::reject;
    if (!loss_matrix.empty()) {
      const auto v = parse_list(loss_matrix, "--loss-matrix");
      if (v.size() != 4) throw Error("--loss-matrix needs four entries");
      Eigen::Matrix2d m;
      m << v[0], v[1], v[2], v[3];
      p.p_loss = m;
      if (const auto warning = build_dephasing_model(p).collapse.validate(p.psd)) {
        std::cerr << "warning: " << *warning << "\n";
      }
    }
    p.validate();
    return p;
  }
};

sjcm::Engine parse_engine(const std::string& s) {
  if (s == "exact") return sjcm::Engine::exact;
  if (s == "hf") return sjcm::Engine::hartree_fock;
  return sjcm::Engine::oracle;
}

std::string suffixed(const std::string& out, const std::string& tag) {
  if (out == "-") return "sjcm_" + tag + ".csv";
  const auto dot = out.rfind('.');
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos) return out + "_" + tag + ".csv";
  return out.substr(0, dot) + "_" + tag + out.substr(dot);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-dot cavity toolkit: hierarchy and density-matrix scenarios written as CSV"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.add_option("--config", config_path, "flat JSON file of flag values; explicit flags win");

  // sjcm-evolve
  auto* evolve = app.add_subcommand("sjcm-evolve", "time evolution of the semiconductor Jaynes-Cummings model");
  Common evolve_common;
  SjcmFlags evolve_sjcm;
  IntegratorFlags evolve_int;
  std::string mode = "exact";
  evolve_common.attach(evolve, "output CSV ('-' for stdout); with --mode both a prefix for <out>_exact / <out>_hf");
  evolve_sjcm.attach(evolve);
  evolve_int.attach(evolve);
  evolve->add_option("--mode", mode, "exact, hf, oracle or both (exact and hf)")
      ->check(CLI::IsMember({"exact", "hf", "oracle", "both"}));

  // sjcm-sweep
  auto* sweep = app.add_subcommand("sjcm-sweep", "g2max over the I = 0 triangle of (O, C)");
  Common sweep_common;
  IntegratorFlags sweep_int;
  double grid_step = 0.02;
  double periods = 20.0;
  std::string engine = "exact";
  std::optional<int> sweep_n_max;
  sweep_common.attach(sweep);
  sweep_int.attach(sweep);
  sweep->add_option("--grid-step", grid_step, "grid spacing in O and C (must divide 1)");
  sweep->add_option("--periods", periods, "horizon in Rabi periods pi/g");
  sweep->add_option("--engine", engine, "exact, hf or oracle")->check(CLI::IsMember({"exact", "hf", "oracle"}));
  sweep->add_option("--n-max", sweep_n_max, "photon cutoff");

  // dephasing-evolve
  auto* deph = app.add_subcommand("dephasing-evolve", "biexciton cascade with p-shell loss");
  Common deph_common;
  DephasingFlags deph_flags;
  IntegratorFlags deph_int;
  std::string deph_engine = "density";
  deph_common.attach(deph);
  deph_flags.attach(deph, true);
  deph_int.attach(deph);
  deph->add_option("--engine", deph_engine, "density (master equation) or matrix (first-photon-block equations)")
      ->check(CLI::IsMember({"density", "matrix"}));

  // dephasing-amplitude
  auto* amp = app.add_subcommand("dephasing-amplitude", "late-time Xs0 amplitude versus Gamma / 2g");
  Common amp_common;
  DephasingFlags amp_flags;
  IntegratorFlags amp_int;
  std::string amp_grid = "0.05:5:log:40";
  amp_common.attach(amp);
  amp_flags.attach(amp, false);
  amp_int.attach(amp);
  amp->add_option("--gamma-tilde-grid", amp_grid, "a:b:log|lin:n");

  // pump-evolve
  auto* pump = app.add_subcommand("pump-evolve", "pumped p-shell scenario");
  Common pump_common;
  DephasingFlags pump_flags;
  IntegratorFlags pump_int;
  std::optional<double> pump_t_min;
  pump_flags.P = 0.3;
  pump_common.attach(pump);
  pump_flags.attach(pump, true);
  pump_int.attach(pump);
  pump->add_option("--t-min", pump_t_min, "start of the amplitude window (default 10/Gamma + 50 periods)");

  // check
  auto* check = app.add_subcommand("check", "run the full cross-oracle suite and print a pass/fail table");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const unsigned threads = default_threads();
    if (*evolve) {
      const auto spec = evolve_sjcm.spec();
      sjcm::Params params{evolve_common.g, evolve_sjcm.n_max};
      params.validate();
      const double period = sjcm::rabi_period(params);
      const auto cfg = evolve_int.build(params.g, 20.0 * period, period / 200.0);
      if (mode == "both") {
        emit(sjcm::hierarchy_evolve(spec, params, sjcm::Closure::exact, cfg), suffixed(evolve_common.out, "exact"));
        emit(sjcm::hierarchy_evolve(spec, params, sjcm::Closure::hartree_fock, cfg),
             suffixed(evolve_common.out, "hf"));
      } else if (mode == "oracle") {
        emit(sjcm::oracle_evolve(spec, params, cfg).series, evolve_common.out);
      } else {
        const auto closure = mode == "hf" ? sjcm::Closure::hartree_fock : sjcm::Closure::exact;
        emit(sjcm::hierarchy_evolve(spec, params, closure, cfg), evolve_common.out);
      }
    } else if (*sweep) {
      sjcm::Params params{sweep_common.g, sweep_n_max};
      params.validate();
      const double period = sjcm::rabi_period(params);
      const auto cfg = sweep_int.build(params.g, periods * period, period / 200.0);
      const auto grid = sjcm::triangle_grid(grid_step);
      const auto rows = sjcm::sweep_g2max(grid, params, parse_engine(engine), cfg, cfg.t1, threads);
      std::vector<std::vector<double>> table;
      int failures = 0;
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          ++failures;
          std::cerr << "point O=" << r.O << " C=" << r.C << ": " << r.error << "\n";
        }
        table.push_back({r.O, r.C, r.delta, r.g2_max.value_or(std::nan(""))});
      }
      emit_table({"O", "C", "delta", "g2_max"}, table, sweep_common.out);
      if (failures > 0) return kNumerical;
    } else if (*deph) {
      const auto p = deph_flags.params(deph_common.g);
      const auto cfg = deph_int.build(p.g, 40.0, 0.05);
      if (deph_engine == "matrix") {
        emit(evolve_M(p, cfg), deph_common.out);
      } else {
        emit(evolve_dephasing(p, cfg).series, deph_common.out);
      }
    } else if (*amp) {
      auto base = amp_flags.params(amp_common.g);
      if (base.beta != 0.0) throw Error("dephasing-amplitude needs --beta 0");
      const auto grid = parse_grid(amp_grid);
      IntegratorConfig cfg = amp_int.build(base.g, 1.0, 0.01);
      const auto results = amplitude_sweep(grid, base, cfg, threads);
      std::vector<std::vector<double>> table;
      for (const auto& r : results) table.push_back({r.gamma_tilde, r.measured, r.formula});
      emit_table({"gamma_tilde", "measured", "formula"}, table, amp_common.out);
    } else if (*pump) {
      const auto p = pump_flags.params(pump_common.g);
      IntegratorConfig cfg = pump_int.build(p.g, 1.0, 0.01);
      const auto run = pumped_scenario(p, cfg, pump_t_min);
      emit(run.series, pump_common.out);
      std::cerr << "late amplitude of n_e_s: " << format_double(run.amplitude_n_e_s) << "\n";
    } else if (*check) {
      checks::Options opts;
      opts.threads = threads;
      opts.on_result = [](const checks::CheckResult& r) {
        std::cout << checks::format_table({r}) << std::flush;
      };
      const auto results = checks::run_all(opts);
      int failed = 0;
      for (const auto& r : results) failed += r.passed ? 0 : 1;
      std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " checks passed\n";
      return failed == 0 ? 0 : kNumerical;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return 0;
}
