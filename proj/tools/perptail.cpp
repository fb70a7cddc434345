// perptail: saddle-point tail asymptotics of Dickman-like perpetuities,
// with an exact delay-equation oracle and a Monte Carlo validator.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <openssl/evp.h>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perptail/acceptance.hpp"
#include "perptail/exactdens.hpp"
#include "perptail/expand.hpp"
#include "perptail/montecarlo.hpp"
#include "perptail/tailcalc.hpp"

namespace {

using nlohmann::ordered_json;
using namespace perptail;

constexpr const char* kVersion = "0.1.0";

std::string f17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

struct Output {
  std::string path;  // empty: stdout
  std::string subcommand;
  ordered_json params;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  // Writes the payload; a PATH.manifest.json sidecar records what produced it.
  void deliver(const std::string& payload) const {
    if (path.empty()) {
      std::cout << payload;
      return;
    }
    {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open output file " + path);
      out << payload;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json manifest;
    manifest["subcommand"] = subcommand;
    manifest["parameters"] = params;
    manifest["version"] = kVersion;
    manifest["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
    manifest["duration_seconds"] = seconds;
    manifest["outputs"] = ordered_json::array(
        {{{"path", path}, {"bytes", payload.size()}, {"sha256", sha256_hex(payload)}}});
    std::ofstream mout(path + ".manifest.json", std::ios::binary);
    mout << manifest.dump(2) << "\n";
  }
};

// "START:STOP:POINTS" with an optional ",log" suffix
std::vector<double> parse_grid(const std::string& text) {
  std::string spec = text;
  bool log_spaced = false;
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ",log") {
    log_spaced = true;
    spec = spec.substr(0, spec.size() - 4);
  }
  double start = 0, stop = 0;
  int points = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &stop, &points) != 3)
    throw CLI::ValidationError("--t-grid", "expected START:STOP:POINTS[,log]");
  return make_grid(start, stop, points, log_spaced);
}

struct CsvBuilder {
  std::ostringstream os;
  explicit CsvBuilder(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i)
      os << (i ? "," : "") << header[i];
    os << "\n";
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      os << (i ? "," : "") << f17(values[i]);
    os << "\n";
  }
  std::string str() const { return os.str(); }
};

std::string rows_to_json(const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json obj;
    for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
    arr.push_back(obj);
  }
  return arr.dump(2) + "\n";
}

std::string tabulate(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::string& format) {
  if (format == "json") return rows_to_json(header, rows);
  CsvBuilder csv(header);
  for (const auto& r : rows) csv.row(r);
  return csv.str();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Tail asymptotics of Dickman-like perpetuities"};
  app.require_subcommand(1);
  int exit_code = 0;

  if (const char* threads = std::getenv("PERP_THREADS")) {
#ifdef _OPENMP
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
#else
    (void)threads;
#endif
  }

  std::string law_spec = "pointmass:b=1";
  double alpha = 1.0;
  std::string grid_spec;
  double t_single = 0.0;
  std::string format = "csv";
  std::string output_path;

  auto add_common = [&](CLI::App* cmd, bool with_law = true) {
    cmd->add_option("--alpha", alpha, "beta parameter of M ~ Beta(alpha, 1)");
    if (with_law) cmd->add_option("--law", law_spec, "law of Q, e.g. twopoint:b=1,p=0.5,q0=-1");
    cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--output", output_path, "write to file (with manifest) instead of stdout");
  };

  // --- saddle ---
  auto* saddle_cmd = app.add_subcommand("saddle", "solve psi'_alpha(s) = t");
  add_common(saddle_cmd);
  saddle_cmd->add_option("--t", t_single, "single target t");
  saddle_cmd->add_option("--t-grid", grid_spec, "grid START:STOP:POINTS[,log]");
  saddle_cmd->callback([&] {
    const QLaw law = parse_law(law_spec);
    std::vector<double> ts =
        grid_spec.empty() ? std::vector<double>{t_single} : parse_grid(grid_spec);
    if (grid_spec.empty() && !(t_single > 0))
      throw CLI::ValidationError("--t", "provide --t or --t-grid");
    std::vector<std::vector<double>> rows;
    for (double t : ts) {
      const SaddlePoint sp = solve_saddle(alpha, law, t);
      rows.push_back({t, sp.s, sp.residual, static_cast<double>(sp.iterations)});
    }
    Output out{output_path, "saddle",
               {{"alpha", alpha}, {"law", law_spec}, {"t_grid", grid_spec}, {"t", t_single}},
               std::nullopt};
    out.deliver(tabulate({"t", "s", "residual", "iterations"}, rows, format));
  });

  // --- tail ---
  auto* tail_cmd = app.add_subcommand("tail", "Theorem-1 log-density and log-tail");
  bool with_legendre = false, with_debruijn = false;
  add_common(tail_cmd);
  tail_cmd->add_option("--t", t_single, "single target t");
  tail_cmd->add_option("--t-grid", grid_spec, "grid START:STOP:POINTS[,log]");
  tail_cmd->add_flag("--legendre", with_legendre, "append the Legendre exponent I(t)");
  tail_cmd->add_flag("--debruijn", with_debruijn, "append de Bruijn's log q_1(t)");
  tail_cmd->callback([&] {
    const QLaw law = parse_law(law_spec);
    std::vector<double> ts =
        grid_spec.empty() ? std::vector<double>{t_single} : parse_grid(grid_spec);
    if (grid_spec.empty() && !(t_single > 0))
      throw CLI::ValidationError("--t", "provide --t or --t-grid");
    const std::vector<TailEstimate> est = tail_grid(alpha, law, ts);
    std::vector<std::string> header = {"t", "s", "exponent", "log_density", "log_tail"};
    if (with_legendre) header.push_back("I");
    if (with_debruijn) header.push_back("debruijn");
    std::vector<std::vector<double>> rows;
    for (const TailEstimate& e : est) {
      std::vector<double> row = {e.t, e.saddle.s, e.exponent, e.log_density, e.log_tail};
      if (with_legendre) row.push_back(legendre_exponent(alpha, law, e.t));
      if (with_debruijn) row.push_back(debruijn_log_density(e.t));
      rows.push_back(std::move(row));
    }
    Output out{output_path, "tail",
               {{"alpha", alpha}, {"law", law_spec}, {"t_grid", grid_spec}, {"t", t_single},
                {"legendre", with_legendre}, {"debruijn", with_debruijn}},
               std::nullopt};
    out.deliver(tabulate(header, rows, format));
  });

  // --- expand ---
  auto* expand_cmd = app.add_subcommand("expand", "asymptotic expansions vs the solver");
  std::string which = "salpha";
  int n_terms = 8;
  std::string ex4_part = "s";
  add_common(expand_cmd);
  expand_cmd->add_option("--which", which, "salpha | k5 | k3 | verv | ex4")
      ->check(CLI::IsMember({"salpha", "k5", "k3", "verv", "ex4"}));
  expand_cmd->add_option("--terms", n_terms, "series terms for --which salpha");
  expand_cmd->add_option("--ex4-part", ex4_part, "s or logdens for --which ex4")
      ->check(CLI::IsMember({"s", "logdens"}));
  expand_cmd->add_option("--t-grid", grid_spec, "grid START:STOP:POINTS[,log]")->required();
  expand_cmd->callback([&] {
    const QLaw law = parse_law(law_spec);
    const std::vector<double> ts = parse_grid(grid_spec);
    std::vector<std::vector<double>> rows;
    for (double t : ts) {
      double expansion = 0.0, reference = 0.0;
      if (which == "verv") {
        if (law.kind != QKind::point_mass || law.b != 1.0)
          throw CLI::ValidationError("--law", "verv expansion is the Q=1, b=1 case");
        expansion = verv_expansion(alpha, t);
        reference = tail_estimate(alpha, law, t + 1.0).log_density;
      } else if (which == "ex4") {
        if (law.kind != QKind::gamma_shift)
          throw CLI::ValidationError("--law", "ex4 expansions require a gammashift law");
        const Example4Expansion ex = example4_expansions(alpha, law.b, law.theta, law.lambda, t);
        if (ex4_part == "s") {
          expansion = ex.s_expansion;
          reference = solve_saddle(alpha, law, t).s;
        } else {
          expansion = ex.logdensity_expansion;
          reference = tail_estimate(alpha, law, t).log_density;
        }
      } else {
        double b = law.b, p = 1.0;
        if (law.kind == QKind::two_point)
          p = law.p;
        else if (law.kind != QKind::point_mass)
          throw CLI::ValidationError("--law", "Example-3 expansions require pointmass or twopoint");
        if (which == "salpha")
          expansion = salpha_series(alpha, b, p, t, n_terms).value;
        else if (which == "k5")
          expansion = salpha_expansion_k5(alpha, b, p, t);
        else
          expansion = logdensity_expansion_k3(alpha, b, p, t);
        reference = which == "k3" ? tail_estimate(alpha, law, t).log_density
                                  : solve_saddle(alpha, law, t).s;
      }
      rows.push_back({t, expansion, reference, std::fabs(expansion - reference)});
    }
    Output out{output_path, "expand",
               {{"alpha", alpha}, {"law", law_spec}, {"which", which}, {"terms", n_terms},
                {"ex4_part", ex4_part}, {"t_grid", grid_spec}},
               std::nullopt};
    out.deliver(tabulate({"t", "expansion", "solver_reference", "abs_error"}, rows, format));
  });

  // --- dens ---
  auto* dens_cmd = app.add_subcommand("dens", "exact generalized-Dickman density grid (Q = b)");
  double dens_b = 1.0, dens_tmax = 205.0;
  int dens_steps = 2048;
  std::string emit_grid_path;
  bool no_richardson = false;
  add_common(dens_cmd, /*with_law=*/false);
  dens_cmd->add_option("--b", dens_b, "point mass location of Q");
  dens_cmd->add_option("--tmax", dens_tmax, "grid end");
  dens_cmd->add_option("--steps", dens_steps, "steps per unit of b");
  dens_cmd->add_option("--emit-grid", emit_grid_path, "write the full grid CSV here");
  dens_cmd->add_flag("--no-richardson", no_richardson, "skip the refinement check");
  dens_cmd->callback([&] {
    DensityGridOptions options;
    options.richardson_check = !no_richardson;
    const DensityGrid grid = build_density_grid(alpha, dens_b, dens_tmax, dens_steps, options);
    if (!emit_grid_path.empty()) {
      CsvBuilder csv({"t", "log_q", "log_tail_Zminus", "log_tail_Z", "asymp1_ratio"});
      for (std::size_t i = 1; i <= grid.nodes(); ++i) {
        const double t = grid.node_time(i);
        const double ratio = t > grid.b ? asymp1_ratio(grid, t) : 0.0;
        const double ltz = t > grid.b ? exact_log_tail_Z(grid, t) : 0.0;
        csv.row({t, grid.log_q_nodes()[i], grid.log_tail_nodes()[i], ltz, ratio});
      }
      Output gout{emit_grid_path, "dens",
                  {{"alpha", alpha}, {"b", dens_b}, {"tmax", dens_tmax}, {"steps", dens_steps}},
                  std::nullopt};
      gout.deliver(csv.str());
    }
    std::vector<std::string> header = {"alpha", "b", "kappa", "mass_check", "mean",
                                       "richardson_drift", "tail_at_zero"};
    std::vector<std::vector<double>> rows = {{grid.alpha, grid.b, grid.kappa, grid.mass_check,
                                              grid.mean, grid.richardson_drift.value_or(-1.0),
                                              grid.tail_at_zero}};
    Output out{output_path, "dens",
               {{"alpha", alpha}, {"b", dens_b}, {"tmax", dens_tmax}, {"steps", dens_steps},
                {"emit_grid", emit_grid_path}},
               std::nullopt};
    out.deliver(tabulate(header, rows, format));
  });

  // --- sim ---
  auto* sim_cmd = app.add_subcommand("sim", "Monte Carlo of the perpetuity series");
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 1;
  double trunc_eps = 1e-12;
  std::vector<double> mgf_points;
  bool gamma_validate = false;
  std::string emit_samples_path;
  add_common(sim_cmd);
  sim_cmd->add_option("--paths", n_paths, "number of simulated paths");
  sim_cmd->add_option("--seed", seed, "64-bit seed; paths are pure functions of (seed, index)");
  sim_cmd->add_option("--truncation-eps", trunc_eps, "stop a path when the product drops below");
  sim_cmd->add_option("--mgf-points", mgf_points, "s values for the empirical MGF")->delimiter(',');
  sim_cmd->add_flag("--gamma-validate", gamma_validate, "KS test against Gamma(alpha+1, c)");
  sim_cmd->add_option("--emit-samples", emit_samples_path, "write raw samples CSV here");
  sim_cmd->callback([&] {
    const QLaw law = parse_law(law_spec);
    SimConfig config;
    config.alpha = alpha;
    config.law = law;
    config.n_paths = n_paths;
    config.truncation_eps = trunc_eps;
    config.seed = seed;
    config.mgf_points = mgf_points;

    ordered_json params = {{"alpha", alpha}, {"law", law_spec}, {"paths", n_paths},
                           {"seed", seed},   {"truncation_eps", trunc_eps}};

    if (!emit_samples_path.empty()) {
      CsvBuilder csv({"path", "sample"});
      for (std::int64_t i = 0; i < n_paths; ++i) {
        RngStream rng = RngStream::for_path(seed, static_cast<std::uint64_t>(i));
        csv.row({static_cast<double>(i), sample_perpetuity(config, rng)});
      }
      Output sout{emit_samples_path, "sim", params, seed};
      sout.deliver(csv.str());
    }

    const SimSummary summary = simulate(config);
    ordered_json j = ordered_json::parse(summary_to_json(summary));
    if (gamma_validate) {
      if (law.kind != QKind::exp_validation)
        throw CLI::ValidationError("--gamma-validate", "requires --law exp:c=...");
      j["gamma_validation"] =
          ordered_json::parse(gamma_report_to_json(gamma_case_validate(alpha, law.c, n_paths, seed)));
    }
    Output out{output_path, "sim", params, seed};
    if (format == "csv") {
      // long key,value form; the quantile sketch stays JSON-only
      std::ostringstream csv;
      csv << "metric,value\n";
      csv << "n_paths," << summary.n_paths << "\n";
      csv << "mean," << f17(summary.mean) << "\n";
      csv << "mean_stderr," << f17(summary.mean_stderr) << "\n";
      csv << "variance," << f17(summary.variance) << "\n";
      csv << "variance_stderr," << f17(summary.variance_stderr) << "\n";
      for (const MgfEstimate& e : summary.mgf) {
        csv << "mgf_estimate@s=" << f17(e.s) << "," << f17(e.estimate) << "\n";
        csv << "mgf_stderr@s=" << f17(e.s) << "," << f17(e.stderr_) << "\n";
        csv << "mgf_stable@s=" << f17(e.s) << "," << (e.stable ? 1 : 0) << "\n";
      }
      csv << "truncation_bias_bound," << f17(summary.truncation_bias_bound) << "\n";
      out.deliver(csv.str());
    } else {
      out.deliver(j.dump(2) + "\n");
    }
  });

  // --- validate ---
  auto* validate_cmd = app.add_subcommand("validate", "run the acceptance suite");
  bool quick = false;
  std::string expectations_path;
  validate_cmd->add_flag("--quick", quick, "reduced grids and path counts");
  validate_cmd->add_option("--expectations", expectations_path,
                           "expectations JSON (defaults to the embedded copy of data/acceptance.json)");
  validate_cmd->add_option("--format", format, "csv (pass/fail lines) or json")
      ->check(CLI::IsMember({"csv", "json"}));
  validate_cmd->add_option("--output", output_path, "also write the report here");
  validate_cmd->callback([&] {
    AcceptanceOptions options;
    options.quick = quick;
    if (!expectations_path.empty()) {
      std::ifstream in(expectations_path);
      if (!in) throw CLI::ValidationError("--expectations", "cannot read " + expectations_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      options.expectations_json = ss.str();
    }
    const std::vector<CriterionResult> results = run_acceptance(options);
    bool all_pass = true;
    for (const CriterionResult& r : results) all_pass = all_pass && r.pass;
    std::string report;
    if (format == "json") {
      ordered_json arr = ordered_json::array();
      for (const CriterionResult& r : results)
        arr.push_back({{"id", r.id},
                       {"name", r.name},
                       {"pass", r.pass},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
      ordered_json top;
      top["criteria"] = arr;
      top["pass"] = all_pass;
      report = top.dump(2) + "\n";
    } else {
      std::ostringstream os;
      for (const CriterionResult& r : results)
        os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.name << ": "
           << r.detail << "\n";
      os << (all_pass ? "VALIDATE PASS" : "VALIDATE FAIL") << " (" << results.size()
         << " criteria)\n";
      report = os.str();
    }
    std::cout << report;
    if (!output_path.empty()) {
      Output out{output_path, "validate",
                 {{"quick", quick}, {"expectations", expectations_path}}, std::nullopt};
      out.deliver(report);
    }
    if (!all_pass) exit_code = 2;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
