#pragma once

// Command-line front end. `run` is kept separate from main() so the test
// suite can drive every subcommand in-process.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "singlecopy/singlecopy.hpp"

namespace singlecopy::cli {

enum ExitCode : int { ok = 0, usage = 1, numerical = 2, check_failed = 3 };

struct ModelFlags {
  std::string model = "xx";
  std::optional<double> a;
  std::optional<double> gamma;
  std::vector<double> A;
  std::vector<double> B;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "xx | xy | ising | custom")
        ->check(CLI::IsMember({"xx", "xy", "ising", "custom"}));
    app->add_option("--a", a, "preset parameter a (xx defaults to 2)");
    app->add_option("--gamma", gamma, "anisotropy gamma (xy)");
    app->add_option("--A", A, "custom A_0,...,A_w")->delimiter(',');
    app->add_option("--B", B, "custom B_1,...,B_w")->delimiter(',');
  }

  ModelSpec build() const {
    const Preset kind = preset_from_string(model);
    if (kind == Preset::custom && A.empty()) throw InputError("--model custom needs --A");
    if (kind == Preset::xx) return build_model(kind, {a.value_or(2.0), gamma, A, B});
    return build_model(kind, {a, gamma, A, B});
  }
};

struct GridFlags {
  long L_min = 64;
  long L_max = 2048;
  int per_octave = 2;

  void attach(CLI::App* app) {
    app->add_option("--L-min", L_min, "smallest block length");
    app->add_option("--L-max", L_max, "largest block length");
    app->add_option("--per-octave", per_octave, "grid points per doubling of L");
  }

  std::vector<long> grid() const {
    if (L_min > L_max) throw InputError("--L-min must not exceed --L-max");
    if (per_octave < 1) throw InputError("--per-octave must be >= 1");
    auto g = geometric_grid(L_min, L_max, per_octave);
    if (g.size() < 2) throw InputError("grid needs at least two points");
    return g;
  }
};

struct OutputFlags {
  std::string out;
  std::string format;

  void attach(CLI::App* app) {
    app->add_option("--out", out, "output path (stdout when omitted)");
    app->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  }

  /// `--out json` / `--out csv` without --format selects the format on stdout.
  void normalize() {
    if (format.empty() && (out == "json" || out == "csv")) {
      format = out;
      out.clear();
    }
  }
};

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Expands `--config PATH` (a JSON object keyed by long flag names) into
/// flags placed before the remaining arguments, so explicit flags win.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> head, rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  if (!cfg.is_object()) throw InputError("config must be a JSON object");
  if (rest.empty()) throw InputError("config given without a subcommand");
  head.push_back(rest.front());
  if (cfg.contains("subcommand") && cfg["subcommand"] != rest.front())
    throw InputError("config subcommand does not match");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "subcommand") continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) head.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : format_double(v.get<double>());
      }
      head.push_back(flag);
      head.push_back(joined);
    } else if (value.is_string()) {
      head.push_back(flag);
      head.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      head.push_back(flag);
      head.push_back(value.is_number_integer() ? std::to_string(value.get<long>()) : format_double(value.get<double>()));
    } else {
      throw InputError("unsupported config value for '" + key + "'");
    }
  }
  head.insert(head.end(), rest.begin() + 1, rest.end());
  return head;
}

// ---------------------------------------------------------------------------
// Built-in checks

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline CheckLine check_integral(double tol) {
  const IntegralCheck ic = integral_check(1e-12);
  const double err = std::abs(ic.value_natural_log + 1.0 / 6.0);
  std::ostringstream d;
  d.precision(17);
  d << "value_natural_log=" << ic.value_natural_log << " value_log2=" << ic.value_log2 << " |diff|=" << err;
  return {"integral", err <= tol, d.str()};
}

inline CheckLine check_majorization(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(1, 32);
  std::exponential_distribution<double> expo(1.0);
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    double sum = 0.0;
    for (double& x : v) sum += (x = expo(rng));
    for (double& x : v) x /= sum;
    const auto s = SortedSpectrum::from_unsorted(v);
    long best = 1;
    for (long M = 1; M <= static_cast<long>(s.size()); ++M)
      if (nielsen_transformable(s, M)) best = M;
    if (static_cast<double>(best) != single_copy_E1(s[0]).M_max) ++failures;
  }
  return {"majorization", failures == 0, std::to_string(trials) + " spectra, " + std::to_string(failures) + " mismatches"};
}

inline CheckLine check_oracle() {
  const auto c1 = compare_oracle(make_xx(2.0), 10, 5, MethodPair::gaussian_vs_ed);
  const auto c2 = compare_oracle(make_ising(), 9, 3, MethodPair::gaussian_vs_ed);
  std::ostringstream d;
  d << "xx(a=2) n=10 L=5 diff=" << c1.max_abs_diff << " gap=" << c1.gap << "; ising n=9 L=3 diff=" << c2.max_abs_diff
    << " gap=" << c2.gap;
  const bool pass = c1.max_abs_diff < 1e-8 && c1.gap > 1e-6 && c2.max_abs_diff < 1e-8 && c2.gap > 1e-6;
  return {"oracle", pass, d.str()};
}

// ---------------------------------------------------------------------------

/// Parses and executes one invocation. Output is assembled in memory and
/// written only on success.
inline int run(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-copy entanglement of quadratic fermion chains", "singlecopy"};
  app.set_version_flag("--version", tool_version);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  ModelFlags model;
  GridFlags grid;
  OutputFlags output;
  long L = 64;
  long n = 10;
  bool with_ep = false, with_sectors = false;
  long ep_dims = 256;
  double tol = 1e-12;
  unsigned threads = 1;
  std::string method = "ed";
  std::string in_path;
  std::string quantity = "e1_cont_bits";
  long window_min = 0, window_max = 0;
  bool two_term = false, fh = false;
  bool do_integral = false, do_majorization = false, do_oracle = false, do_all = false;

  auto* analyze = app.add_subcommand("analyze", "single block: E1, entropy, optional Ep and sectors");
  model.attach(analyze);
  output.attach(analyze);
  analyze->add_option("--L", L, "block length")->check(CLI::PositiveNumber);
  analyze->add_flag("--with-ep", with_ep, "solve the probabilistic-rate linear program");
  analyze->add_flag("--with-sectors", with_sectors, "particle-number sectors (isotropic models)");
  analyze->add_option("--ep-dims", ep_dims, "top eigenvalues entering the Ep program")->check(CLI::Range(1, 1024));
  analyze->add_option("--tol", tol, "coefficient tolerance")->check(CLI::PositiveNumber);

  auto* scan_cmd = app.add_subcommand("scan", "geometric L scan (CSV or JSON)");
  model.attach(scan_cmd);
  grid.attach(scan_cmd);
  output.attach(scan_cmd);
  scan_cmd->add_option("--tol", tol, "coefficient tolerance")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));

  auto* fit_cmd = app.add_subcommand("fit", "log2 L fit of a scan quantity");
  model.attach(fit_cmd);
  grid.attach(fit_cmd);
  output.attach(fit_cmd);
  fit_cmd->add_option("--in", in_path, "scan file (CSV or JSON); otherwise the scan is computed");
  fit_cmd->add_option("--quantity", quantity, "column to fit")
      ->check(CLI::IsMember({"e1_cont_bits", "E1_bits", "entropy_bits", "ln_absdet_T", "rms_term_bits"}));
  fit_cmd->add_option("--window-min", window_min, "smallest L in the fit window");
  fit_cmd->add_option("--window-max", window_max, "largest L in the fit window");
  fit_cmd->add_flag("--two-term", two_term, "add a log2 log2 L regressor");
  fit_cmd->add_flag("--fh", fh, "fit -ln|det T_L| against ln L instead");
  fit_cmd->add_option("--tol", tol, "coefficient tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));

  auto* oracle_cmd = app.add_subcommand("oracle", "finite-chain validation");
  model.attach(oracle_cmd);
  output.attach(oracle_cmd);
  oracle_cmd->add_option("--n", n, "chain length")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--L", L, "block length")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--method", method, "ed | thermodynamic")
      ->check(CLI::IsMember({"ed", "thermodynamic", "gaussian-vs-ed", "gaussian-vs-thermodynamic"}));
  oracle_cmd->add_option("--tol", tol, "coefficient tolerance")->check(CLI::PositiveNumber);

  auto* check_cmd = app.add_subcommand("check", "built-in numerical checks (exit 3 on failure)");
  output.attach(check_cmd);
  check_cmd->add_flag("--integral", do_integral, "closed integral equals -1/6");
  check_cmd->add_flag("--majorization", do_majorization, "Nielsen criterion vs floor(1/alpha1)");
  check_cmd->add_flag("--oracle", do_oracle, "Gaussian vs exact diagonalization");
  check_cmd->add_flag("--all", do_all, "every check");

  std::string text;
  try {
    const auto args = expand_config(argv_in);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    output.normalize();

    if (analyze->parsed()) {
      if (output.format == "csv") throw InputError("analyze emits JSON only");
      ReportOptions opt{with_ep, with_sectors, ep_dims, tol};
      text = dump(report(model.build(), L, opt));
    } else if (scan_cmd->parsed()) {
      ScanOptions opt;
      opt.abs_tol = tol;
      opt.threads = threads;
      opt.progress = [&err](const ScanRow& r) {
        err << "L=" << r.L << (r.ok() ? " e1_cont_bits=" + format_double(r.e1_cont_bits) : " failed: " + r.error)
            << "\n";
      };
      const ScanSeries s = scan(model.build(), grid.grid(), opt);
      text = output.format == "json" ? dump(json(s)) : to_csv(s);
    } else if (fit_cmd->parsed()) {
      if (output.format == "csv") throw InputError("fit emits JSON only");
      ScanSeries s;
      if (!in_path.empty()) {
        std::ifstream in(in_path);
        if (!in) throw InputError("cannot read '" + in_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string body = buf.str();
        if (body.rfind(scan_csv_header, 0) == 0) {
          s = scan_from_csv(body, fh ? model.build() : ModelSpec{});
        } else {
          try {
            s = json::parse(body).get<ScanSeries>();
          } catch (const json::exception& e) {
            throw InputError(std::string("malformed scan file: ") + e.what());
          }
        }
      } else {
        ScanOptions opt;
        opt.abs_tol = tol;
        opt.threads = threads;
        s = scan(model.build(), grid.grid(), opt);
      }
      if (fh) {
        const FhFit f = fh_slope(s);
        json j = f.fit;
        j["predicted_slope"] = f.predicted_slope;
        j["excluded_rows"] = f.excluded_rows;
        text = dump(j);
      } else {
        text = dump(json(fit_log(s, quantity_from_string(quantity), window_min, window_max, two_term)));
      }
    } else if (oracle_cmd->parsed()) {
      if (output.format == "csv") throw InputError("oracle emits JSON only");
      text = dump(json(compare_oracle(model.build(), n, L, method_pair_from_string(method), tol)));
    } else if (check_cmd->parsed()) {
      if (!(do_integral || do_majorization || do_oracle)) do_all = true;
      std::vector<CheckLine> lines;
      if (do_all || do_integral) lines.push_back(check_integral(1e-9));
      if (do_all || do_majorization) lines.push_back(check_majorization(10000, 20061));
      if (do_all || do_oracle) lines.push_back(check_oracle());
      bool pass = true;
      for (const auto& l : lines) {
        text += (l.pass ? "PASS " : "FAIL ") + l.name + ": " + l.detail + "\n";
        pass = pass && l.pass;
      }
      if (!pass) {
        out << text;
        return check_failed;
      }
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return usage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }

  if (output.out.empty()) {
    out << text;
    return ok;
  }
  std::ofstream f(output.out, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) {
    err << "error: cannot write '" << output.out << "'\n";
    return numerical;
  }
  return ok;
}

} // namespace singlecopy::cli
