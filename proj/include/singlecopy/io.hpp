#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <system_error>

#include "singlecopy/asymptotics.hpp"
#include "singlecopy/entangle.hpp"
#include "singlecopy/model.hpp"
#include "singlecopy/oracle.hpp"

namespace singlecopy {

inline constexpr const char* tool_version = "singlecopy 1.0.0";

using json = nlohmann::json;

// Non-finite numbers travel as strings ("-inf", "inf", "nan").
inline json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double to_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InputError("malformed number '" + s + "'");
  }
  return j.get<double>();
}

// ModelSpec -----------------------------------------------------------------

inline void to_json(json& j, const ModelSpec& m) {
  j = json{{"label", to_string(m.label)}, {"w", m.w()}, {"A", m.A}, {"B", m.B}};
  j["params"] = json::object();
  if (m.a) j["params"]["a"] = *m.a;
  if (m.gamma) j["params"]["gamma"] = *m.gamma;
}

inline void from_json(const json& j, ModelSpec& m) {
  m.label = preset_from_string(j.at("label").get<std::string>());
  m.A = j.at("A").get<std::vector<double>>();
  m.B = j.at("B").get<std::vector<double>>();
  m.a.reset();
  m.gamma.reset();
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (p.contains("a")) m.a = p["a"].get<double>();
    if (p.contains("gamma")) m.gamma = p["gamma"].get<double>();
  }
  if (j.contains("w") && j["w"].get<std::size_t>() != m.w()) throw InputError("model w does not match A");
  validate(m);
}

// EntanglementReport --------------------------------------------------------

inline void to_json(json& j, const Sector& s) {
  j = json{{"N", s.N}, {"weight", s.weight}, {"max_eigenvalue", s.max_eigenvalue}};
}

inline void from_json(const json& j, Sector& s) {
  s.N = j.at("N").get<long>();
  s.weight = to_number(j.at("weight"));
  s.max_eigenvalue = to_number(j.at("max_eigenvalue"));
}

inline void to_json(json& j, const EntanglementReport& r) {
  j = json{{"tool_version", tool_version},
           {"model", r.model},
           {"L", r.L},
           {"critical", r.critical},
           {"alpha1", number(r.alpha1)},
           {"ln_alpha1", number(r.ln_alpha1)},
           {"M_max", number(r.M_max)},
           {"floor_saturated", r.floor_saturated},
           {"E1_bits", number(r.E1_bits)},
           {"e1_cont_bits", number(r.e1_cont_bits)},
           {"entropy_bits", number(r.entropy_bits)},
           {"diagnostics",
            {{"ln_absdet_T", number(r.diagnostics.ln_absdet_T)},
             {"rms_term_bits", number(r.diagnostics.rms_term_bits)}}}};
  if (r.Ep_bits) {
    j["Ep_bits"] = number(*r.Ep_bits);
    j["Ep_truncated"] = r.Ep_truncated;
    json ens = json::array();
    for (const auto& [M, p] : r.Ep_ensemble) ens.push_back({{"M", M}, {"p", p}});
    j["Ep_ensemble"] = ens;
  }
  if (r.sectors) j["sectors"] = *r.sectors;
}

inline void from_json(const json& j, EntanglementReport& r) {
  r.model = j.at("model").get<ModelSpec>();
  r.L = j.at("L").get<long>();
  r.critical = j.value("critical", false);
  r.alpha1 = to_number(j.at("alpha1"));
  r.ln_alpha1 = to_number(j.at("ln_alpha1"));
  r.M_max = to_number(j.at("M_max"));
  r.floor_saturated = j.value("floor_saturated", false);
  r.E1_bits = to_number(j.at("E1_bits"));
  r.e1_cont_bits = to_number(j.at("e1_cont_bits"));
  r.entropy_bits = to_number(j.at("entropy_bits"));
  const auto& d = j.at("diagnostics");
  r.diagnostics = {to_number(d.at("ln_absdet_T")), to_number(d.at("rms_term_bits"))};
  r.Ep_bits.reset();
  r.Ep_ensemble.clear();
  r.Ep_truncated = false;
  if (j.contains("Ep_bits")) {
    r.Ep_bits = to_number(j["Ep_bits"]);
    r.Ep_truncated = j.value("Ep_truncated", false);
    for (const auto& e : j.at("Ep_ensemble")) r.Ep_ensemble.emplace_back(e.at("M").get<long>(), e.at("p").get<double>());
  }
  r.sectors.reset();
  if (j.contains("sectors")) r.sectors = j["sectors"].get<std::vector<Sector>>();
}

// ScanSeries ----------------------------------------------------------------

inline void to_json(json& j, const ScanRow& r) {
  j = json{{"L", r.L},
           {"e1_cont_bits", number(r.e1_cont_bits)},
           {"E1_bits", number(r.E1_bits)},
           {"entropy_bits", number(r.entropy_bits)},
           {"ln_absdet_T", number(r.ln_absdet_T)},
           {"rms_term_bits", number(r.rms_term_bits)}};
  if (!r.ok()) j["error"] = r.error;
}

inline void from_json(const json& j, ScanRow& r) {
  r.L = j.at("L").get<long>();
  r.e1_cont_bits = to_number(j.at("e1_cont_bits"));
  r.E1_bits = to_number(j.at("E1_bits"));
  r.entropy_bits = to_number(j.at("entropy_bits"));
  r.ln_absdet_T = to_number(j.at("ln_absdet_T"));
  r.rms_term_bits = to_number(j.at("rms_term_bits"));
  r.error = j.value("error", std::string{});
  r.mu.clear();
}

inline void to_json(json& j, const ScanSeries& s) {
  j = json{{"tool_version", tool_version}, {"model", s.model}, {"grid", s.grid}, {"rows", s.rows}};
}

inline void from_json(const json& j, ScanSeries& s) {
  s.model = j.at("model").get<ModelSpec>();
  s.grid = j.at("grid").get<std::vector<long>>();
  s.rows = j.at("rows").get<std::vector<ScanRow>>();
}

// ScalingFit ----------------------------------------------------------------

inline void to_json(json& j, const ScalingFit& f) {
  j = json{{"tool_version", tool_version},
           {"quantity", f.quantity},
           {"abscissa", f.abscissa == Abscissa::log2_L ? "log2_L" : "ln_L"},
           {"slope", number(f.slope)},
           {"intercept", number(f.intercept)},
           {"rms_residual", number(f.rms_residual)},
           {"grid_range", {f.L_min, f.L_max}},
           {"points", f.points}};
  if (f.two_term) j["two_term"] = {{"a", f.two_term->a}, {"b", f.two_term->b}, {"c", f.two_term->c}};
}

inline void from_json(const json& j, ScalingFit& f) {
  f.quantity = j.at("quantity").get<std::string>();
  f.abscissa = j.value("abscissa", std::string("log2_L")) == "ln_L" ? Abscissa::ln_L : Abscissa::log2_L;
  f.slope = to_number(j.at("slope"));
  f.intercept = to_number(j.at("intercept"));
  f.rms_residual = to_number(j.at("rms_residual"));
  f.L_min = j.at("grid_range").at(0).get<long>();
  f.L_max = j.at("grid_range").at(1).get<long>();
  f.points = j.value("points", 0L);
  f.two_term.reset();
  if (j.contains("two_term")) {
    const auto& t = j["two_term"];
    f.two_term = TwoTermFit{t.at("a").get<double>(), t.at("b").get<double>(), t.at("c").get<double>()};
  }
}

// OracleComparison ----------------------------------------------------------

inline void to_json(json& j, const OracleComparison& c) {
  j = json{{"tool_version", tool_version},
           {"model", c.model},
           {"n", c.n},
           {"L", c.L},
           {"gap", number(c.gap)},
           {"max_abs_diff", number(c.max_abs_diff)},
           {"method_pair", to_string(c.method_pair)},
           {"degenerate", c.degenerate},
           {"pipeline_defect", c.pipeline_defect},
           {"spectra", {{"gaussian", c.spectrum_gaussian}, {"reference", c.spectrum_reference}}}};
}

inline void from_json(const json& j, OracleComparison& c) {
  c.model = j.at("model").get<ModelSpec>();
  c.n = j.at("n").get<long>();
  c.L = j.at("L").get<long>();
  c.gap = to_number(j.at("gap"));
  c.max_abs_diff = to_number(j.at("max_abs_diff"));
  c.method_pair = method_pair_from_string(j.at("method_pair").get<std::string>());
  c.degenerate = j.value("degenerate", false);
  c.pipeline_defect = j.value("pipeline_defect", false);
  c.spectrum_gaussian = j.at("spectra").at("gaussian").get<std::vector<double>>();
  c.spectrum_reference = j.at("spectra").at("reference").get<std::vector<double>>();
}

// CSV -----------------------------------------------------------------------

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw InputError("malformed number '" + std::string(s) + "'");
  return v;
}

inline constexpr const char* scan_csv_header = "L,e1_cont_bits,E1_bits,entropy_bits,ln_absdet_T,rms_term_bits";

/// Successful rows only; the CSV is the plotting interface.
inline std::string to_csv(const ScanSeries& s) {
  std::string out = scan_csv_header;
  out += '\n';
  for (const auto& r : s.rows) {
    if (!r.ok()) continue;
    out += std::to_string(r.L);
    for (double v : {r.e1_cont_bits, r.E1_bits, r.entropy_bits, r.ln_absdet_T, r.rms_term_bits}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

/// Parses CSV rows back into a series; the model is not part of the CSV.
inline ScanSeries scan_from_csv(std::string_view text, const ModelSpec& model = {}) {
  ScanSeries s;
  s.model = model;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != scan_csv_header) throw InputError("CSV header mismatch");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (;;) {
      const auto pos = rest.find(',');
      cells.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (cells.size() != 6) throw InputError("CSV row needs 6 columns");
    ScanRow r;
    r.L = static_cast<long>(parse_double(cells[0]));
    r.e1_cont_bits = parse_double(cells[1]);
    r.E1_bits = parse_double(cells[2]);
    r.entropy_bits = parse_double(cells[3]);
    r.ln_absdet_T = parse_double(cells[4]);
    r.rms_term_bits = parse_double(cells[5]);
    s.grid.push_back(r.L);
    s.rows.push_back(std::move(r));
  }
  return s;
}

} // namespace singlecopy
