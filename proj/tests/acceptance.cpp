// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "singlecopy/singlecopy.hpp"

using namespace singlecopy;

namespace {

int failures = 0;

void line(int id, bool pass, const std::string& what) {
  std::printf("%s [%2d] %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScanOptions scan_options() {
  ScanOptions opt;
  opt.keep_spectra = true;
  opt.threads = std::max(1u, std::thread::hardware_concurrency());
  return opt;
}

const ScanRow* row_at(const ScanSeries& s, long L) {
  for (const auto& r : s.rows)
    if (r.L == L) return &r;
  return nullptr;
}

bool all_ok(const ScanSeries& s) {
  return std::all_of(s.rows.begin(), s.rows.end(), [](const ScanRow& r) { return r.ok(); });
}

} // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();

  // Shared scans. The xx grid 128..2048 contains the 256..2048 grid.
  const ScanSeries xx = scan(make_xx(2.0), geometric_grid(128, 2048, 2), scan_options());
  const ScanSeries xy = scan(make_xy(2.0, 0.5), geometric_grid(64, 2048, 2), scan_options());
  const ScanSeries ising = scan(make_ising(), geometric_grid(128, 2048, 2), scan_options());

  // 1, 2: xx slopes over 256..2048.
  {
    const ScalingFit e1 = fit_log(xx, Quantity::e1_cont_bits, 256, 2048);
    line(1, all_ok(xx) && e1.slope >= 0.137 && e1.slope <= 0.197 && e1.points == 7,
         fmt("xx(a=2) e1_cont_bits slope %.5f over L=%ld..%ld (%ld points), window [0.137, 0.197]", e1.slope, e1.L_min,
             e1.L_max, e1.points));
    const ScalingFit s = fit_log(xx, Quantity::entropy_bits, 256, 2048);
    line(2, all_ok(xx) && s.slope >= 0.313 && s.slope <= 0.353 && s.points == 7,
         fmt("xx(a=2) entropy_bits slope %.5f over L=%ld..%ld, window [0.313, 0.353]", s.slope, s.L_min, s.L_max));
  }

  // 3: ratio at L = 2048.
  {
    const ScanRow* r = row_at(xx, 2048);
    const double ratio = r && r->ok() ? r->e1_cont_bits / r->entropy_bits : 0.0;
    line(3, ratio >= 0.40 && ratio <= 0.55,
         fmt("xx(a=2) L=2048 e1_cont_bits/entropy_bits = %.5f, window [0.40, 0.55]", ratio));
  }

  // 4: gapped saturation.
  {
    const bool e1 = saturation_test(xy, Quantity::e1_cont_bits, 0.01);
    const bool s = saturation_test(xy, Quantity::entropy_bits, 0.01);
    const ScanRow* top = row_at(xy, 2048);
    line(4, all_ok(xy) && e1 && s,
         fmt("xy(a=2, gamma=0.5) L=64..2048 saturates within 0.01 bits: e1_cont %s, entropy %s (L=2048: %.7f, %.7f)",
             e1 ? "yes" : "no", s ? "yes" : "no", top ? top->e1_cont_bits : 0.0, top ? top->entropy_bits : 0.0));
  }

  // 5: Ising divergence.
  {
    const ScalingFit f = fit_log(ising, Quantity::e1_cont_bits);
    bool increasing = all_ok(ising);
    for (std::size_t i = 1; i < ising.rows.size(); ++i)
      increasing = increasing && ising.rows[i].e1_cont_bits > ising.rows[i - 1].e1_cont_bits;
    line(5, f.slope > 0.03 && increasing,
         fmt("ising L=128..2048 e1_cont_bits slope %.5f (> 0.03), rows strictly increasing: %s", f.slope,
             increasing ? "yes" : "no"));
  }

  // 6: Gaussian vs exact diagonalization.
  {
    bool pass = true;
    std::string detail;
    for (const auto& [m, n, L] : {std::tuple{make_xx(2.0), 10L, 5L}, std::tuple{make_ising(), 9L, 3L}}) {
      try {
        const OracleComparison c = compare_oracle(m, n, L, MethodPair::gaussian_vs_ed);
        pass = pass && c.max_abs_diff < 1e-8 && c.gap > 1e-6;
        detail += fmt("%s n=%ld L=%ld diff=%.2e gap=%.4f; ", std::string(to_string(m.label)).c_str(), n, L,
                      c.max_abs_diff, c.gap);
      } catch (const Error& e) {
        pass = false;
        detail += e.what();
      }
    }
    line(6, pass, "gaussian-vs-ed: " + detail);
  }

  // 7: integral identity against the dilogarithm value.
  {
    const double half = -0.5 * oracle::eta2();
    const double dilog = 2.0 / (std::numbers::pi * std::numbers::pi) * 2.0 * half;
    const IntegralCheck c = integral_check(1e-12);
    const double err = std::abs(c.value_natural_log + 1.0 / 6.0);
    const double err_dilog = std::abs(c.value_natural_log - dilog);
    line(7, err < 1e-9 && err_dilog < 1e-9 && std::abs(half + std::numbers::pi * std::numbers::pi / 24.0) < 1e-12,
         fmt("integral = %.16f, |+1/6| = %.1e, |dilog| = %.1e", c.value_natural_log, err, err_dilog));
  }

  // 8: bound chain over every spectrum above.
  {
    long spectra = 0, violations = 0;
    for (const ScanSeries* s : {&xx, &xy, &ising})
      for (const ScanRow& r : s->rows) {
        if (r.mu.empty()) {
          ++violations;
          continue;
        }
        const BoundChain b = bound_chain(r.mu);
        ++spectra;
        if (!b.lhs_ge_mid(1e-10) || !b.lhs_le_rhs(1e-10)) ++violations;
      }
    line(8, violations == 0, fmt("bound chain over %ld spectra: %ld violations", spectra, violations));
  }

  // 9: Nielsen vs floor, Ep bounds.
  {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> len(1, 32);
    long nielsen_bad = 0;
    for (int t = 0; t < 10000; ++t) {
      const auto v = oracle::random_probability_vector(rng, len(rng));
      const SortedSpectrum s(v);
      long best = 1;
      for (long M = 1; M <= static_cast<long>(v.size()) + 1; ++M)
        if (nielsen_transformable(s, M)) best = M;
      if (static_cast<double>(best) != single_copy_E1(v.front()).M_max || best != oracle::brute_force_nielsen(v))
        ++nielsen_bad;
    }
    long ep_bad = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto v = oracle::random_probability_vector(rng, len(rng));
      const SortedSpectrum s(v);
      const EpResult r = probabilistic_Ep(s);
      if (r.Ep_bits < single_copy_E1(v.front()).E1_bits - 1e-9 || r.Ep_bits > s.shannon_bits() + 1e-9) ++ep_bad;
    }
    line(9, nielsen_bad == 0 && ep_bad == 0,
         fmt("Nielsen M == floor(1/alpha1): %ld/10000 mismatches; E1 <= Ep <= S: %ld/1000 violations", nielsen_bad,
             ep_bad));
  }

  // 10: Fisher-Hartwig slope.
  {
    const FhFit f = fh_slope(xx);
    const bool pass = std::abs(f.fit.slope - 0.5) <= 0.05 && std::abs(f.predicted_slope - 0.5) < 1e-9 && f.excluded_rows == 0;
    line(10, pass,
         fmt("xx(a=2) -ln|det T_L| slope %.5f vs sum beta^2 = %.5f over L=%ld..%ld, window 0.5 +- 0.05", f.fit.slope,
             f.predicted_slope, f.fit.L_min, f.fit.L_max));
  }

  // 11: sectors against enumeration.
  {
    const ModelSpec m = make_xx(2.0);
    ReportOptions opt;
    opt.with_sectors = true;
    const EntanglementReport r = report(m, 12, opt);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_T(m, 12));
    std::vector<double> nu;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) nu.push_back(0.5 * (1.0 - es.eigenvalues()(i)));
    const auto w = oracle::enumerate_sector_weights(nu);
    const auto mx = oracle::enumerate_sector_max(nu);
    double werr = 0.0, total = 0.0, envelope = 0.0, enum_envelope = 0.0;
    bool shape = r.sectors && r.sectors->size() == 13;
    if (shape)
      for (std::size_t N = 0; N <= 12; ++N) {
        werr = std::max(werr, std::abs((*r.sectors)[N].weight - w[N]));
        total += (*r.sectors)[N].weight;
        envelope = std::max(envelope, (*r.sectors)[N].max_eigenvalue);
        enum_envelope = std::max(enum_envelope, mx[N]);
      }
    const bool pass = shape && werr <= 1e-12 && std::abs(total - 1.0) <= 1e-12 &&
                      std::abs(envelope - r.alpha1) <= 1e-12 && std::abs(enum_envelope - r.alpha1) <= 1e-12;
    line(11, pass,
         fmt("xx(a=2) L=12 sectors: max weight error %.1e, sum-1 = %.1e, envelope-alpha1 = %.1e", werr, total - 1.0,
             envelope - r.alpha1));
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 11 criteria failed (%.1f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
