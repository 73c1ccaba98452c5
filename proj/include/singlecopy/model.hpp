#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "singlecopy/error.hpp"

namespace singlecopy {

using complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class Preset { xx, xy, ising, custom };

inline std::string_view to_string(Preset p) {
  switch (p) {
  case Preset::xx: return "xx";
  case Preset::xy: return "xy";
  case Preset::ising: return "ising";
  case Preset::custom: return "custom";
  }
  return "custom";
}

inline Preset preset_from_string(std::string_view s) {
  if (s == "xx") return Preset::xx;
  if (s == "xy") return Preset::xy;
  if (s == "ising") return Preset::ising;
  if (s == "custom") return Preset::custom;
  throw InputError("unknown model kind '" + std::string(s) + "'");
}

/// Finite-range translationally invariant quadratic chain.
///
/// `A` holds A_0..A_w (A_{-j} = A_j), `B` holds B_1..B_w (B_{-j} = -B_j,
/// B_0 = 0). The fermionic Hamiltonian is
///   H = sum_{jk} a_j^+ A_{j-k} a_k + a_j^+ B_{j-k} a_k^+ - a_j B_{j-k} a_k.
struct ModelSpec {
  std::vector<double> A{0.0};
  std::vector<double> B;
  Preset label = Preset::custom;
  std::optional<double> a;
  std::optional<double> gamma;

  std::size_t w() const noexcept { return A.size() - 1; }

  /// A_d for any integer offset d.
  double A_at(long d) const noexcept {
    const auto j = static_cast<std::size_t>(d < 0 ? -d : d);
    return j < A.size() ? A[j] : 0.0;
  }

  /// B_d for any integer offset d, with B_{-d} = -B_d.
  double B_at(long d) const noexcept {
    if (d == 0) return 0.0;
    const auto j = static_cast<std::size_t>(d < 0 ? -d : d);
    if (j > B.size()) return 0.0;
    return d > 0 ? B[j - 1] : -B[j - 1];
  }

  bool isotropic() const noexcept {
    return std::all_of(B.begin(), B.end(), [](double b) { return b == 0.0; });
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate(const ModelSpec& m) {
  if (m.A.empty()) throw InputError("model needs at least A_0");
  if (m.B.size() + 1 != m.A.size())
    throw InputError("B must hold exactly w = " + std::to_string(m.A.size() - 1) + " entries");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(m.A.begin(), m.A.end(), finite) || !std::all_of(m.B.begin(), m.B.end(), finite))
    throw InputError("couplings must be finite");
  auto zero = [](double v) { return v == 0.0; };
  if (std::all_of(m.A.begin(), m.A.end(), zero) && std::all_of(m.B.begin(), m.B.end(), zero))
    throw InputError("all couplings are zero");
}

/// Couplings A_0 = -1, A_1 = a/2, B_1 = -gamma a / 4.
inline ModelSpec make_xy(double a, double gamma) {
  if (!std::isfinite(a) || !std::isfinite(gamma)) throw InputError("xy parameters must be finite");
  ModelSpec m;
  m.A = {-1.0, a / 2.0};
  m.B = {-gamma * a / 4.0};
  m.label = Preset::xy;
  m.a = a;
  m.gamma = gamma;
  validate(m);
  return m;
}

inline ModelSpec make_xx(double a) {
  ModelSpec m = make_xy(a, 0.0);
  m.label = Preset::xx;
  return m;
}

inline ModelSpec make_ising() {
  ModelSpec m = make_xy(1.0, 1.0);
  m.label = Preset::ising;
  return m;
}

/// Explicit coupling table. An empty `B` is padded with zeros up to w.
inline ModelSpec make_custom(std::vector<double> A, std::vector<double> B) {
  ModelSpec m;
  if (A.empty()) throw InputError("custom model needs at least A_0");
  if (B.size() + 1 > A.size()) A.resize(B.size() + 1, 0.0);
  B.resize(A.size() - 1, 0.0);
  m.A = std::move(A);
  m.B = std::move(B);
  m.label = Preset::custom;
  validate(m);
  return m;
}

struct ModelParams {
  std::optional<double> a;
  std::optional<double> gamma;
  std::vector<double> A;
  std::vector<double> B;
};

inline ModelSpec build_model(Preset kind, const ModelParams& p) {
  switch (kind) {
  case Preset::xx:
    if (!p.a) throw InputError("xx needs parameter a");
    return make_xx(*p.a);
  case Preset::xy:
    if (!p.a || !p.gamma) throw InputError("xy needs parameters a and gamma");
    return make_xy(*p.a, *p.gamma);
  case Preset::ising: return make_ising();
  case Preset::custom: return make_custom(p.A, p.B);
  }
  throw InputError("unknown model kind");
}

/// Lambda(k) = A_0 + 2 sum_j A_j cos(jk) - 4i sum_j B_j sin(jk).
inline complex dispersion(const ModelSpec& m, double k) {
  double re = m.A[0];
  double im = 0.0;
  for (std::size_t j = 1; j < m.A.size(); ++j) {
    const double jk = static_cast<double>(j) * k;
    re += 2.0 * m.A[j] * std::cos(jk);
    im -= 4.0 * m.B[j - 1] * std::sin(jk);
  }
  return {re, im};
}

inline constexpr double singular_threshold = 1e-300;

/// Unimodular symbol g(k) = Lambda(k)/|Lambda(k)|. Throws SingularSymbol at
/// a zero of the dispersion.
inline complex symbol_eval(const ModelSpec& m, double k) {
  const complex lam = dispersion(m, k);
  const double r = std::abs(lam);
  if (!(r >= singular_threshold)) throw SingularSymbol(k);
  return lam / r;
}

struct Jump {
  double k = 0.0;
  complex left_limit;
  complex right_limit;
  /// e^{2 pi i beta} = left/right, Re beta in (-1/2, 1/2].
  complex jump_exponent;
};

struct SymbolProfile {
  ModelSpec model;
  std::vector<Jump> jumps;
  /// Tangential zeros of Lambda where g stays continuous.
  std::vector<double> marginal;
  bool critical = false;

  std::vector<double> fermi_points() const {
    std::vector<double> ks;
    for (const auto& j : jumps) ks.push_back(j.k);
    return ks;
  }

  /// Sum of |beta_j|^2 over the jumps (Fisher-Hartwig exponent of det T_L).
  double sum_beta_squared() const {
    double s = 0.0;
    for (const auto& j : jumps) s += std::norm(j.jump_exponent);
    return s;
  }
};

namespace detail {

inline double wrap_angle(double k) {
  k = std::fmod(k, two_pi);
  if (k < 0.0) k += two_pi;
  if (k >= two_pi) k -= two_pi;
  return k;
}

inline double coupling_scale(const ModelSpec& m) {
  double s = 0.0;
  for (double v : m.A) s += std::abs(v);
  for (double v : m.B) s += std::abs(v);
  return s;
}

/// One-sided limit of g at k0 from direction `dir` (+1 right, -1 left),
/// by Richardson extrapolation of two nearby evaluations.
inline complex one_sided_limit(const ModelSpec& m, double k0, double dir) {
  constexpr double h = 1e-5;
  const complex g1 = symbol_eval(m, k0 + dir * h);
  const complex g2 = symbol_eval(m, k0 + dir * 2.0 * h);
  const complex g = 2.0 * g1 - g2;
  return g / std::abs(g);
}

/// Refines a zero of Lambda inside [lo, hi] to full double precision (and at
/// least to root_tol). Real dispersions with a sign change use bisection,
/// everything else a golden-section search on |Lambda|.
inline double refine_zero(const ModelSpec& m, double lo, double hi, double root_tol) {
  const bool real = m.isotropic();
  const double flo = dispersion(m, lo).real();
  const double fhi = dispersion(m, hi).real();
  if (real && flo * fhi < 0.0) {
    double a = lo, b = hi, fa = flo;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      const double fm = dispersion(m, mid).real();
      if (fm == 0.0) return mid;
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
      if (b - a < root_tol * 1e-6) break;
    }
    return 0.5 * (a + b);
  }
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = std::abs(dispersion(m, c));
  double fd = std::abs(dispersion(m, d));
  for (int it = 0; it < 300; ++it) {
    if (b - a < root_tol * 1e-6 || !(c > a && d < b && c < d)) break;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = std::abs(dispersion(m, c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = std::abs(dispersion(m, d));
    }
  }
  // The sampled grid may contain the exact zero (e.g. k = 0); keep the best point.
  double best = 0.5 * (a + b);
  double fbest = std::abs(dispersion(m, best));
  for (double k : {lo, hi, c, d}) {
    const double f = std::abs(dispersion(m, k));
    if (f < fbest) {
      fbest = f;
      best = k;
    }
  }
  return best;
}

} // namespace detail

inline constexpr int criticality_samples = 4096;

/// Locates every zero of Lambda on [0, 2pi) and records the symbol jumps.
///
/// Zeros are found as local minima of |Lambda| on a uniform grid, refined,
/// and accepted when |Lambda| < 1e-8 relative to the coupling scale. A zero
/// where g has equal one-sided limits (a tangential zero) is marginal.
inline SymbolProfile classify_criticality(const ModelSpec& m, double root_tol = 1e-10) {
  if (!(root_tol > 0.0)) throw InputError("root_tol must be positive");
  validate(m);
  constexpr int n = criticality_samples;
  const double h = two_pi / n;
  std::vector<double> mag(n);
  for (int i = 0; i < n; ++i) mag[i] = std::abs(dispersion(m, i * h));
  const double scale = detail::coupling_scale(m);
  if (*std::max_element(mag.begin(), mag.end()) <= singular_threshold)
    throw NumericalError("degenerate dispersion: Lambda vanishes on an interval");

  SymbolProfile prof;
  prof.model = m;
  const double zero_tol = 1e-8 * std::max(scale, 1.0);
  std::vector<double> roots;
  for (int i = 0; i < n; ++i) {
    const double prev = mag[(i + n - 1) % n];
    const double next = mag[(i + 1) % n];
    // Strict on one side so a flat pair of samples yields one candidate.
    if (!(mag[i] < prev && mag[i] <= next)) continue;
    const double k = detail::refine_zero(m, (i - 1) * h, (i + 1) * h, root_tol);
    if (std::abs(dispersion(m, k)) > zero_tol) continue;
    double kw = detail::wrap_angle(k);
    if (kw < 1e-14 || two_pi - kw < 1e-14) kw = 0.0;
    roots.push_back(kw);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double x, double y) { return std::abs(x - y) < 10.0 * root_tol; }),
              roots.end());

  for (double k : roots) {
    const complex left = detail::one_sided_limit(m, k, -1.0);
    const complex right = detail::one_sided_limit(m, k, +1.0);
    if (std::abs(left - right) < 1e-6) {
      prof.marginal.push_back(k);
      continue;
    }
    double beta = std::arg(left * std::conj(right)) / two_pi;
    if (beta <= -0.5 + 1e-9) beta += 1.0;
    prof.jumps.push_back({k, left, right, complex(beta, 0.0)});
  }
  prof.critical = !prof.jumps.empty();
  return prof;
}

} // namespace singlecopy
