#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "singlecopy/error.hpp"
#include "singlecopy/model.hpp"
#include "singlecopy/quadrature.hpp"

namespace singlecopy {

enum class CoeffMethod { closed_form, quadrature };

inline std::string_view to_string(CoeffMethod m) {
  return m == CoeffMethod::closed_form ? "closed_form" : "quadrature";
}

/// Fourier coefficients t_l of the symbol for l = -l_max..l_max.
///
/// Tables are immutable once built; T_L for every L <= l_max + 1 is a
/// leading principal submatrix, so one table serves a whole scan.
struct ToeplitzCoeffs {
  long l_max = 0;
  std::vector<double> t;  // t[l + l_max]
  CoeffMethod method = CoeffMethod::closed_form;
  double abs_tol = 1e-12;
  double achieved_error = 0.0;
  long nodes = 0;

  double at(long l) const {
    if (l < -l_max || l > l_max) throw InputError("coefficient index outside table");
    return t[static_cast<std::size_t>(l + l_max)];
  }
  /// Largest block length this table supports.
  long max_block() const noexcept { return l_max + 1; }
};

namespace detail {

inline constexpr int node_budget = 1 << 16;
inline constexpr int gl_points = 64;

/// Closed form for a real sign symbol with Fermi points +-kF:
/// t_0 = s(2kF/pi - 1), t_l = s * 2 sin(kF l)/(pi l), s = sign Lambda(0).
/// Returns false when the model is not of this shape.
inline bool closed_form_coeffs(const ModelSpec& m, const SymbolProfile& prof, long l_max,
                               std::vector<double>& out) {
  if (!m.isotropic()) return false;
  out.assign(static_cast<std::size_t>(2 * l_max + 1), 0.0);
  if (prof.jumps.empty()) {
    // Continuous sign function: constant +-1 (tangential zeros are measure zero).
    double probe = 0.0;
    for (int i = 0; i < 64 && dispersion(m, probe).real() == 0.0; ++i) probe += 0.1;
    out[static_cast<std::size_t>(l_max)] = dispersion(m, probe).real() > 0.0 ? 1.0 : -1.0;
    return true;
  }
  if (prof.jumps.size() != 2) return false;
  const double kf = prof.jumps[0].k;
  if (!(kf > 0.0 && kf < std::numbers::pi)) return false;
  if (std::abs(prof.jumps[1].k - (two_pi - kf)) > 1e-12) return false;
  const double lam0 = dispersion(m, 0.0).real();
  if (lam0 == 0.0) return false;
  const double s = lam0 > 0.0 ? 1.0 : -1.0;
  out[static_cast<std::size_t>(l_max)] = s * (2.0 * kf / std::numbers::pi - 1.0);
  for (long l = 1; l <= l_max; ++l) {
    const double v = s * 2.0 * std::sin(kf * static_cast<double>(l)) / (std::numbers::pi * l);
    out[static_cast<std::size_t>(l_max + l)] = v;
    out[static_cast<std::size_t>(l_max - l)] = v;
  }
  return true;
}

/// Panel breakpoints: every symbol discontinuity and tangential zero, as a
/// cyclic list of segments [start, end) with end possibly beyond 2pi.
inline std::vector<std::pair<double, double>> smooth_segments(const SymbolProfile& prof) {
  std::vector<double> cuts;
  for (const auto& j : prof.jumps) cuts.push_back(j.k);
  for (double k : prof.marginal) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> segs;
  if (cuts.empty()) {
    segs.emplace_back(0.0, two_pi);
    return segs;
  }
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) segs.emplace_back(cuts[i], cuts[i + 1]);
  segs.emplace_back(cuts.back(), cuts.front() + two_pi);
  return segs;
}

/// Evaluates sum_nodes w g(k) e^{-ilk} / (2 pi) for the requested indices on a
/// grid with panel width at most `h`. Returns complex sums.
inline std::vector<complex> quadrature_pass(const ModelSpec& m,
                                            const std::vector<std::pair<double, double>>& segs,
                                            double h, const std::vector<long>& ls, long& nodes) {
  const auto& rule = quad::gl64();
  std::vector<complex> acc(ls.size(), complex(0.0, 0.0));
  nodes = 0;
  const bool contiguous = !ls.empty() && ls.front() == -ls.back() &&
                          static_cast<long>(ls.size()) == 2 * ls.back() + 1;
  const long lmax = contiguous ? ls.back() : 0;
  for (const auto& [s0, s1] : segs) {
    const double len = s1 - s0;
    const long panels = std::max<long>(1, static_cast<long>(std::ceil(len / h)));
    const double ph = len / static_cast<double>(panels);
    for (long p = 0; p < panels; ++p) {
      const double c = s0 + (p + 0.5) * ph;
      for (int i = 0; i < gl_points; ++i) {
        const double k = c + 0.5 * ph * rule.nodes[static_cast<std::size_t>(i)];
        const complex gw = symbol_eval(m, k) * (0.5 * ph * rule.weights[static_cast<std::size_t>(i)]);
        ++nodes;
        if (contiguous) {
          // Phasor recurrence in l, re-seeded periodically against drift.
          const complex step = std::polar(1.0, -k);
          complex ph_l(1.0, 0.0);
          for (long l = 0; l <= lmax; ++l) {
            if (l % 64 == 0) ph_l = std::polar(1.0, -k * static_cast<double>(l));
            acc[static_cast<std::size_t>(lmax + l)] += gw * ph_l;
            if (l != 0) acc[static_cast<std::size_t>(lmax - l)] += gw * std::conj(ph_l);
            ph_l *= step;
          }
        } else {
          for (std::size_t j = 0; j < ls.size(); ++j)
            acc[j] += gw * std::polar(1.0, -k * static_cast<double>(ls[j]));
        }
      }
    }
  }
  for (auto& v : acc) v /= two_pi;
  return acc;
}

/// Piecewise Gauss-Legendre with dyadic refinement until successive passes
/// agree to abs_tol.
inline std::vector<double> quadrature_coeffs(const ModelSpec& m, const SymbolProfile& prof,
                                             const std::vector<long>& ls, double abs_tol,
                                             double& achieved, long& nodes_used) {
  const auto segs = smooth_segments(prof);
  long lmax_abs = 1;
  for (long l : ls) lmax_abs = std::max(lmax_abs, l < 0 ? -l : l);
  // A 64-point panel resolves well over 64 radians of phase to double precision.
  double h = std::min(two_pi / 4.0, 64.0 / static_cast<double>(lmax_abs));
  long nodes = 0;
  auto prev = quadrature_pass(m, segs, h, ls, nodes);
  double diff = std::numeric_limits<double>::infinity();
  for (;;) {
    h *= 0.5;
    long next_nodes = 0;
    for (const auto& [s0, s1] : segs)
      next_nodes += std::max<long>(1, static_cast<long>(std::ceil((s1 - s0) / h))) * gl_points;
    if (next_nodes > node_budget) throw AccuracyError("coefficient accuracy: node budget exhausted", diff);
    auto cur = quadrature_pass(m, segs, h, ls, nodes);
    diff = 0.0;
    for (std::size_t j = 0; j < ls.size(); ++j) diff = std::max(diff, std::abs(cur[j] - prev[j]));
    prev = std::move(cur);
    if (diff < abs_tol) break;
  }
  achieved = diff;
  nodes_used = nodes;
  std::vector<double> out(ls.size());
  for (std::size_t j = 0; j < ls.size(); ++j) {
    if (std::abs(prev[j].imag()) >= abs_tol)
      throw AccuracyError("coefficient accuracy: imaginary residue", std::abs(prev[j].imag()));
    out[j] = prev[j].real();
    if (std::abs(out[j]) > 1.0 + 1e-12) throw NumericalError("coefficient exceeds unit modulus");
  }
  return out;
}

} // namespace detail

/// Builds t_{-l_max}..t_{l_max}. The closed form is used for isotropic
/// single-band sign symbols unless `force_quadrature` is set.
inline ToeplitzCoeffs coefficient_table(const ModelSpec& m, long l_max, double abs_tol = 1e-12,
                                        bool force_quadrature = false) {
  if (l_max < 0) throw InputError("l_max must be non-negative");
  if (!(abs_tol > 0.0)) throw InputError("abs_tol must be positive");
  const SymbolProfile prof = classify_criticality(m, 1e-12);
  ToeplitzCoeffs c;
  c.l_max = l_max;
  c.abs_tol = abs_tol;
  if (!force_quadrature && detail::closed_form_coeffs(m, prof, l_max, c.t)) {
    c.method = CoeffMethod::closed_form;
    return c;
  }
  std::vector<long> ls;
  for (long l = -l_max; l <= l_max; ++l) ls.push_back(l);
  c.method = CoeffMethod::quadrature;
  c.t = detail::quadrature_coeffs(m, prof, ls, abs_tol, c.achieved_error, c.nodes);
  return c;
}

inline double fourier_coefficient(const ModelSpec& m, long l, double abs_tol = 1e-12,
                                  bool force_quadrature = false) {
  if (!(abs_tol > 0.0)) throw InputError("abs_tol must be positive");
  const SymbolProfile prof = classify_criticality(m, 1e-12);
  const long la = l < 0 ? -l : l;
  std::vector<double> t;
  if (!force_quadrature && detail::closed_form_coeffs(m, prof, la, t))
    return t[static_cast<std::size_t>(la + l)];
  double achieved = 0.0;
  long nodes = 0;
  return detail::quadrature_coeffs(m, prof, {l}, abs_tol, achieved, nodes)[0];
}

/// T_L with (r, c) entry t_{c-r}, i.e. row l reads (t_{-l+1}, ..., t_{L-l}).
inline Eigen::MatrixXd build_T(const ToeplitzCoeffs& c, long L) {
  if (L < 1) throw InputError("block length must be >= 1");
  if (L > c.max_block()) throw InputError("block length exceeds coefficient table");
  Eigen::MatrixXd T(L, L);
  for (long r = 0; r < L; ++r)
    for (long col = 0; col < L; ++col) T(r, col) = c.at(col - r);
  return T;
}

inline Eigen::MatrixXd build_T(const ModelSpec& m, long L, double abs_tol = 1e-12) {
  if (L < 1) throw InputError("block length must be >= 1");
  return build_T(coefficient_table(m, L - 1, abs_tol), L);
}

/// Block-Toeplitz Majorana covariance of L sites: 2x2 block (r, c) is
/// M_{r-c} = [[0, t_{r-c}], [-t_{c-r}, 0]].
inline Eigen::MatrixXd build_gamma(const ToeplitzCoeffs& c, long L) {
  if (L < 1) throw InputError("block length must be >= 1");
  if (L > c.max_block()) throw InputError("block length exceeds coefficient table");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * L, 2 * L);
  for (long r = 0; r < L; ++r)
    for (long col = 0; col < L; ++col) {
      g(2 * r, 2 * col + 1) = c.at(r - col);
      g(2 * r + 1, 2 * col) = -c.at(col - r);
    }
  return g;
}

inline Eigen::MatrixXd build_gamma(const ModelSpec& m, long L, double abs_tol = 1e-12) {
  if (L < 1) throw InputError("block length must be >= 1");
  return build_gamma(coefficient_table(m, L - 1, abs_tol), L);
}

/// Singular values of T_L and log-domain aggregates over them.
struct BlockSpectrum {
  long L = 0;
  std::vector<double> mu;  // non-increasing, in [0, 1]
  double ln_alpha1 = 0.0;
  double ln_absdet_T = 0.0;  // -inf when some mu underflows
  double entropy_bits = 0.0;
  double rms_term_bits = 0.0;
  double max_overshoot = 0.0;

  double alpha1() const { return std::exp(ln_alpha1); }
};

namespace detail {

/// Binary entropy of p = (1 + mu)/2 in bits, from mu directly.
inline double mode_entropy_bits(double mu) {
  const double p = 0.5 * (1.0 + mu);
  const double q = 0.5 * (1.0 - mu);
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (q > 0.0) h -= q * std::log2(q);
  return h;
}

} // namespace detail

inline constexpr double mu_clamp_tol = 1e-10;
inline constexpr double mu_hard_tol = 1e-8;

/// Aggregates from already-computed singular values (any order).
inline BlockSpectrum spectrum_from_mu(std::vector<double> mu) {
  BlockSpectrum s;
  s.L = static_cast<long>(mu.size());
  for (double& v : mu) {
    if (!std::isfinite(v)) throw DecompositionError("decomposition failure: non-finite singular value");
    if (v > 1.0 + mu_hard_tol) throw NumericalError("model violates |T| <= 1");
    s.max_overshoot = std::max(s.max_overshoot, v - 1.0);
    v = std::clamp(v, 0.0, 1.0);
  }
  std::sort(mu.begin(), mu.end(), std::greater<>());
  bool underflow = false;
  for (double v : mu) {
    s.ln_alpha1 += std::log1p(-0.5 * (1.0 - v));
    if (v < 1e-300)
      underflow = true;
    else
      s.ln_absdet_T += std::log(v);
    s.entropy_bits += detail::mode_entropy_bits(v);
    s.rms_term_bits -= 0.5 * std::log2(0.5 * (1.0 + v * v));
  }
  if (underflow) s.ln_absdet_T = -std::numeric_limits<double>::infinity();
  s.mu = std::move(mu);
  return s;
}

inline std::vector<double> singular_values(const Eigen::MatrixXd& T) {
  if (!T.allFinite()) throw InputError("matrix entries must be finite");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(T);
  if (svd.info() != Eigen::Success) throw DecompositionError("decomposition failure: SVD did not converge");
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

inline BlockSpectrum block_spectrum(const Eigen::MatrixXd& T) {
  if (T.rows() != T.cols() || T.rows() < 1) throw InputError("T must be square and non-empty");
  return spectrum_from_mu(singular_values(T));
}

} // namespace singlecopy
