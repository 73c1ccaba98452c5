#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "singlecopy/error.hpp"
#include "singlecopy/lp.hpp"
#include "singlecopy/model.hpp"
#include "singlecopy/toeplitz.hpp"

namespace singlecopy {

// ---------------------------------------------------------------------------
// Single-copy entanglement from the largest reduced eigenvalue

struct SingleCopy {
  double E1_bits = 0.0;
  double e1_cont_bits = 0.0;
  /// floor(1/alpha1); stored as double since it may exceed 2^53.
  double M_max = 1.0;
  /// Set when -log2(alpha1) > 52 and the floor is below double resolution.
  bool floor_saturated = false;
};

inline constexpr double floor_saturation_bits = 52.0;

namespace detail {

/// floor(1/a) with a one-ulp guard on the reciprocal.
inline double floor_reciprocal(double a) {
  double M = std::floor(1.0 / a);
  if ((M + 1.0) * a <= 1.0) M += 1.0;
  if (M > 1.0 && M * a > 1.0) M -= 1.0;
  return std::max(M, 1.0);
}

inline SingleCopy single_copy(double ln_alpha1, double alpha1) {
  SingleCopy r;
  r.e1_cont_bits = -ln_alpha1 / std::numbers::ln2;
  if (r.e1_cont_bits > floor_saturation_bits) {
    r.floor_saturated = true;
    r.E1_bits = r.e1_cont_bits;
    r.M_max = std::exp(-ln_alpha1);
    return r;
  }
  r.M_max = floor_reciprocal(alpha1);
  r.E1_bits = std::log2(r.M_max);
  return r;
}

} // namespace detail

/// E1 from ln(alpha1), never forming alpha1 when it would underflow.
inline SingleCopy single_copy_E1_ln(double ln_alpha1) {
  if (std::isnan(ln_alpha1) || ln_alpha1 > 1e-12 || std::isinf(ln_alpha1))
    throw InputError("invalid spectrum: alpha1 must lie in (0, 1]");
  ln_alpha1 = std::min(ln_alpha1, 0.0);
  return detail::single_copy(ln_alpha1, std::exp(ln_alpha1));
}

inline SingleCopy single_copy_E1(double alpha1) {
  if (!(alpha1 > 0.0) || alpha1 > 1.0 + 1e-12) throw InputError("invalid spectrum: alpha1 must lie in (0, 1]");
  alpha1 = std::min(alpha1, 1.0);
  return detail::single_copy(std::log(alpha1), alpha1);
}

// ---------------------------------------------------------------------------
// Sorted spectra, majorization and the probabilistic rate

/// Non-increasing probability vector.
class SortedSpectrum {
public:
  SortedSpectrum() = default;

  /// Validates ordering, range and normalization (within 1e-9).
  explicit SortedSpectrum(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("invalid spectrum: empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double v = values_[i];
      if (!std::isfinite(v) || v < -1e-15 || v > 1.0 + 1e-12) throw InputError("invalid spectrum: entry outside [0,1]");
      if (i > 0 && v > values_[i - 1] + 1e-15) throw InputError("invalid spectrum: not sorted non-increasingly");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InputError("invalid spectrum: does not sum to 1");
  }

  /// Sorts and validates arbitrary non-negative weights summing to one.
  static SortedSpectrum from_unsorted(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return SortedSpectrum(std::move(v));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double shannon_bits() const {
    double h = 0.0;
    for (double v : values_)
      if (v > 0.0) h -= v * std::log2(v);
    return h;
  }

private:
  std::vector<double> values_;
};

/// Nielsen's criterion for |psi> -> |psi_M>: sum_{k<=K} alpha_k <= K/M for all K <= M.
inline bool nielsen_transformable(const SortedSpectrum& s, long M) {
  if (M < 1) throw InputError("target dimension must be >= 1");
  double partial = 0.0;
  for (long K = 1; K <= M; ++K) {
    if (static_cast<std::size_t>(K) <= s.size()) partial += s[static_cast<std::size_t>(K - 1)];
    if (partial > static_cast<double>(K) / static_cast<double>(M) + 1e-12) return false;
  }
  return true;
}

struct EpResult {
  double Ep_bits = 0.0;
  std::vector<std::pair<long, double>> ensemble;  // (M, p_M) with p_M > 0
  bool truncated = false;
};

inline constexpr long ep_max_dims = 1024;

/// Probabilistic distillation rate from tail sums tail[l-1] = sum_{j>=l} alpha_j.
///
/// Solves  max sum_M p_M log2 M  over ensembles of maximally entangled states
/// with M = 1..M_cap, constrained by the ensemble majorization monotones
///   sum_M p_M max(0, (M-l+1)/M) <= tail_l   for l = 2..M_cap.
/// p_1 is eliminated through sum_M p_M = 1.
inline EpResult ep_from_tail_sums(std::span<const double> tail, long M_cap) {
  if (M_cap < 1) throw InputError("Ep: dimension cap must be >= 1");
  if (M_cap > ep_max_dims) throw InputError("Ep: dimension cap exceeds solver bound");
  M_cap = std::min<long>(M_cap, static_cast<long>(tail.size()));
  EpResult r;
  if (M_cap <= 1) {
    r.ensemble.emplace_back(1, 1.0);
    return r;
  }
  const long nvar = M_cap - 1;  // p_2..p_cap
  lp::Problem prob;
  prob.A = Eigen::MatrixXd::Zero(1 + nvar, nvar);
  prob.b = Eigen::VectorXd::Zero(1 + nvar);
  prob.c = Eigen::VectorXd::Zero(nvar);
  prob.A.row(0).setOnes();
  prob.b(0) = 1.0;
  for (long v = 0; v < nvar; ++v) prob.c(v) = std::log2(static_cast<double>(v + 2));
  for (long l = 2; l <= M_cap; ++l) {
    const long row = l - 1;
    prob.b(row) = std::max(0.0, tail[static_cast<std::size_t>(l - 1)]);
    for (long M = l; M <= M_cap; ++M)
      prob.A(row, M - 2) = static_cast<double>(M - l + 1) / static_cast<double>(M);
  }
  const lp::Solution sol = lp::solve(prob);
  r.Ep_bits = std::max(0.0, sol.objective);
  double rest = 1.0;
  for (long v = 0; v < nvar; ++v) {
    if (sol.x(v) > 1e-14) {
      r.ensemble.emplace_back(v + 2, sol.x(v));
      rest -= sol.x(v);
    }
  }
  if (rest > 1e-14) r.ensemble.emplace_back(1, rest);
  std::sort(r.ensemble.begin(), r.ensemble.end(), [](auto& a, auto& b) { return a.first > b.first; });
  return r;
}

inline std::vector<double> tail_sums(std::span<const double> values, double extra_tail = 0.0) {
  std::vector<double> tail(values.size());
  double acc = extra_tail;
  for (std::size_t i = values.size(); i-- > 0;) {
    acc += values[i];
    tail[i] = acc;
  }
  return tail;
}

inline EpResult probabilistic_Ep(const SortedSpectrum& s, long M_max = ep_max_dims) {
  const auto tail = tail_sums(s.values());
  return ep_from_tail_sums(tail, std::min<long>(M_max, static_cast<long>(s.size())));
}

// ---------------------------------------------------------------------------
// Product spectra of quasi-free reductions

/// The `count` largest values of prod_l (1 +- mu_l)/2, non-increasing.
///
/// Best-first enumeration of flip sets ordered by the summed log cost
/// ln((1+mu)/(1-mu)); never materializes the 2^L products.
inline std::vector<double> top_products(std::span<const double> mu, std::size_t count) {
  double ln_top = 0.0;
  std::vector<double> cost;
  cost.reserve(mu.size());
  for (double m : mu) {
    ln_top += std::log1p(-0.5 * (1.0 - m));
    cost.push_back(m >= 1.0 ? std::numeric_limits<double>::infinity() : std::log1p(m) - std::log1p(-m));
  }
  std::sort(cost.begin(), cost.end());
  const std::size_t L = mu.size();
  if (L < 63) count = std::min<std::size_t>(count, std::size_t{1} << L);

  std::vector<double> out;
  out.reserve(count);
  out.push_back(std::exp(ln_top));
  using Node = std::pair<double, std::size_t>;  // (total cost, index of last flipped mode)
  std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
  if (L > 0) heap.emplace(cost[0], 0);
  while (out.size() < count && !heap.empty()) {
    const auto [c, i] = heap.top();
    heap.pop();
    // Only modes with mu = 1 carry infinite cost; everything left is zero.
    if (std::isinf(c)) break;
    out.push_back(std::exp(ln_top - c));
    if (i + 1 < L) {
      heap.emplace(c + cost[i + 1], i + 1);
      heap.emplace(c - cost[i] + cost[i + 1], i + 1);
    }
  }
  while (out.size() < count) out.push_back(0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Particle-number sectors

enum class Occupation { plus, minus };  // occupied-is-(1+mu)/2 | occupied-is-(1-mu)/2

struct Sector {
  long N = 0;
  double weight = 0.0;
  double max_eigenvalue = 0.0;
  friend bool operator==(const Sector&, const Sector&) = default;
};

inline constexpr std::size_t sector_max_modes = 4096;

/// Sector weights and largest in-sector eigenvalues for independent modes
/// occupied with probabilities `nu`.
inline std::vector<Sector> sector_decompose_occupations(std::span<const double> nu) {
  const std::size_t L = nu.size();
  if (L > sector_max_modes) throw InputError("sector decomposition: too many modes");
  for (double v : nu)
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("sector decomposition: occupation outside [0,1]");

  // Poisson-binomial recurrence.
  std::vector<double> w(L + 1, 0.0);
  w[0] = 1.0;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t N = l + 1; N > 0; --N) w[N] = w[N] * (1.0 - nu[l]) + w[N - 1] * nu[l];
    w[0] *= 1.0 - nu[l];
  }

  // Largest eigenvalue in sector N occupies the N modes with largest nu/(1-nu).
  std::vector<double> order(nu.begin(), nu.end());
  std::sort(order.begin(), order.end(), std::greater<>());
  std::vector<double> ln_occ(L + 1, 0.0), ln_empty_tail(L + 1, 0.0);
  for (std::size_t i = 0; i < L; ++i) ln_occ[i + 1] = ln_occ[i] + std::log(order[i]);
  for (std::size_t i = L; i-- > 0;) ln_empty_tail[i] = ln_empty_tail[i + 1] + std::log1p(-order[i]);

  std::vector<Sector> out(L + 1);
  for (std::size_t N = 0; N <= L; ++N)
    out[N] = {static_cast<long>(N), w[N], std::exp(ln_occ[N] + ln_empty_tail[N])};
  return out;
}

inline std::vector<Sector> sector_decompose(std::span<const double> mu, Occupation conv = Occupation::plus) {
  std::vector<double> nu;
  nu.reserve(mu.size());
  for (double m : mu) {
    if (!(m >= 0.0 && m <= 1.0)) throw InputError("sector decomposition: mu outside [0,1]");
    nu.push_back(conv == Occupation::plus ? 0.5 * (1.0 + m) : 0.5 * (1.0 - m));
  }
  return sector_decompose_occupations(nu);
}

// ---------------------------------------------------------------------------
// Reports

struct ReportOptions {
  bool with_Ep = false;
  bool with_sectors = false;
  long Ep_dims = 256;
  double abs_tol = 1e-12;
};

struct Diagnostics {
  double ln_absdet_T = 0.0;
  double rms_term_bits = 0.0;
};

struct EntanglementReport {
  ModelSpec model;
  long L = 0;
  bool critical = false;
  double alpha1 = 1.0;
  double ln_alpha1 = 0.0;
  double M_max = 1.0;
  bool floor_saturated = false;
  double E1_bits = 0.0;
  double e1_cont_bits = 0.0;
  double entropy_bits = 0.0;
  std::optional<double> Ep_bits;
  std::vector<std::pair<long, double>> Ep_ensemble;
  bool Ep_truncated = false;
  std::optional<std::vector<Sector>> sectors;
  Diagnostics diagnostics;
};

/// Assembles a report from the block matrix T_L and its spectrum.
///
/// Sectors are only defined for isotropic models: T_L is then symmetric, its
/// eigenmodes conserve particle number, and mode l is occupied with
/// probability (1 - lambda_l)/2 for the signed eigenvalue lambda_l.
inline EntanglementReport make_report(const ModelSpec& m, bool critical, const Eigen::MatrixXd& T,
                                      const BlockSpectrum& spec, const ReportOptions& opt) {
  EntanglementReport r;
  r.model = m;
  r.L = spec.L;
  r.critical = critical;
  r.ln_alpha1 = spec.ln_alpha1;
  r.alpha1 = std::exp(spec.ln_alpha1);
  const SingleCopy sc = single_copy_E1_ln(spec.ln_alpha1);
  r.M_max = sc.M_max;
  r.floor_saturated = sc.floor_saturated;
  r.E1_bits = sc.E1_bits;
  r.e1_cont_bits = sc.e1_cont_bits;
  r.entropy_bits = spec.entropy_bits;
  r.diagnostics = {spec.ln_absdet_T, spec.rms_term_bits};

  if (opt.with_Ep) {
    if (opt.Ep_dims < 1 || opt.Ep_dims > ep_max_dims) throw InputError("Ep_dims must lie in [1, 1024]");
    const auto top = top_products(spec.mu, static_cast<std::size_t>(opt.Ep_dims));
    double kept = 0.0;
    for (double v : top) kept += v;
    const double rest = std::max(0.0, 1.0 - kept);
    const bool exact = spec.L < 63 && (std::size_t{1} << spec.L) <= top.size();
    const auto tail = tail_sums(top, exact ? 0.0 : rest);
    const EpResult ep = ep_from_tail_sums(tail, static_cast<long>(top.size()));
    r.Ep_bits = ep.Ep_bits;
    r.Ep_ensemble = ep.ensemble;
    r.Ep_truncated = !exact;
  }
  if (opt.with_sectors && m.isotropic()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw DecompositionError("decomposition failure: eigensolver");
    std::vector<double> nu;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      nu.push_back(std::clamp(0.5 * (1.0 - es.eigenvalues()(i)), 0.0, 1.0));
    r.sectors = sector_decompose_occupations(nu);
  }
  return r;
}

inline EntanglementReport report(const ModelSpec& m, long L, const ReportOptions& opt = {}) {
  if (L < 1) throw InputError("block length must be >= 1");
  validate(m);
  const bool critical = classify_criticality(m).critical;
  const ToeplitzCoeffs c = coefficient_table(m, L - 1, opt.abs_tol);
  const Eigen::MatrixXd T = build_T(c, L);
  return make_report(m, critical, T, block_spectrum(T), opt);
}

} // namespace singlecopy
