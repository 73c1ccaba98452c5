#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "singlecopy/entangle.hpp"
#include "singlecopy/error.hpp"
#include "singlecopy/model.hpp"
#include "singlecopy/quadrature.hpp"
#include "singlecopy/toeplitz.hpp"

namespace singlecopy {

enum class Quantity { e1_cont_bits, E1_bits, entropy_bits, ln_absdet_T, rms_term_bits };

inline std::string_view to_string(Quantity q) {
  switch (q) {
  case Quantity::e1_cont_bits: return "e1_cont_bits";
  case Quantity::E1_bits: return "E1_bits";
  case Quantity::entropy_bits: return "entropy_bits";
  case Quantity::ln_absdet_T: return "ln_absdet_T";
  case Quantity::rms_term_bits: return "rms_term_bits";
  }
  return "";
}

inline Quantity quantity_from_string(std::string_view s) {
  for (Quantity q : {Quantity::e1_cont_bits, Quantity::E1_bits, Quantity::entropy_bits, Quantity::ln_absdet_T,
                     Quantity::rms_term_bits})
    if (to_string(q) == s) return q;
  throw InputError("unknown quantity '" + std::string(s) + "'");
}

struct ScanRow {
  long L = 0;
  double e1_cont_bits = 0.0;
  double E1_bits = 0.0;
  double entropy_bits = 0.0;
  double ln_absdet_T = 0.0;
  double rms_term_bits = 0.0;
  /// Empty when the row succeeded.
  std::string error;
  /// Singular values, kept only when requested.
  std::vector<double> mu;

  bool ok() const noexcept { return error.empty(); }

  double get(Quantity q) const {
    switch (q) {
    case Quantity::e1_cont_bits: return e1_cont_bits;
    case Quantity::E1_bits: return E1_bits;
    case Quantity::entropy_bits: return entropy_bits;
    case Quantity::ln_absdet_T: return ln_absdet_T;
    case Quantity::rms_term_bits: return rms_term_bits;
    }
    return 0.0;
  }
};

struct ScanSeries {
  ModelSpec model;
  std::vector<long> grid;
  std::vector<ScanRow> rows;
};

/// Geometric grid from L_min to L_max with `per_octave` points per doubling,
/// rounded to integers and deduplicated. L_max is always included.
inline std::vector<long> geometric_grid(long L_min, long L_max, int per_octave = 2) {
  if (L_min < 1 || L_max < L_min) throw InputError("grid needs 1 <= L_min <= L_max");
  if (per_octave < 1) throw InputError("grid needs at least one point per octave");
  std::vector<long> g;
  const double octaves = std::log2(static_cast<double>(L_max) / static_cast<double>(L_min));
  const long steps = static_cast<long>(std::floor(octaves * per_octave + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const long L = std::lround(static_cast<double>(L_min) * std::exp2(static_cast<double>(i) / per_octave));
    if (g.empty() || L > g.back()) g.push_back(std::min(L, L_max));
  }
  if (g.back() != L_max) g.push_back(L_max);
  return g;
}

inline constexpr long scan_max_L = 4096;

struct ScanOptions {
  double abs_tol = 1e-12;
  unsigned threads = 1;
  bool keep_spectra = false;
  /// Called once per finished row (serialized).
  std::function<void(const ScanRow&)> progress;
};

/// One row per grid point; coefficients are computed once for the largest L.
/// A failing row records its error instead of aborting the scan.
inline ScanSeries scan(const ModelSpec& m, const std::vector<long>& grid, const ScanOptions& opt = {}) {
  validate(m);
  if (grid.empty()) throw InputError("empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) throw InputError("grid values must be >= 1");
    if (i > 0 && grid[i] <= grid[i - 1]) throw InputError("grid must be strictly increasing");
  }
  if (grid.back() > scan_max_L) throw InputError("grid exceeds L = 4096");

  ScanSeries series{m, grid, std::vector<ScanRow>(grid.size())};
  const ToeplitzCoeffs coeffs = coefficient_table(m, grid.back() - 1, opt.abs_tol);

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      ScanRow row;
      row.L = grid[i];
      try {
        const BlockSpectrum s = block_spectrum(build_T(coeffs, row.L));
        const SingleCopy sc = single_copy_E1_ln(s.ln_alpha1);
        row.e1_cont_bits = sc.e1_cont_bits;
        row.E1_bits = sc.E1_bits;
        row.entropy_bits = s.entropy_bits;
        row.ln_absdet_T = s.ln_absdet_T;
        row.rms_term_bits = s.rms_term_bits;
        if (opt.keep_spectra) row.mu = s.mu;
      } catch (const Error& e) {
        row.error = e.what();
      }
      series.rows[i] = std::move(row);
      if (opt.progress) {
        std::lock_guard lock(report_mutex);
        opt.progress(series.rows[i]);
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(grid.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  return series;
}

// ---------------------------------------------------------------------------
// Fits

enum class Abscissa { log2_L, ln_L };

struct TwoTermFit {
  double a = 0.0;  // coefficient of log2 L
  double b = 0.0;  // coefficient of log2 log2 L
  double c = 0.0;
};

struct ScalingFit {
  std::string quantity;
  Abscissa abscissa = Abscissa::log2_L;
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  long L_min = 0;
  long L_max = 0;
  long points = 0;
  std::optional<TwoTermFit> two_term;
};

/// Ordinary least squares on a design matrix; throws on rank deficiency.
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw NumericalError("degenerate design matrix");
  return qr.solve(y);
}

/// Fits y = slope * x + intercept.
inline ScalingFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw InputError("fit needs at least 3 points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = x[static_cast<std::size_t>(i)];
    X(i, 1) = 1.0;
    Y(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd beta = least_squares(X, Y);
  ScalingFit f;
  f.slope = beta(0);
  f.intercept = beta(1);
  f.rms_residual = std::sqrt((X * beta - Y).squaredNorm() / static_cast<double>(n));
  f.points = n;
  return f;
}

/// Least squares of a scan quantity against log2 L over rows with
/// L_min <= L <= L_max (0 means unbounded). Failed and infinite rows are skipped.
inline ScalingFit fit_log(const ScanSeries& s, Quantity q, long L_min = 0, long L_max = 0, bool two_term = false) {
  std::vector<double> x, y;
  std::vector<long> used;
  for (const auto& r : s.rows) {
    if (!r.ok() || (L_min > 0 && r.L < L_min) || (L_max > 0 && r.L > L_max)) continue;
    const double v = r.get(q);
    if (!std::isfinite(v)) continue;
    x.push_back(std::log2(static_cast<double>(r.L)));
    y.push_back(v);
    used.push_back(r.L);
  }
  if (x.size() < 3) throw InputError("fit window holds fewer than 3 grid points");
  ScalingFit f = fit_line(x, y);
  f.quantity = std::string(to_string(q));
  f.L_min = used.front();
  f.L_max = used.back();
  if (two_term) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 4) throw InputError("two-term fit needs at least 4 points");
    if (used.front() < 3) throw InputError("two-term fit needs L >= 3");
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lx = x[static_cast<std::size_t>(i)];
      X(i, 0) = lx;
      X(i, 1) = std::log2(lx);
      X(i, 2) = 1.0;
      Y(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd b = least_squares(X, Y);
    f.two_term = TwoTermFit{b(0), b(1), b(2)};
  }
  return f;
}

/// True iff max - min of the quantity over the top octave (L >= L_max/2) is
/// below epsilon.
inline bool saturation_test(const ScanSeries& s, Quantity q, double epsilon = 0.01) {
  std::vector<long> ok_L;
  for (const auto& r : s.rows)
    if (r.ok()) ok_L.push_back(r.L);
  if (ok_L.empty()) throw InputError("scan has no successful rows");
  if (ok_L.back() < 4 * ok_L.front()) throw InputError("saturation test needs a grid spanning two octaves");
  const double top = 0.5 * static_cast<double>(ok_L.back());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : s.rows) {
    if (!r.ok() || static_cast<double>(r.L) < top) continue;
    lo = std::min(lo, r.get(q));
    hi = std::max(hi, r.get(q));
  }
  return hi - lo < epsilon;
}

// ---------------------------------------------------------------------------
// Determinant bound chain

/// The three terms of
///   -ln det[(1+|T|)/2]  vs  -(1/2) ln det[(1+T^T T)/2]  vs  -(1/2) ln|det T|
/// in natural-log units. Per factor, mean <= root-mean-square forces
/// lhs >= mid and (1+mu)/2 >= sqrt(mu) forces lhs <= rhs.
struct BoundChain {
  double lhs = 0.0;
  double mid = 0.0;
  double rhs = 0.0;  // +inf when some mu vanishes

  bool lhs_ge_mid(double tol = 1e-10) const { return lhs >= mid - tol; }
  bool lhs_le_rhs(double tol = 1e-10) const { return !std::isfinite(rhs) || lhs <= rhs + tol; }
};

inline BoundChain bound_chain(std::span<const double> mu) {
  BoundChain b;
  bool zero = false;
  for (double m : mu) {
    b.lhs -= std::log1p(-0.5 * (1.0 - m));
    b.mid -= 0.5 * std::log(0.5 * (1.0 + m * m));
    if (m < 1e-300)
      zero = true;
    else
      b.rhs -= 0.5 * std::log(m);
  }
  if (zero) b.rhs = std::numeric_limits<double>::infinity();
  return b;
}

inline BoundChain bound_chain(const BlockSpectrum& s) { return bound_chain(s.mu); }

// ---------------------------------------------------------------------------
// Fisher-Hartwig slope of -ln|det T_L|

struct FhFit {
  ScalingFit fit;  // -ln|det T_L| against ln L
  /// sum_j |beta_j|^2 from the jump list.
  double predicted_slope = 0.0;
  long excluded_rows = 0;
};

inline FhFit fh_slope(const ScanSeries& s) {
  FhFit r;
  std::vector<double> x, y;
  std::vector<long> used;
  for (const auto& row : s.rows) {
    if (!row.ok() || !std::isfinite(row.ln_absdet_T)) {
      ++r.excluded_rows;
      continue;
    }
    x.push_back(std::log(static_cast<double>(row.L)));
    y.push_back(-row.ln_absdet_T);
    used.push_back(row.L);
  }
  if (x.size() < 3) throw InputError("fh_slope needs at least 3 rows with finite determinant");
  r.fit = fit_line(x, y);
  r.fit.quantity = "neg_ln_absdet_T";
  r.fit.abscissa = Abscissa::ln_L;
  r.fit.L_min = used.front();
  r.fit.L_max = used.back();
  r.predicted_slope = classify_criticality(s.model).sum_beta_squared();
  return r;
}

inline FhFit fh_slope(const ModelSpec& m, const std::vector<long>& grid, const ScanOptions& opt = {}) {
  return fh_slope(scan(m, grid, opt));
}

// ---------------------------------------------------------------------------
// The XX-chain coefficient integral

struct IntegralCheck {
  double value_natural_log = 0.0;
  double value_log2 = 0.0;
  double error_estimate = 0.0;
};

/// ln[(1+|x|)/2] / (1 - x^2), written in u = 1 - |x| to keep the removable
/// 0/0 at |x| -> 1 accurate.
inline double coefficient_integrand(double x) {
  const double u = 1.0 - std::abs(x);
  if (u == 0.0) return -0.25;
  return std::log1p(-0.5 * u) / (u * (2.0 - u));
}

/// (2/pi^2) * integral_{-1}^{1} ln[(1+|x|)/2]/(1-x^2) dx by adaptive
/// Gauss-Legendre over the two halves.
inline IntegralCheck integral_check(double abs_tol = 1e-12) {
  if (!(abs_tol >= 1e-12)) throw InputError("integral_check needs abs_tol >= 1e-12");
  const double scale = 2.0 / (std::numbers::pi * std::numbers::pi);
  // Integrate in u on [0, 1]; the integrand is even in x.
  auto f = [](double u) { return coefficient_integrand(1.0 - u); };
  const auto half = quad::adaptive_integrate(f, 0.0, 1.0, 0.25 * abs_tol / scale);
  IntegralCheck r;
  r.value_natural_log = scale * 2.0 * half.value;
  r.value_log2 = r.value_natural_log / std::numbers::ln2;
  r.error_estimate = scale * 2.0 * half.error;
  if (r.error_estimate > abs_tol) throw AccuracyError("integral_check tolerance not met", r.error_estimate);
  return r;
}

} // namespace singlecopy
