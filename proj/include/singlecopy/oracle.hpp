#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "singlecopy/entangle.hpp"
#include "singlecopy/error.hpp"
#include "singlecopy/model.hpp"
#include "singlecopy/toeplitz.hpp"

namespace singlecopy {

/// Open chain of n sites with the couplings of `model`.
///
/// In the Majorana layout m = (x_1, y_1, x_2, y_2, ...) with
/// a_j = (x_j - i y_j)/2 the Hamiltonian is H = (i/4) m^T h m + const, where
/// h couples only x to y: h_{x_j, y_k} = 2 B_{j-k} - A_{j-k} =: K_{jk}.
struct FiniteChain {
  ModelSpec model;
  long n = 0;
  Eigen::MatrixXd K;  // n x n x-y coupling block

  /// The full 2n x 2n skew-symmetric quadratic form.
  Eigen::MatrixXd quadratic_form() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (long j = 0; j < n; ++j)
      for (long k = 0; k < n; ++k) {
        h(2 * j, 2 * k + 1) = K(j, k);
        h(2 * k + 1, 2 * j) = -K(j, k);
      }
    return h;
  }
};

inline FiniteChain build_finite_chain(const ModelSpec& m, long n) {
  validate(m);
  if (n < 1) throw InputError("chain length must be >= 1");
  FiniteChain c{m, n, Eigen::MatrixXd::Zero(n, n)};
  const long w = static_cast<long>(m.w());
  for (long j = 0; j < n; ++j)
    for (long k = std::max(0L, j - w); k <= std::min(n - 1, j + w); ++k)
      c.K(j, k) = 2.0 * m.B_at(j - k) - m.A_at(j - k);
  return c;
}

inline long centered_offset(long n, long L) { return (n - L) / 2; }

struct FiniteGaussianResult {
  BlockSpectrum spectrum;
  /// Smallest single-particle excitation energy.
  double gap = 0.0;
  /// Smallest excitation energy above the zero-mode threshold; differs from
  /// `gap` when the open chain carries edge zero modes.
  double bulk_gap = 0.0;
  /// Some normal mode had energy below 1e-10 and was left half filled.
  bool degenerate = false;
};

inline constexpr double zero_mode_tol = 1e-10;

/// Exact ground-state block spectrum of the open chain.
///
/// With K = U S V^T the orthogonal map diag(U^T, V^T) brings h to canonical
/// form; filling every negative-energy mode gives the x-y covariance block
/// P = U V^T (the orthogonal polar factor of K). Zero modes contribute zero.
inline FiniteGaussianResult finite_gaussian_ground(const ModelSpec& m, long n, long L) {
  if (L < 1 || L > n) throw InputError("need 1 <= L <= n");
  if (n > 4096) throw InputError("chain length exceeds 4096");
  const FiniteChain chain = build_finite_chain(m, n);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(chain.K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw DecompositionError("decomposition failure: normal-mode SVD");
  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double residue = std::max({(U.transpose() * U - I).cwiseAbs().maxCoeff(),
                                   (V.transpose() * V - I).cwiseAbs().maxCoeff(),
                                   (U * s.asDiagonal() * V.transpose() - chain.K).cwiseAbs().maxCoeff()});
  if (residue > 1e-8) throw DecompositionError("decomposition failure: canonical form residue " + std::to_string(residue));

  FiniteGaussianResult r;
  r.gap = s.minCoeff();
  long filled = 0;
  r.bulk_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= zero_mode_tol) {
      ++filled;
      r.bulk_gap = std::min(r.bulk_gap, s(i));
    } else {
      r.degenerate = true;
    }
  }
  const Eigen::MatrixXd P = U.leftCols(filled) * V.leftCols(filled).transpose();
  const long off = centered_offset(n, L);
  r.spectrum = block_spectrum(P.block(off, off, L, L));
  return r;
}

// ---------------------------------------------------------------------------
// Fock-space exact diagonalization

inline constexpr long ed_max_sites = 12;

namespace detail {

/// Fermionic sign for acting on site j of occupation bitmask s
/// (creation operators ordered by ascending site index).
inline double jw_sign(std::uint32_t s, long j) {
  const std::uint32_t below = s & ((std::uint32_t{1} << j) - 1u);
  return (std::popcount(below) & 1) ? -1.0 : 1.0;
}

/// Applies a_j (create = false) or a_j^+ (create = true). Returns false when
/// the result vanishes.
inline bool apply_op(std::uint32_t& s, double& amp, long j, bool create) {
  const std::uint32_t bit = std::uint32_t{1} << j;
  if (create == static_cast<bool>(s & bit)) return false;
  amp *= jw_sign(s, j);
  s ^= bit;
  return true;
}

} // namespace detail

/// Dense 2^n x 2^n Hamiltonian in the occupation basis (bit j = site j).
inline Eigen::MatrixXd ed_hamiltonian(const ModelSpec& m, long n) {
  validate(m);
  if (n < 1 || n > ed_max_sites) throw InputError("exact diagonalization needs 1 <= n <= 12");
  const std::uint32_t dim = std::uint32_t{1} << n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  const long w = static_cast<long>(m.w());
  for (std::uint32_t in = 0; in < dim; ++in) {
    for (long j = 0; j < n; ++j) {
      for (long k = std::max(0L, j - w); k <= std::min(n - 1, j + w); ++k) {
        const double a = m.A_at(j - k);
        const double b = m.B_at(j - k);
        // A_{j-k} a_j^+ a_k
        if (a != 0.0) {
          std::uint32_t s = in;
          double amp = a;
          if (detail::apply_op(s, amp, k, false) && detail::apply_op(s, amp, j, true)) H(s, in) += amp;
        }
        if (b != 0.0) {
          // B_{j-k} a_j^+ a_k^+
          std::uint32_t s = in;
          double amp = b;
          if (detail::apply_op(s, amp, k, true) && detail::apply_op(s, amp, j, true)) H(s, in) += amp;
          // -B_{j-k} a_j a_k
          s = in;
          amp = -b;
          if (detail::apply_op(s, amp, k, false) && detail::apply_op(s, amp, j, false)) H(s, in) += amp;
        }
      }
    }
  }
  return H;
}

struct EdGround {
  Eigen::VectorXd vector;
  double energy = 0.0;
  double gap = 0.0;
};

inline constexpr double ed_gap_tol = 1e-8;

/// Ground vector of the dense Hamiltonian; refuses degenerate ground states.
inline EdGround ed_ground(const ModelSpec& m, long n) {
  const Eigen::MatrixXd H = ed_hamiltonian(m, n);
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw NumericalError("ED Hamiltonian is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw DecompositionError("decomposition failure: ED eigensolver");
  EdGround g;
  g.energy = es.eigenvalues()(0);
  g.gap = es.eigenvalues().size() > 1 ? es.eigenvalues()(1) - es.eigenvalues()(0) : 0.0;
  if (g.gap <= ed_gap_tol) throw DegenerateGroundState(g.gap);
  g.vector = es.eigenvectors().col(0);
  return g;
}

/// Sorted eigenvalues of the reduced state on sites [off, off + L).
inline std::vector<double> reduced_spectrum(const Eigen::VectorXd& psi, long n, long off, long L) {
  const std::uint32_t dim_b = std::uint32_t{1} << L;
  const std::uint32_t dim_e = std::uint32_t{1} << (n - L);
  const std::uint32_t block_mask = ((std::uint32_t{1} << L) - 1u) << off;
  Eigen::MatrixXd Psi = Eigen::MatrixXd::Zero(dim_b, dim_e);
  for (std::uint32_t s = 0; s < (std::uint32_t{1} << n); ++s) {
    const std::uint32_t b = (s & block_mask) >> off;
    const std::uint32_t low = s & ((std::uint32_t{1} << off) - 1u);
    const std::uint32_t high = s >> (off + L);
    const std::uint32_t e = low | (high << off);
    Psi(b, e) = psi(s);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Psi);
  if (svd.info() != Eigen::Success) throw DecompositionError("decomposition failure: Schmidt SVD");
  std::vector<double> p(dim_b, 0.0);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) p[i] = svd.singularValues()(i) * svd.singularValues()(i);
  std::sort(p.begin(), p.end(), std::greater<>());
  return p;
}

struct EdResult {
  SortedSpectrum spectrum;
  double gap = 0.0;
  double energy = 0.0;
};

inline EdResult exact_diag_ground(const ModelSpec& m, long n, long L) {
  if (n > ed_max_sites) throw InputError("exact diagonalization limited to n <= 12");
  if (L < 1 || L > n) throw InputError("need 1 <= L <= n");
  const EdGround g = ed_ground(m, n);
  return {SortedSpectrum(reduced_spectrum(g.vector, n, centered_offset(n, L), L)), g.gap, g.energy};
}

// ---------------------------------------------------------------------------

enum class MethodPair { gaussian_vs_ed, gaussian_vs_thermodynamic };

inline std::string_view to_string(MethodPair p) {
  return p == MethodPair::gaussian_vs_ed ? "gaussian-vs-ed" : "gaussian-vs-thermodynamic";
}

inline MethodPair method_pair_from_string(std::string_view s) {
  if (s == "gaussian-vs-ed" || s == "ed") return MethodPair::gaussian_vs_ed;
  if (s == "gaussian-vs-thermodynamic" || s == "thermodynamic") return MethodPair::gaussian_vs_thermodynamic;
  throw InputError("unknown method pair '" + std::string(s) + "'");
}

struct OracleComparison {
  ModelSpec model;
  long n = 0;
  long L = 0;
  double gap = 0.0;
  double max_abs_diff = 0.0;
  std::vector<double> spectrum_gaussian;
  std::vector<double> spectrum_reference;
  MethodPair method_pair = MethodPair::gaussian_vs_ed;
  bool degenerate = false;
  /// ED mismatch above 1e-6 although the gap exceeds 1e-6.
  bool pipeline_defect = false;
};

inline constexpr std::size_t oracle_top = 64;

inline OracleComparison compare_oracle(const ModelSpec& m, long n, long L, MethodPair pair,
                                       double abs_tol = 1e-12) {
  OracleComparison c;
  c.model = m;
  c.n = n;
  c.L = L;
  c.method_pair = pair;
  const FiniteGaussianResult fg = finite_gaussian_ground(m, n, L);
  c.degenerate = fg.degenerate;
  c.spectrum_gaussian = top_products(fg.spectrum.mu, oracle_top);
  if (pair == MethodPair::gaussian_vs_ed) {
    const EdResult ed = exact_diag_ground(m, n, L);
    c.gap = ed.gap;
    const auto v = ed.spectrum.values();
    c.spectrum_reference.assign(v.begin(), v.begin() + static_cast<long>(std::min(v.size(), oracle_top)));
  } else {
    c.gap = fg.gap;
    const ToeplitzCoeffs coeffs = coefficient_table(m, L - 1, abs_tol);
    c.spectrum_reference = top_products(block_spectrum(build_T(coeffs, L)).mu, oracle_top);
  }
  const std::size_t len = std::max(c.spectrum_gaussian.size(), c.spectrum_reference.size());
  c.spectrum_gaussian.resize(len, 0.0);
  c.spectrum_reference.resize(len, 0.0);
  for (std::size_t i = 0; i < len; ++i)
    c.max_abs_diff = std::max(c.max_abs_diff, std::abs(c.spectrum_gaussian[i] - c.spectrum_reference[i]));
  c.pipeline_defect = pair == MethodPair::gaussian_vs_ed && c.max_abs_diff > 1e-6 && c.gap > 1e-6;
  return c;
}

} // namespace singlecopy
