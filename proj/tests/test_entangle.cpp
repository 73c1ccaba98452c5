#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "singlecopy/entangle.hpp"

using namespace singlecopy;

TEST(SingleCopyE1, Examples) {
  const SingleCopy a = single_copy_E1(0.3);
  EXPECT_EQ(a.M_max, 3.0);
  EXPECT_NEAR(a.E1_bits, std::log2(3.0), 1e-15);
  EXPECT_NEAR(a.e1_cont_bits, -std::log2(0.3), 1e-15);

  const SingleCopy b = single_copy_E1(1.0);
  EXPECT_EQ(b.M_max, 1.0);
  EXPECT_EQ(b.E1_bits, 0.0);

  const SingleCopy c = single_copy_E1(0.500001);
  EXPECT_EQ(c.M_max, 1.0);
  EXPECT_EQ(c.E1_bits, 0.0);
}

TEST(SingleCopyE1, ExactReciprocals) {
  for (int M = 1; M <= 1000; ++M) EXPECT_EQ(single_copy_E1(1.0 / M).M_max, static_cast<double>(M)) << M;
}

TEST(SingleCopyE1, Errors) {
  EXPECT_THROW(single_copy_E1(0.0), InputError);
  EXPECT_THROW(single_copy_E1(-0.1), InputError);
  EXPECT_THROW(single_copy_E1(1.0 + 1e-9), InputError);
  EXPECT_NO_THROW(single_copy_E1(1.0 + 1e-13));
  EXPECT_THROW(single_copy_E1_ln(0.1), InputError);
}

TEST(SingleCopyE1, SaturatesForTinyAlpha) {
  const SingleCopy s = single_copy_E1_ln(-100.0);
  EXPECT_TRUE(s.floor_saturated);
  EXPECT_NEAR(s.e1_cont_bits, 100.0 / std::log(2.0), 1e-12);
  EXPECT_EQ(s.E1_bits, s.e1_cont_bits);
}

TEST(SingleCopyProperty, FloorSandwich) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double a = u(rng);
    const SingleCopy s = single_copy_E1(a);
    EXPECT_LE(s.M_max * a, 1.0);
    EXPECT_GT((s.M_max + 1.0) * a, 1.0);
    EXPECT_LE(s.E1_bits, s.e1_cont_bits + 1e-12);
    EXPECT_GT(s.E1_bits, s.e1_cont_bits - 1.0);
  }
}

TEST(SortedSpectrumTest, Validation) {
  EXPECT_THROW(SortedSpectrum(std::vector<double>{}), InputError);
  EXPECT_THROW(SortedSpectrum({0.4, 0.6}), InputError);
  EXPECT_THROW(SortedSpectrum({0.6, 0.3}), InputError);
  EXPECT_THROW(SortedSpectrum({1.2, -0.2}), InputError);
  EXPECT_NO_THROW(SortedSpectrum::from_unsorted({0.4, 0.6}));
}

TEST(Nielsen, Examples) {
  EXPECT_TRUE(nielsen_transformable(SortedSpectrum({0.5, 0.5}), 2));
  EXPECT_FALSE(nielsen_transformable(SortedSpectrum({0.6, 0.4}), 2));
  EXPECT_TRUE(nielsen_transformable(SortedSpectrum({0.3, 0.3, 0.2, 0.2}), 3));
  EXPECT_TRUE(nielsen_transformable(SortedSpectrum({1.0}), 1));
}

TEST(NielsenProperty, LargestFeasibleIsFloor) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::size_t> len(1, 32);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto v = oracle::random_probability_vector(rng, len(rng));
    const SortedSpectrum s(v);
    const long brute = oracle::brute_force_nielsen(v);
    EXPECT_EQ(static_cast<double>(brute), single_copy_E1(v.front()).M_max);
    EXPECT_TRUE(nielsen_transformable(s, brute));
    EXPECT_FALSE(nielsen_transformable(s, brute + 1));
  }
}

TEST(Ep, TwoLevel) {
  const EpResult r = probabilistic_Ep(SortedSpectrum({0.75, 0.25}));
  EXPECT_NEAR(r.Ep_bits, 0.5, 1e-12);
  ASSERT_EQ(r.ensemble.size(), 2u);
  EXPECT_EQ(r.ensemble[0].first, 2);
  EXPECT_NEAR(r.ensemble[0].second, 0.5, 1e-12);
  EXPECT_EQ(r.ensemble[1].first, 1);
  EXPECT_NEAR(r.ensemble[1].second, 0.5, 1e-12);
}

TEST(Ep, MaximallyEntangled) {
  const EpResult r = probabilistic_Ep(SortedSpectrum({0.25, 0.25, 0.25, 0.25}));
  EXPECT_NEAR(r.Ep_bits, 2.0, 1e-12);
  ASSERT_EQ(r.ensemble.size(), 1u);
  EXPECT_EQ(r.ensemble[0].first, 4);
  EXPECT_NEAR(r.ensemble[0].second, 1.0, 1e-12);
}

TEST(Ep, ProductState) {
  const EpResult r = probabilistic_Ep(SortedSpectrum({1.0}));
  EXPECT_EQ(r.Ep_bits, 0.0);
}

// The linear program checked against brute-force vertex enumeration.
TEST(EpProperty, MatchesVertexEnumeration) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> len(2, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = oracle::random_probability_vector(rng, len(rng));
    const long d = static_cast<long>(v.size());
    // Variables p_2..p_d; rows l = 2..d: sum_M p_M (M - l + 1)/M <= tail_l.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d - 1, d - 1);
    Eigen::VectorXd b(d - 1), c(d - 1);
    for (long l = 2; l <= d; ++l) {
      double tail = 0.0;
      for (long j = l; j <= d; ++j) tail += v[static_cast<std::size_t>(j - 1)];
      b(l - 2) = tail;
      for (long M = l; M <= d; ++M) A(l - 2, M - 2) = static_cast<double>(M - l + 1) / M;
    }
    for (long M = 2; M <= d; ++M) c(M - 2) = std::log2(static_cast<double>(M));
    const double want = oracle::vertex_enumeration_max(A, b, c);
    const EpResult got = probabilistic_Ep(SortedSpectrum(v));
    EXPECT_NEAR(got.Ep_bits, want, 1e-10);
    double total = 0.0;
    for (const auto& [M, p] : got.ensemble) total += p;
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(EpProperty, BetweenE1AndEntropy) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<std::size_t> len(1, 32);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = oracle::random_probability_vector(rng, len(rng));
    const SortedSpectrum s(v);
    const EpResult r = probabilistic_Ep(s);
    EXPECT_GE(r.Ep_bits, single_copy_E1(v.front()).E1_bits - 1e-9);
    EXPECT_LE(r.Ep_bits, s.shannon_bits() + 1e-9);
  }
}

TEST(TopProducts, MatchesEnumeration) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> mu(8);
    for (double& m : mu) m = u(rng);
    mu[trial % 8] = trial % 3 == 0 ? 1.0 : mu[trial % 8];
    const auto full = oracle::full_product_spectrum(mu);
    const auto top = top_products(mu, 40);
    ASSERT_EQ(top.size(), 40u);
    for (std::size_t i = 0; i < top.size(); ++i) EXPECT_NEAR(top[i], full[i], 1e-15);
  }
}

TEST(TopProducts, PadsWithZeros) {
  const std::vector<double> mu{1.0, 1.0};
  // Only 2^L products exist.
  EXPECT_EQ(top_products(mu, 6), (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(Sectors, SingleMode) {
  const std::vector<double> nu{0.75};
  const auto s = sector_decompose_occupations(nu);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].weight, 0.25, 1e-15);
  EXPECT_NEAR(s[0].max_eigenvalue, 0.25, 1e-15);
  EXPECT_NEAR(s[1].weight, 0.75, 1e-15);
  EXPECT_NEAR(s[1].max_eigenvalue, 0.75, 1e-15);
}

TEST(Sectors, TwoModes) {
  const std::vector<double> nu{0.75, 0.6};
  const auto s = sector_decompose_occupations(nu);
  EXPECT_NEAR(s[1].weight, 0.45, 1e-15);
  EXPECT_NEAR(s[1].max_eigenvalue, 0.30, 1e-15);
}

TEST(Sectors, SymmetricBinomial) {
  const std::vector<double> nu{0.5, 0.5};
  const auto s = sector_decompose_occupations(nu);
  EXPECT_NEAR(s[0].weight, 0.25, 1e-15);
  EXPECT_NEAR(s[1].weight, 0.5, 1e-15);
  EXPECT_NEAR(s[2].weight, 0.25, 1e-15);
}

TEST(Sectors, Conventions) {
  const std::vector<double> mu{0.5};
  EXPECT_NEAR(sector_decompose(mu, Occupation::plus)[1].weight, 0.75, 1e-15);
  EXPECT_NEAR(sector_decompose(mu, Occupation::minus)[1].weight, 0.25, 1e-15);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(sector_decompose(bad), InputError);
}

TEST(SectorProperty, MatchesEnumeration) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> nu(1 + trial % 12);
    for (double& v : nu) v = u(rng);
    const auto s = sector_decompose_occupations(nu);
    const auto w = oracle::enumerate_sector_weights(nu);
    const auto mx = oracle::enumerate_sector_max(nu);
    double total = 0.0, envelope = 0.0, alpha1 = 1.0;
    for (double v : nu) alpha1 *= std::max(v, 1.0 - v);
    for (std::size_t N = 0; N < s.size(); ++N) {
      EXPECT_NEAR(s[N].weight, w[N], 1e-14);
      EXPECT_NEAR(s[N].max_eigenvalue, mx[N], 1e-14);
      EXPECT_LE(s[N].max_eigenvalue, s[N].weight + 1e-15);
      total += s[N].weight;
      envelope = std::max(envelope, s[N].max_eigenvalue);
    }
    EXPECT_NEAR(total, 1.0, 1e-13);
    EXPECT_NEAR(envelope, alpha1, 1e-14);
  }
}

TEST(Report, ConstantSymbol) {
  const EntanglementReport r = report(make_custom({1.0}, {}), 8);
  EXPECT_EQ(r.E1_bits, 0.0);
  EXPECT_NEAR(r.entropy_bits, 0.0, 1e-15);
  EXPECT_FALSE(r.critical);
}

TEST(Report, XxSingleSite) {
  const EntanglementReport r = report(make_xx(2.0), 1);
  EXPECT_NEAR(r.alpha1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.E1_bits, 0.0);
  EXPECT_NEAR(r.entropy_bits, oracle::h2(2.0 / 3.0), 1e-15);
  EXPECT_TRUE(r.critical);
}

TEST(Report, WithEpAndSectors) {
  ReportOptions opt;
  opt.with_Ep = true;
  opt.with_sectors = true;
  const EntanglementReport r = report(make_xx(2.0), 6, opt);
  ASSERT_TRUE(r.Ep_bits.has_value());
  EXPECT_FALSE(r.Ep_truncated);
  EXPECT_GE(*r.Ep_bits, r.E1_bits - 1e-9);
  EXPECT_LE(*r.Ep_bits, r.entropy_bits + 1e-9);
  ASSERT_TRUE(r.sectors.has_value());
  ASSERT_EQ(r.sectors->size(), 7u);
  double total = 0.0, envelope = 0.0;
  for (const Sector& s : *r.sectors) {
    total += s.weight;
    envelope = std::max(envelope, s.max_eigenvalue);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(envelope, r.alpha1, 1e-12);
}

TEST(Report, EpTruncatedOnLargeBlocks) {
  ReportOptions opt;
  opt.with_Ep = true;
  opt.Ep_dims = 64;
  const EntanglementReport r = report(make_xx(2.0), 32, opt);
  EXPECT_TRUE(r.Ep_truncated);
  EXPECT_GE(*r.Ep_bits, r.E1_bits - 1e-9);
}

TEST(Report, SectorsOnlyForIsotropic) {
  ReportOptions opt;
  opt.with_sectors = true;
  EXPECT_FALSE(report(make_ising(), 6, opt).sectors.has_value());
}

TEST(Report, RejectsBadLength) {
  EXPECT_THROW(report(make_xx(2.0), 0), InputError);
}
