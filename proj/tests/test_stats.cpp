#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "vitalsforge/stats.hpp"

using namespace vitalsforge::stats;

TEST(SampleMeanSd, ConstantSeries) {
  const std::vector<double> v{5, 5, 5};
  const auto r = sample_mean_sd(v);
  EXPECT_DOUBLE_EQ(r.mean, 5.0);
  EXPECT_DOUBLE_EQ(r.sd, 0.0);
}

TEST(SampleMeanSd, OneToTen) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto r = sample_mean_sd(v);
  EXPECT_DOUBLE_EQ(r.mean, 5.5);
  EXPECT_NEAR(r.sd, std::sqrt(82.5 / 9.0), 1e-12);
  EXPECT_NEAR(r.sd, 3.02765, 1e-5);
}

TEST(SampleMeanSd, SingleValueHasZeroSd) {
  const std::vector<double> v{7.2};
  const auto r = sample_mean_sd(v);
  EXPECT_DOUBLE_EQ(r.mean, 7.2);
  EXPECT_DOUBLE_EQ(r.sd, 0.0);
}

TEST(SampleMeanSd, EmptyThrows) { EXPECT_THROW(sample_mean_sd(std::vector<double>{}), std::invalid_argument); }

TEST(SampleMeanSd, TranslationEquivariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(2.0, 3.0);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = x[i] + 17.25;
  }
  const auto a = sample_mean_sd(x), b = sample_mean_sd(y);
  EXPECT_NEAR(b.mean, a.mean + 17.25, 1e-12);
  EXPECT_NEAR(b.sd, a.sd, 1e-12);
}

TEST(NormalPpf, KnownValues) {
  EXPECT_NEAR(normal_ppf(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_ppf(0.75), 0.67448975, 1e-8);
  EXPECT_NEAR(normal_ppf(0.25, {10.0, 2.0}), 8.6510205, 1e-7);
}

TEST(NormalPpf, RejectsInvalidArguments) {
  EXPECT_THROW(normal_ppf(0.0), std::invalid_argument);
  EXPECT_THROW(normal_ppf(1.0), std::invalid_argument);
  EXPECT_THROW(normal_ppf(-0.1), std::invalid_argument);
  EXPECT_THROW(normal_ppf(0.5, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(normal_ppf(0.5, {0.0, -1.0}), std::invalid_argument);
}

TEST(NormalPpf, MatchesBisectionOracle) {
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double p = std::pow(10.0, -12.0 + 11.7 * i / 400.0);  // 1e-12 .. ~0.5
    for (double q : {p, 1.0 - p}) {
      if (!(q > 0.0 && q < 1.0)) continue;
      worst = std::max(worst, std::fabs(normal_ppf(q) - oracle::normal_quantile(q)));
    }
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(NormalPpf, SymmetryAndRoundTrip) {
  const NormalParams np{3.0, 1.5};
  for (double p = 0.001; p < 0.5; p += 0.0137) EXPECT_NEAR(normal_ppf(p, np) + normal_ppf(1 - p, np), 6.0, 1e-8);
  for (double x = -6.0; x <= 6.0; x += 0.25) {
    const double v = np.mu + x * np.sigma;
    EXPECT_NEAR(normal_ppf(normal_cdf(v, np), np), v, 1e-7) << "x=" << x;
  }
}

TEST(NormalPdf, ClosedForm) {
  EXPECT_NEAR(normal_pdf(0.0), 0.3989423, 1e-7);
  EXPECT_NEAR(normal_pdf(1.0), 0.2419707, 1e-7);
  EXPECT_NEAR(normal_pdf(4.0, {4.0, 2.0}), 1.0 / (2.0 * std::sqrt(2.0 * M_PI)), 1e-15);
  EXPECT_THROW(normal_pdf(0.0, {0.0, 0.0}), std::invalid_argument);
}

TEST(PearsonMatrix, HandExample) {
  const std::vector<NamedColumn> cols{{"x", {1, 2, 3}}, {"y", {1, 2, 4}}};
  const auto m = pearson_matrix(cols);
  ASSERT_EQ(m.names.size(), 2u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.at(1, 1), 1.0);
  // cov = 1.5, sd_x = 1, sd_y = sqrt(7/3)
  EXPECT_NEAR(m.at(0, 1), 1.5 / std::sqrt(7.0 / 3.0), 1e-12);
  EXPECT_NEAR(m.at(0, 1), 0.98198, 1e-5);
  EXPECT_DOUBLE_EQ(m.at(0, 1), m.at(1, 0));
}

TEST(PearsonMatrix, NegationAndAffineInvariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::vector<double> x(40), neg(40), y(40), y_affine(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = n(rng);
    neg[i] = -x[i];
    y[i] = 0.4 * x[i] + n(rng);
    y_affine[i] = 3.5 * y[i] - 12.0;
  }
  const std::vector<NamedColumn> a{{"x", x}, {"neg", neg}, {"y", y}};
  const std::vector<NamedColumn> b{{"x", x}, {"neg", neg}, {"y", y_affine}};
  const auto ma = pearson_matrix(a), mb = pearson_matrix(b);
  EXPECT_NEAR(ma.at(0, 1), -1.0, 1e-12);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(ma.at(i, j), mb.at(i, j), 1e-10);
      EXPECT_LE(std::fabs(ma.at(i, j)), 1.0);
    }
}

TEST(PearsonMatrix, Errors) {
  EXPECT_THROW(pearson_matrix(std::vector<NamedColumn>{{"a", {1, 1, 1}}, {"b", {1, 2, 3}}}), std::invalid_argument);
  EXPECT_THROW(pearson_matrix(std::vector<NamedColumn>{{"a", {1, 2}}, {"b", {1, 2, 3}}}), std::invalid_argument);
}
