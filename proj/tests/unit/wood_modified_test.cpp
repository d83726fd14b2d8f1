#include <gtest/gtest.h>

#include <random>

#include <qpgreen/qpgreen.hpp>

using namespace qpgreen;

TEST(Shift, BinomialWeights) {
  EXPECT_EQ(binomial_weights(0), std::vector<double>({1.0}));
  EXPECT_EQ(binomial_weights(3), std::vector<double>({1.0, -3.0, 3.0, -1.0}));
  EXPECT_EQ(binomial_weights(5), std::vector<double>({1.0, -5.0, 10.0, -10.0, 5.0, -1.0}));
}

TEST(Shift, WeightMoments) {
  for (int p = 1; p <= 5; ++p) {
    const auto a = binomial_weights(p);
    // sum_q q^m a_pq vanishes for m < p
    for (int m = 0; m < p; ++m) {
      double s = 0.0;
      for (int q = 0; q <= p; ++q) s += std::pow(q, m) * a[q];
      EXPECT_EQ(s, 0.0) << "p=" << p << " m=" << m;
    }
  }
}

TEST(Shift, GeneratingFunction) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> G(-10.0, 10.0), D(0.1, 3.0);
  for (int t = 0; t < 100; ++t) {
    const double g = G(rng), d = D(rng);
    const double th = std::remainder(g * d, two_pi);
    for (int p = 1; p <= 5; ++p) {
      const auto a = binomial_weights(p);
      cplx s = 0.0;
      for (int q = 0; q <= p; ++q) s += a[q] * std::polar(1.0, q * th);
      EXPECT_LT(std::abs(s - std::pow(1.0 - std::polar(1.0, th), p)), 1e-13);
    }
  }
}

TEST(Shift, ConfigValidation) {
  ShiftConfig sc;
  EXPECT_NO_THROW(sc.validate());
  sc.p = 6;
  EXPECT_THROW(sc.validate(), configuration_error);
  sc.p = 3;
  sc.d = 0.0;
  EXPECT_THROW(sc.validate(), configuration_error);
}

TEST(Shift, ModeFactorSeriesMatchesDirect) {
  // the small-|g| branch against the closed form just above its switch point
  for (int p = 1; p <= 5; ++p) {
    for (double z : {0.3, -0.2}) {
      const double span = std::abs(z) + p * 1.4;
      const cplx g(0.9e-3 / span, 0.0);
      const auto a = binomial_weights(p);
      cplx direct = 0.0;
      for (int q = 0; q <= p; ++q) direct += a[q] * std::exp(I * g * std::abs(z + q * 1.4));
      direct /= g;
      EXPECT_LT(std::abs(shifted_mode_factor(g, z, p, 1.4) - direct), 1e-9 * (1 + std::abs(direct)));
    }
  }
}

TEST(Shift, ModeFactorZeroGamma) {
  // g -> 0 limit: sum a_q i |z + q d|
  const double z = 0.4, d = 1.4;
  EXPECT_LT(std::abs(shifted_mode_factor(0.0, z, 1, d) - I * (z - (z + d))), 1e-15);
  EXPECT_LT(std::abs(shifted_mode_factor(0.0, z, 3, d)), 1e-14);
  EXPECT_THROW(shifted_mode_factor(0.0, z, 0, d), wood_error);
}

TEST(Shift, ShiftedMatchesFourierAwayFromWood) {
  QuasiPeriodicity qp(2.5, 1, 1);
  ShiftConfig sc;
  sc.d = 1.0;
  const EvalPoint p{0.15, -0.2, 0.4};
  const cplx ref = shifted_fourier_green(qp, sc, p);
  EXPECT_LT(std::abs(shifted_windowed_green(qp, WindowProfile{}, sc, 60.0, p) - ref) / std::abs(ref), 1e-3);
}

TEST(Shift, ShiftedFourierFiniteAtWood) {
  QuasiPeriodicity qp(two_pi, 1, 1);
  ShiftConfig sc;
  const cplx v = shifted_fourier_green(qp, sc, {0.1, 0.2, 0.5});
  EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  // continuity in k through the Wood point
  const cplx vp = shifted_fourier_green(QuasiPeriodicity(two_pi + 1e-7, 1, 1), sc, {0.1, 0.2, 0.5});
  EXPECT_LT(std::abs(v - vp), 1e-5);
}

TEST(Shift, ShiftedSumConvergesAtWood) {
  QuasiPeriodicity qp(two_pi, 1, 1);
  ShiftConfig sc;
  const EvalPoint p{0.23, 0.11, 0.5};
  const cplx ref = shifted_fourier_green(qp, sc, p);
  const double e20 = std::abs(shifted_windowed_green(qp, WindowProfile{}, sc, 20.0, p) - ref);
  const double e40 = std::abs(shifted_windowed_green(qp, WindowProfile{}, sc, 40.0, p) - ref);
  EXPECT_LT(e40, e20 / 2.0);  // a^{-3/2} would give 2.8
}

TEST(Regularizer, SolvesHelmholtz) {
  const double k = two_pi;
  QuasiPeriodicity qp(k, 1, 1);
  ShiftConfig sc;
  sc.b_value = {0.7, -0.2};
  const auto gs = grazing_set(qp, sc);
  ASSERT_EQ(gs.modes.size(), 4u);
  const EvalPoint p{0.3, 0.1, 0.2};
  const double h = 1e-3;
  auto v = [&](double x, double y, double z) { return regularizer_v(qp, sc, gs, {x, y, z}); };
  const cplx lap = (v(p.x + h, p.y, p.z) + v(p.x - h, p.y, p.z) + v(p.x, p.y + h, p.z) + v(p.x, p.y - h, p.z) +
                    v(p.x, p.y, p.z + h) + v(p.x, p.y, p.z - h) - 6.0 * v(p.x, p.y, p.z)) / (h * h);
  EXPECT_LT(std::abs(lap + k * k * v(p.x, p.y, p.z)) / (k * k * std::abs(v(p.x, p.y, p.z)) + 1e-300), 1e-4);
}

TEST(Regularizer, EmptyAwayFromWood) {
  QuasiPeriodicity qp(3.0, 1, 1);
  const auto gs = grazing_set(qp, ShiftConfig{});
  EXPECT_TRUE(gs.empty());
  EXPECT_EQ(regularizer_v(qp, ShiftConfig{}, gs, {0.1, 0.1, 0.1}), cplx(0.0, 0.0));
}

TEST(Modified, GradientMatchesCentralDifferences) {
  QuasiPeriodicity qp(two_pi, 1, 1);
  ShiftConfig sc;
  const auto gs = grazing_set(qp, sc);
  const WindowProfile w;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-0.5, 0.5), Z(0.2, 0.9);
  const double h = 1e-5;
  for (int t = 0; t < 5; ++t) {
    const EvalPoint p{U(rng), U(rng), Z(rng)};
    const CVec3 g = modified_green_gradient(qp, w, sc, gs, 6.0, p);
    auto G = [&](double x, double y, double z) { return modified_green(qp, w, sc, gs, 6.0, {x, y, z}); };
    const cplx fd[3] = {(G(p.x + h, p.y, p.z) - G(p.x - h, p.y, p.z)) / (2 * h),
                        (G(p.x, p.y + h, p.z) - G(p.x, p.y - h, p.z)) / (2 * h),
                        (G(p.x, p.y, p.z + h) - G(p.x, p.y, p.z - h)) / (2 * h)};
    const double scale = std::abs(g[0]) + std::abs(g[1]) + std::abs(g[2]);
    for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(g[i] - fd[i]) / scale, 1e-6);
  }
}

TEST(WoodFactor, MatchesClosedForm) {
  for (int p = 1; p <= 5; ++p)
    for (double gr : {0.3, 2.0, 5.5}) {
      const cplx g(gr, 0.0), b(0.2, 0.1);
      const cplx want = std::pow(1.0 - std::exp(I * g * 1.4), p) / g + b;
      EXPECT_LT(std::abs(wood_factor(g, p, 1.4, b) - want), 1e-13);
    }
  const cplx ge(0.0, 3.0);
  EXPECT_LT(std::abs(wood_factor(ge, 3, 1.4, 0.0) - std::pow(1.0 - std::exp(I * ge * 1.4), 3) / ge), 1e-13);
  EXPECT_LT(std::abs(wood_factor(cplx(0.5, 0.0), 0, 1.4, 0.0) - 2.0), 1e-15);
}

TEST(WoodFactor, ContinuousAtGrazing) {
  for (int p = 1; p <= 3; ++p) {
    const cplx at0 = wood_factor(0.0, p, 1.4, 1.0);
    const cplx near = wood_factor(cplx(1e-9, 0.0), p, 1.4, 1.0);
    EXPECT_LT(std::abs(at0 - near), 1e-8);
  }
  EXPECT_LT(std::abs(wood_factor(0.0, 1, 1.4, 0.0) - cplx(0.0, -1.4)), 1e-15);
}

TEST(WoodFactor, ThresholdSelectsB) {
  QuasiPeriodicity qp(two_pi, 1, 1);
  ShiftConfig sc;
  sc.b_value = 2.0;
  EXPECT_EQ(wood_factor(qp, sc, 1, 0), cplx(2.0, 0.0));  // p = 3: shift part vanishes
  const cplx g = gamma(qp, 0, 0);
  EXPECT_LT(std::abs(wood_factor(qp, sc, 0, 0) - std::pow(1.0 - std::exp(I * g * 1.4), 3) / g), 1e-13);
}

TEST(Shift, ValidateRejectsAnnihilatingDistance) {
  QuasiPeriodicity qp(1.0, 1, 1);
  ShiftConfig sc;
  sc.d = two_pi;  // gamma_00 d = 2 pi
  EXPECT_THROW(validate_shift(qp, sc), configuration_error);
  sc.d = 1.4;
  EXPECT_NO_THROW(validate_shift(qp, sc));
}
