#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "jmgt/kernel.hpp"

using namespace jmgt;

namespace {

// Independent mass oracle: adaptive Gauss-Kronrod of g over [0, inf).
double quadrature_mass(const MemoryKernel& k) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double s) { return k.g(s); }, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

MemoryKernel one_plus_s_exp(int points = 401, double s_max = 40.0) {
  std::vector<double> s, g;
  for (int i = 0; i < points; ++i) {
    const double x = s_max * i / (points - 1);
    s.push_back(x);
    g.push_back((1.0 + x) * std::exp(-x));
  }
  return MemoryKernel::tabulated(s, g);
}

}  // namespace

TEST(Kernel, ExponentialValuesAtZero) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0);
  const KernelValues v = k.eval(0.0);
  EXPECT_DOUBLE_EQ(v.g, 0.2);
  EXPECT_DOUBLE_EQ(v.dg, -0.2);
  EXPECT_DOUBLE_EQ(v.d2g, 0.2);
}

TEST(Kernel, DecaysAtInfinity) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0);
  EXPECT_LT(k.g(60.0), 1e-20);
  EXPECT_EQ(one_plus_s_exp().g(100.0), 0.0);
  EXPECT_EQ(MemoryKernel::none().g(3.0), 0.0);
}

TEST(Kernel, ExponentialDecayEquality) {
  const auto k = MemoryKernel::exponential(0.3, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(k.zeta(), 2.0);
  for (double s : {0.0, 0.3, 1.7, 5.0}) {
    const auto v = k.eval(s);
    EXPECT_NEAR(v.dg + k.zeta() * v.g, 0.0, 1e-15);
  }
}

TEST(Kernel, NegativeArgumentRejected) {
  EXPECT_THROW(MemoryKernel::exponential(0.2, 1.0, 1.0).eval(-1e-3), std::domain_error);
}

TEST(Kernel, MassAndModifiedSpeed) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0);
  EXPECT_NEAR(total_mass(k), 0.2, 1e-12);
  EXPECT_NEAR(quadrature_mass(k), total_mass(k), 1e-8);
  EXPECT_NEAR(c_g_squared(k, 1.0), 0.8, 1e-12);

  const auto k2 = MemoryKernel::exponential(0.5, 2.0, 0.5);
  EXPECT_NEAR(total_mass(k2), 0.5, 1e-12);
  EXPECT_NEAR(quadrature_mass(k2), 0.5, 1e-8);
  EXPECT_NEAR(c_g_squared(k2, 2.0), 1.5, 1e-12);
}

TEST(Kernel, MemorylessSpeed) {
  EXPECT_EQ(total_mass(MemoryKernel::none()), 0.0);
  EXPECT_EQ(c_g_squared(MemoryKernel::none(), 1.7), 1.7);
}

TEST(Kernel, MassAboveSpeedRejected) {
  EXPECT_THROW(c_g_squared(MemoryKernel::exponential(1.0, 1.0, 1.5), 1.0), std::invalid_argument);
}

TEST(Kernel, TabulatedMassMatchesQuadrature) {
  const auto k = one_plus_s_exp();
  // Monotone cubic interpolation is third order in the sample spacing.
  EXPECT_NEAR(k.mass(), 2.0, 1e-4);
  EXPECT_NEAR(k.integral(0.0, 1.0), 2.0 - 3.0 * std::exp(-1.0), 1e-4);
  EXPECT_NEAR(k.integral(0.0, 1.0) + k.integral(1.0, 50.0), k.mass(), 1e-13);
}

TEST(Kernel, IntegralClosedForm) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 2.0);
  EXPECT_NEAR(k.integral(0.0, std::numeric_limits<double>::infinity()), k.mass(), 1e-15);
  EXPECT_NEAR(k.integral(1.0, 3.0), 0.4 * (std::exp(-0.5) - std::exp(-1.5)), 1e-15);
  EXPECT_EQ(k.integral(2.0, 1.0), 0.0);
}

TEST(Kernel, AssumptionsHoldForExponential) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0);
  const auto r = check_assumptions(k, 1.0, uniform_s_grid(30.0, 300), 1e-12);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.decay.worst, 0.0);
  EXPECT_EQ(r.positivity.worst, 0.0);
  EXPECT_EQ(r.convexity.worst, 0.0);
}

TEST(Kernel, OverstatedDecayRateFails) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0).with_zeta(2.0);
  const auto r = check_assumptions(k, 1.0, uniform_s_grid(30.0, 300), 1e-12);
  EXPECT_FALSE(r.decay.pass);
  // g' + 2g = g is largest at s = 0.
  EXPECT_NEAR(r.decay.worst, 0.2, 1e-12);
  EXPECT_EQ(r.decay.at, 0.0);
  EXPECT_TRUE(r.convexity.pass);
}

TEST(Kernel, FlatStartFailsDecay) {
  const auto k = one_plus_s_exp().with_zeta(1.0);
  const auto r = check_assumptions(k, 3.0, uniform_s_grid(40.0, 400), 1e-9);
  EXPECT_FALSE(r.decay.pass);
  // g' + g = e^{-s}, worst at the origin.
  EXPECT_NEAR(r.decay.worst, 1.0, 0.1);
  EXPECT_LT(r.decay.at, 0.2);
  // g'' = (s - 1) e^{-s} < 0 on [0, 1).
  EXPECT_FALSE(r.convexity.pass);
}

TEST(Kernel, MassBoundChecked) {
  const auto k = MemoryKernel::exponential(0.2, 1.0, 1.0);
  EXPECT_FALSE(check_assumptions(k, 0.1, uniform_s_grid(30.0, 100), 1e-12).positivity.pass);
  EXPECT_FALSE(check_assumptions(MemoryKernel::none(), 1.0, uniform_s_grid(30.0, 100), 1e-12)
                   .positivity.pass);
}

TEST(Kernel, TabulatedDefaultDecayRate) {
  std::vector<double> s, g;
  for (int i = 0; i <= 200; ++i) {
    s.push_back(0.1 * i);
    g.push_back(std::exp(-2.0 * s.back()));
  }
  const auto k = MemoryKernel::tabulated(s, g);
  // Sample derivatives come from the interpolant, not from the exact kernel.
  EXPECT_NEAR(k.zeta(), 2.0, 0.2);
  EXPECT_NEAR(k.mass(), 0.5, 1e-3);
}

TEST(Kernel, TabulatedValidation) {
  EXPECT_THROW(MemoryKernel::tabulated({0, 1, 2}, {1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(MemoryKernel::tabulated({0.1, 1, 2, 3}, {1, 1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(MemoryKernel::tabulated({0, 1, 1, 3}, {1, 1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(MemoryKernel::exponential(0.2, -1.0, 1.0), std::invalid_argument);
}

TEST(Kernel, CsvLoad) {
  const auto path = std::filesystem::temp_directory_path() / "jmgt_kernel_test.csv";
  {
    std::ofstream out(path);
    out << "s,g\n# comment\n";
    for (int i = 0; i <= 100; ++i) out << 0.1 * i << "," << std::exp(-0.1 * i) << "\n";
  }
  const auto k = load_kernel_csv(path.string());
  EXPECT_EQ(k.kind(), KernelKind::tabulated);
  EXPECT_NEAR(k.g(0.55), std::exp(-0.55), 1e-4);
  std::filesystem::remove(path);
  EXPECT_THROW(load_kernel_csv(path.string()), std::runtime_error);
}
