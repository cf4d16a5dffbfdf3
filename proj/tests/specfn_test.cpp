#include "mrace/specfn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace mrace::specfn {
namespace {

// Reference values computed with mpmath at 50 digits (tests/oracles/specfn_reference.py).
struct Ref1 {
  double x;
  double expected;
};
struct Ref2 {
  double x;
  double a;
  double expected;
};
struct Ref3 {
  double x;
  double a;
  double b;
  double expected;
};

TEST(LogGamma, Examples) {
  EXPECT_EQ(log_gamma(1.0), 0.0);
  EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-15);
  // Gamma(1/2) = sqrt(pi)
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
}

TEST(LogGamma, HighPrecisionReference) {
  const std::vector<Ref1> refs = {
      {0.001, 6.9071788853838536825},   {0.5, 0.57236494292470008707},
      {1.5, -0.12078223763524522235},   {2.5, 0.28468287047291915963},
      {7.25, 7.0521854507385394449},    {10, 12.801827480081469611},
      {33.3, 82.603723581654952928},    {170.5, 704.00442773420467079},
      {1000, 5905.2204232091812118},    {123456.75, 1323901.5615730142338},
      {1000000, 12815504.56914761166},
  };
  for (const auto& r : refs) {
    EXPECT_LE(std::fabs(log_gamma(r.x) - r.expected), 1e-13 * std::fabs(r.expected)) << r.x;
  }
  EXPECT_NEAR(log_gamma(2.0), 0.0, 1e-15);
}

TEST(LogGamma, DomainErrors) {
  EXPECT_THROW(log_gamma(0.0), DomainError);
  EXPECT_THROW(log_gamma(-1.5), DomainError);
  EXPECT_THROW(log_gamma(std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(log_gamma(std::nan("")), DomainError);
}

TEST(RegIncBeta, Examples) {
  EXPECT_NEAR(reg_inc_beta(0.7, 1, 1), 0.7, 1e-15);
  EXPECT_NEAR(reg_inc_beta(0.5, 3, 3), 0.5, 1e-15);
  // a = 1: I_x(1, b) = 1 - (1 - x)^b
  EXPECT_NEAR(reg_inc_beta(1.0 / 3.0, 1, 2), 5.0 / 9.0, 1e-15);
  EXPECT_EQ(reg_inc_beta(0.0, 2, 3), 0.0);
  EXPECT_EQ(reg_inc_beta(1.0, 2, 3), 1.0);
}

TEST(RegIncBeta, HighPrecisionReference) {
  const std::vector<Ref3> refs = {
      {0.3, 2, 5, 0.579825},
      {0.9, 0.5, 0.5, 0.79516723530086654835},
      {0.01, 1.5, 20, 0.061203714783459008591},
      {0.5, 10, 10, 0.5},
      {0.7, 50, 20, 0.38250924838123355766},
      {0.45, 1000, 1200, 0.33466234267154093457},
      {0.5, 10000, 10000, 0.5},
      {0.499, 10000, 10000, 0.38864995214253764586},
      {0.3, 3000, 7000, 0.5011607691362499594},
      {0.2, 1, 30, 0.99876205996071461973},
      {0.999, 200, 1, 0.81864882947863570556},
      {0.05, 0.2, 3.7, 0.74342145068593342598},
      {0.6, 1e4, 6000, 4.5778839895661832826e-11},
      {0.75, 37, 12, 0.44477107910136010169},
  };
  for (const auto& r : refs) {
    EXPECT_NEAR(reg_inc_beta(r.x, r.a, r.b), r.expected, 1e-13)
        << "x=" << r.x << " a=" << r.a << " b=" << r.b;
  }
}

TEST(RegIncBeta, DomainErrors) {
  EXPECT_THROW(reg_inc_beta(-0.1, 1, 1), DomainError);
  EXPECT_THROW(reg_inc_beta(1.1, 1, 1), DomainError);
  EXPECT_THROW(reg_inc_beta(0.5, 0, 1), DomainError);
  EXPECT_THROW(reg_inc_beta(0.5, 1, -2), DomainError);
}

TEST(RegIncBeta, ReflectionProperty) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::uniform_real_distribution<double> log_shape(std::log(0.1), std::log(5000.0));
  for (int i = 0; i < 2000; ++i) {
    const double x = ux(rng);
    const double a = std::exp(log_shape(rng));
    const double b = std::exp(log_shape(rng));
    ASSERT_NEAR(reg_inc_beta(x, a, b) + reg_inc_beta(1.0 - x, b, a), 1.0, 1e-12)
        << x << " " << a << " " << b;
  }
}

TEST(RegIncBeta, MonotoneInX) {
  for (double a : {0.3, 1.0, 4.5, 80.0}) {
    for (double b : {0.7, 2.0, 33.0}) {
      double prev = 0.0;
      for (int i = 0; i <= 400; ++i) {
        const double v = reg_inc_beta(i / 400.0, a, b);
        ASSERT_GE(v, prev - 1e-15);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
        prev = v;
      }
    }
  }
}

TEST(RegIncBeta, StrictlyIncreasingProbe) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int probe = 0; probe < 50; ++probe) {
    BetaMonotoneProbe p;
    p.n1 = 0.2 + 20.0 * u(rng);
    p.N = 30.0 * u(rng);
    p.K = p.N * u(rng);
    double prev = -1.0;
    for (int nm = 1; nm <= 60; ++nm) {
      p.nm = nm;
      const double v = p.value();
      ASSERT_GT(v - prev, 1e-14) << "n1=" << p.n1 << " K=" << p.K << " N=" << p.N << " nm=" << nm;
      prev = v;
    }
  }
}

TEST(GammaSf, Examples) {
  EXPECT_NEAR(gamma_sf(1.0, 1.0), std::exp(-1.0), 1e-16);
  EXPECT_EQ(gamma_sf(0.0, 7.3), 1.0);
  // Conjugate Poisson sum: e^-2.5 (1 + 2.5 + 2.5^2 / 2)
  EXPECT_NEAR(gamma_sf(2.5, 3.0), std::exp(-2.5) * (1.0 + 2.5 + 2.5 * 2.5 / 2.0), 1e-15);
}

TEST(GammaSf, HighPrecisionReference) {
  const std::vector<Ref2> refs = {
      {2.5, 3, 0.543813115883329518},
      {0.1, 0.5, 0.6547208460185770294},
      {3, 2.2, 0.24012433287727829101},
      {10, 10, 0.45792971447185220831},
      {100, 120, 0.97176960603513430726},
      {5000, 5000, 0.49811936596618264465},
      {4900, 5000, 0.9220550437734860861},
      {1, 200, 1.0},
      {250, 200, 0.00048221275959343373909},
      {0.5, 30.5, 1.0},
      {40, 7.3, 4.8875110652879985167e-11},
      {1e4, 1e4, 0.49867019166004479962},
  };
  for (const auto& r : refs) {
    EXPECT_NEAR(gamma_sf(r.x, r.a), r.expected, 1e-13) << "x=" << r.x << " shape=" << r.a;
    EXPECT_NEAR(gamma_cdf(r.x, r.a), 1.0 - r.expected, 1e-13) << "x=" << r.x << " shape=" << r.a;
  }
}

TEST(GammaSf, DomainErrors) {
  EXPECT_THROW(gamma_sf(-1.0, 2.0), DomainError);
  EXPECT_THROW(gamma_sf(1.0, 0.0), DomainError);
  EXPECT_THROW(gamma_cdf(1.0, -3.0), DomainError);
}

TEST(PoissonCdf, Examples) {
  EXPECT_NEAR(poisson_cdf(0, 1.0), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(poisson_cdf(2, 2.5), gamma_sf(2.5, 3.0), 1e-15);
  EXPECT_NEAR(poisson_cdf(1'000'000, 1.0), 1.0, 1e-15);
}

TEST(PoissonCdf, HighPrecisionReference) {
  struct R {
    std::int64_t k;
    double lambda;
    double expected;
  };
  const std::vector<R> refs = {
      {2, 2.5, 0.543813115883329518},
      {0, 1, 0.3678794411714423216},
      {10, 3.7, 0.99842781899908231527},
      {399, 400, 0.4933508701610945286},
      {99, 100, 0.48670120172085133514},
      {24, 25, 0.47339846855634935672},
      {1000, 1100, 0.0011752305681365552962},
      {8000, 8000, 0.50297349270007328964},
      {20000, 20100, 0.24158206644060430642},
      {3, 50, 4.2691592051449344182e-18},
      {50, 10, 0.99999999999999999996},
  };
  for (const auto& r : refs) {
    EXPECT_NEAR(poisson_cdf(r.k, r.lambda), r.expected, 1e-13) << r.k << " " << r.lambda;
  }
  EXPECT_NEAR(poisson_cdf(3, 50) / 4.2691592051449344182e-18, 1.0, 1e-12);
}

TEST(PoissonCdf, DomainErrors) {
  EXPECT_THROW(poisson_cdf(3, 0.0), DomainError);
  EXPECT_THROW(poisson_cdf(3, -1.0), DomainError);
  EXPECT_THROW(poisson_cdf(-1, 1.0), DomainError);
}

TEST(Conjugacy, GammaTailEqualsPoissonCdf) {
  double worst = 0.0;
  for (int n = 1; n <= 200; ++n) {
    for (int i = 1; i <= 500; ++i) {
      const double lambda = 0.1 * i;
      worst = std::max(worst, std::fabs(gamma_sf(lambda, n) - poisson_cdf(n - 1, lambda)));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(StdNormalCdf, Examples) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_cdf(40.0), 1.0, 1e-15);
  // Composite Simpson quadrature of the density on [0, 1.96].
  const int n = 2000;
  const double h = 1.96 / n;
  double s = std_normal_pdf(0.0) + std_normal_pdf(1.96);
  for (int i = 1; i < n; ++i) {
    s += (i % 2 ? 4.0 : 2.0) * std_normal_pdf(i * h);
  }
  const double oracle = 0.5 + s * h / 3.0;
  EXPECT_NEAR(std_normal_cdf(1.96), oracle, 1e-13);
  EXPECT_NEAR(std_normal_cdf(1.96), 0.975002, 5e-7);
}

TEST(StdNormalCdf, ReferenceAndSymmetry) {
  const std::vector<Ref1> refs = {
      {-8, 6.2209605742717841235e-16}, {-3.3, 0.00048342414238377720111},
      {-1, 0.15865525393145705141},    {0.25, 0.59870632568292372424},
      {1.96, 0.97500210485177956586},  {5, 0.99999971334842812081},
  };
  for (const auto& r : refs) {
    EXPECT_NEAR(std_normal_cdf(r.x), r.expected, 1e-15) << r.x;
  }
  for (int i = -800; i <= 800; ++i) {
    const double z = i / 100.0;
    ASSERT_NEAR(std_normal_cdf(z) + std_normal_cdf(-z), 1.0, 1e-15) << z;
  }
  EXPECT_THROW(std_normal_cdf(std::nan("")), DomainError);
}

TEST(LogMvBeta, Examples) {
  EXPECT_NEAR(log_mv_beta(std::vector<double>{1, 1}), 0.0, 1e-15);
  EXPECT_NEAR(log_mv_beta(std::vector<double>{1, 1, 1}), -std::log(2.0), 1e-15);
  // Gamma(2) Gamma(3) / Gamma(5) = 2 / 24
  EXPECT_NEAR(log_mv_beta(std::vector<double>{2, 3}), std::log(1.0 / 12.0), 1e-15);
  EXPECT_THROW(log_mv_beta(std::vector<double>{1, 0}), DomainError);
  EXPECT_THROW(log_mv_beta(std::vector<double>{2}), DomainError);
}

}  // namespace
}  // namespace mrace::specfn
