#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>

#include "superinfect/special_functions.hpp"

using namespace superinfect;
using boost::multiprecision::cpp_dec_float_50;

namespace {

cpp_dec_float_50 hyp0f1_mp(int terms, cpp_dec_float_50 a, cpp_dec_float_50 z) {
  cpp_dec_float_50 sum = 1, term = 1;
  for (int k = 0; k < terms; ++k) {
    term *= z / ((k + 1) * (a + k));
    sum += term;
  }
  return sum;
}

// Phi_a(z) from library Bessel functions
double phi_ratio_oracle(double a, double z) {
  const double x = 2.0 * std::sqrt(z);
  return 2.0 * (a + 1.0) / x * std::cyl_bessel_j(a + 1.0, x) / std::cyl_bessel_j(a, x);
}

}  // namespace

TEST(Hyp0F1, ZeroArgument) {
  for (double a : {0.1, 1.0, 3.5, 40.0}) EXPECT_EQ(hyp0f1(a, 0.0), 1.0);
}

TEST(Hyp0F1, PositiveArgumentMatchesBesselI) {
  // 0F1(b; z) = Gamma(b) z^((1-b)/2) I_{b-1}(2 sqrt z)
  for (double b : {1.5, 2.0, 4.0, 11.0})
    for (double z : {0.1, 1.0, 7.0, 30.0}) {
      const double ref = std::tgamma(b) * std::pow(z, (1 - b) / 2) * std::cyl_bessel_i(b - 1, 2 * std::sqrt(z));
      EXPECT_NEAR(hyp0f1(b, z) / ref, 1.0, 1e-13) << b << " " << z;
    }
  const double s50 = static_cast<double>(hyp0f1_mp(50, 2, 1));
  const double s60 = static_cast<double>(hyp0f1_mp(60, 2, 1));
  EXPECT_NEAR(s50, s60, 1e-14);
  EXPECT_NEAR(hyp0f1(2.0, 1.0), s60, 1e-14);
}

TEST(Hyp0F1, AlternatingAgainstExtendedPrecision) {
  EXPECT_NEAR(hyp0f1(3.0, -1.0), static_cast<double>(hyp0f1_mp(80, 3, -1)), 1e-13);
  for (double a : {0.5, 2.5, 9.0})
    for (double z : {-0.3, -4.0, -25.0}) {
      const double ref = static_cast<double>(hyp0f1_mp(200, cpp_dec_float_50(a), cpp_dec_float_50(z)));
      EXPECT_NEAR(hyp0f1(a, z), ref, 1e-12 * std::max(1.0, std::abs(ref))) << a << " " << z;
    }
}

TEST(Hyp0F1, ReportsCancellation) {
  EXPECT_THROW(hyp0f1(1.0, -5000.0), NumericalError);
}

TEST(BesselZero, KnownValues) {
  EXPECT_NEAR(bessel_first_zero(0.0), 2.4048255577, 1e-10);
  EXPECT_NEAR(bessel_first_zero(1.0), 3.8317059702, 1e-10);
}

TEST(BesselZero, AgreesWithLibraryZeros) {
  for (double a : {0.5, 1.0, 2.0, 4.0, 5.0, 10.0, 50.0, 137.25})
    EXPECT_NEAR(bessel_first_zero(a), boost::math::cyl_bessel_j_zero(a, 1), 1e-11 * a + 1e-12) << a;
}

TEST(BesselZero, Sandwich) {
  EXPECT_LT(3.0, std::pow(bessel_first_zero(1.0), 2));
  EXPECT_LT(std::pow(bessel_first_zero(1.0), 2), 24.0);
  for (double a : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    const double j2 = std::pow(bessel_first_zero(a), 2);
    EXPECT_LT(a * (a + 2), j2);
    EXPECT_LT(j2, 4 * (a + 1) * (a + 2));
  }
}

TEST(PhiRatio, SmallArgument) {
  for (double a : {0.5, 3.0, 20.0}) EXPECT_EQ(phi_ratio(a, 0.0), 1.0);
  EXPECT_NEAR(phi_ratio(4.0, 0.01), 1.0 + 0.01 / 30.0, 1e-6);
}

TEST(PhiRatio, UpperBoundAtFour) {
  const double j = bessel_first_zero(4.0);
  const double v = phi_ratio(4.0, 3.0);
  EXPECT_GT(v, 1.0);
  EXPECT_LT(v, 1.0 + 12.0 / (j * j - 12.0));
}

TEST(PhiRatio, SandwichOnGrid) {
  for (double a : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    const double j = bessel_first_zero(a);
    for (double f = 0.02; f < 1.0; f += 0.04) {
      const double z = f * j * j / 4;
      const double v = phi_ratio(a, z);
      EXPECT_GT(v, 1.0);
      EXPECT_LT(v, 1.0 + 4 * z / (j * j - 4 * z)) << a << " " << z;
    }
  }
}

TEST(PhiRatio, ThreeRoutesAgree) {
  for (double a : {0.5, 2.0, 7.0, 30.0}) {
    const double j = bessel_first_zero(a);
    for (double f : {0.05, 0.4, 0.9, 0.999}) {
      const double z = f * j * j / 4;
      const double cf = phi_ratio(a, z);
      EXPECT_NEAR(cf / phi_ratio_oracle(a, z), 1.0, 1e-10) << a << " " << z;
      if (z < 50.0) { EXPECT_NEAR(cf / (hyp0f1(a + 2, -z) / hyp0f1(a + 1, -z)), 1.0, 1e-9); }
    }
  }
}

TEST(PhiRatio, DomainEdge) {
  const double a = 3.0, j = bessel_first_zero(a);
  EXPECT_TRUE(below_first_bessel_zero(a, j * j / 4 * (1 - 1e-9)));
  EXPECT_FALSE(below_first_bessel_zero(a, j * j / 4 * (1 + 1e-9)));
  EXPECT_THROW(phi_ratio(a, j * j / 4 * 1.01), ValidationError);
  // pole: grows without bound approaching the zero
  EXPECT_GT(phi_ratio(a, j * j / 4 * (1 - 1e-8)), 1e6);
}

TEST(BesselRatio, MatchesLibrary) {
  for (double nu : {1.0, 1.5, 6.0})
    for (double x : {0.3, 2.0, 5.0})
      EXPECT_NEAR(bessel_j_ratio(nu, x), std::cyl_bessel_j(nu, x) / std::cyl_bessel_j(nu - 1, x),
                  1e-11 * std::max(1.0, std::abs(bessel_j_ratio(nu, x))));
}
