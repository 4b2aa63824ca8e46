#include <gtest/gtest.h>

#include <random>

#include <losfis/trapezoid.hpp>

#include "generators.hpp"

using losfis::membership_degree;
using losfis::TrapezoidMF;

TEST(Trapezoid, ReferenceShape) {
  TrapezoidMF const mf{10, 20, 30, 40};
  EXPECT_EQ(membership_degree(mf, 25), 1.0);
  EXPECT_EQ(membership_degree(mf, 15), 0.5);
  EXPECT_EQ(membership_degree(mf, 5), 0.0);
  EXPECT_EQ(membership_degree(mf, 35), 0.5);
  EXPECT_EQ(membership_degree(mf, 10), 0.0);
  EXPECT_EQ(membership_degree(mf, 40), 0.0);
  EXPECT_EQ(membership_degree(mf, 20), 1.0);
  EXPECT_EQ(membership_degree(mf, 30), 1.0);
  EXPECT_EQ(membership_degree(mf, 1e9), 0.0);
}

TEST(Trapezoid, VerticalShoulders) {
  TrapezoidMF const left{0, 0, 10, 20};
  EXPECT_EQ(membership_degree(left, 0), 1.0);
  EXPECT_EQ(membership_degree(left, -0.001), 0.0);
  TrapezoidMF const right{60, 70, 80, 80};
  EXPECT_EQ(membership_degree(right, 80), 1.0);
  EXPECT_EQ(membership_degree(right, 80.001), 0.0);
  TrapezoidMF const spike{5, 5, 5, 5};
  EXPECT_EQ(membership_degree(spike, 5), 1.0);
  EXPECT_EQ(membership_degree(spike, 5.0001), 0.0);
}

TEST(Trapezoid, Triangle) {
  TrapezoidMF const tri{0, 10, 10, 30};
  EXPECT_EQ(membership_degree(tri, 10), 1.0);
  EXPECT_EQ(membership_degree(tri, 5), 0.5);
  EXPECT_EQ(membership_degree(tri, 20), 0.5);
}

TEST(Trapezoid, OpenSupport) {
  TrapezoidMF const mf{10, 20, 30, 40};
  EXPECT_FALSE(mf.in_open_support(10));
  EXPECT_TRUE(mf.in_open_support(10.5));
  EXPECT_FALSE(mf.in_open_support(40));
  TrapezoidMF const shoulder{0, 0, 10, 20};
  EXPECT_TRUE(shoulder.in_open_support(0));
}

// Degrees stay in [0, 1] and move no faster than the steepest ramp allows.
TEST(Trapezoid, BoundedAndLipschitz) {
  gen::Source src{7};
  for (int trial = 0; trial < 2000; ++trial) {
    std::array<double, 4> p{};
    for (auto& x : p) x = src.value(-100, 100);
    std::ranges::sort(p);
    TrapezoidMF const mf{p[0], p[1], p[2], p[3]};
    double min_ramp = std::numeric_limits<double>::infinity();
    if (mf.b > mf.a) min_ramp = std::min(min_ramp, mf.b - mf.a);
    if (mf.d > mf.c) min_ramp = std::min(min_ramp, mf.d - mf.c);
    for (int k = 0; k < 20; ++k) {
      double const x = src.value(-120, 120);
      double const mu = membership_degree(mf, x);
      ASSERT_GE(mu, 0.0);
      ASSERT_LE(mu, 1.0);
      // same linear piece: both in the rising ramp, plateau, or falling ramp
      double const x2 = x + (src.unit() - 0.5) * 0.1;
      auto const piece = [&](double v) {
        if (v <= mf.a || v >= mf.d) return 0;
        if (v < mf.b) return 1;
        if (v <= mf.c) return 2;
        return 3;
      };
      if (piece(x) == piece(x2) && std::isfinite(min_ramp)) {
        ASSERT_LE(std::abs(mu - membership_degree(mf, x2)), std::abs(x - x2) / min_ramp + 1e-12);
      }
    }
  }
}
