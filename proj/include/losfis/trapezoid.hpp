#pragma once

#include <stdexcept>
#include <string>

namespace losfis {

  /// Trapezoidal membership function with breakpoints a <= b <= c <= d.
  /// [b, c] is the plateau, [a, d] the support. b == c gives a triangle;
  /// a == b or c == d gives a vertical shoulder.
  struct TrapezoidMF {
    double a{0.0};
    double b{0.0};
    double c{0.0};
    double d{0.0};

    bool operator==(TrapezoidMF const&) const = default;

    [[nodiscard]] bool valid() const noexcept { return a <= b && b <= c && c <= d; }

    [[nodiscard]] bool in_plateau(double x) const noexcept { return b <= x && x <= c; }
    /// Open support: the points with strictly positive degree, shoulders included.
    [[nodiscard]] bool in_open_support(double x) const noexcept {
      return (a < x || (a == b && x == a)) && (x < d || (c == d && x == d));
    }
  };

  /// Degree of membership of x. Total function: outside [a, d] the result is 0.
  [[nodiscard]] inline double membership_degree(TrapezoidMF const& mf, double x) noexcept {
    if (x < mf.a || x > mf.d) {
      return 0.0;
    }
    if (x >= mf.b && x <= mf.c) {
      return 1.0;
    }
    if (x < mf.b) {
      // a < x < b here, so the ramp has positive width
      return (x - mf.a) / (mf.b - mf.a);
    }
    return (mf.d - x) / (mf.d - mf.c);
  }

}  // namespace losfis
