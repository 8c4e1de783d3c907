#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Monotone cubic Hermite interpolation (Fritsch-Carlson derivative
// limiting). Used for CDF tables: the interpolant of monotone data is
// monotone, so tabulated quantile inversion is well defined.

namespace qproc {

class PchipCurve {
 public:
  PchipCurve() = default;

  PchipCurve(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw std::invalid_argument("PchipCurve: need >= 2 matching nodes");
    d_.resize(n);
    std::vector<double> h(n - 1), slope(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      if (!(h[i] > 0.0))
        throw std::invalid_argument("PchipCurve: x must be strictly increasing");
      slope[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
      d_[0] = d_[1] = slope[0];
    } else {
      for (size_t i = 1; i + 1 < n; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
          d_[i] = 0.0;
        } else {
          const double w1 = 2.0 * h[i] + h[i - 1];
          const double w2 = h[i] + 2.0 * h[i - 1];
          d_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
        }
      }
      d_[0] = edge_derivative(h[0], h[1], slope[0], slope[1]);
      d_[n - 1] = edge_derivative(h[n - 2], h[n - 3], slope[n - 2], slope[n - 3]);
    }
    // uniform grids admit O(1) interval lookup
    const double h0 = h[0];
    uniform_ = true;
    for (size_t i = 1; i + 1 < n; ++i) {
      if (std::abs(h[i] - h0) > 1e-9 * std::abs(h0)) {
        uniform_ = false;
        break;
      }
    }
    h0_ = h0;
  }

  double xmin() const { return x_.front(); }
  double xmax() const { return x_.back(); }

  double eval(double xq) const {
    const size_t n = x_.size();
    if (xq <= x_.front()) return y_.front();
    if (xq >= x_.back()) return y_.back();
    size_t i;
    if (uniform_) {
      i = static_cast<size_t>((xq - x_.front()) / h0_);
      if (i >= n - 1) i = n - 2;
      // guard rounding at panel edges
      if (xq < x_[i]) --i;
      else if (xq > x_[i + 1]) ++i;
    } else {
      size_t lo = 0, hi = n - 1;
      while (hi - lo > 1) {
        const size_t mid = (lo + hi) / 2;
        (x_[mid] <= xq ? lo : hi) = mid;
      }
      i = lo;
    }
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
  }

 private:
  static double edge_derivative(double h0, double h1, double s0, double s1) {
    // one-sided three-point estimate with the usual shape limiter
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) return 0.0;
    if (s0 * s1 < 0.0 && std::abs(d) > 3.0 * std::abs(s0)) return 3.0 * s0;
    return d;
  }

  std::vector<double> x_, y_, d_;
  bool uniform_ = false;
  double h0_ = 0.0;
};

}  // namespace qproc
