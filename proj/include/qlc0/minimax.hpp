#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "qlc0/errors.hpp"

namespace qlc0 {

/// Best uniform polynomial approximation on a finite point set.
/// Values are reported on the points themselves; the basis is Chebyshev
/// on the points' span for conditioning.
struct MinimaxResult {
  int degree = 0;
  /// p evaluated at each input point, in input order.
  std::vector<double> point_values;
  /// max_i |p(x_i) - f_i|.
  double error = 0.0;
};

namespace detail {

class ChebBasis {
 public:
  ChebBasis(double lo, double hi) : lo_(lo), hi_(hi) {}

  double map(double x) const {
    if (hi_ == lo_) return 0.0;
    return 2.0 * (x - lo_) / (hi_ - lo_) - 1.0;
  }

  // T_0..T_deg at x.
  void row(double x, int deg, double *out) const {
    const double t = map(x);
    out[0] = 1.0;
    if (deg >= 1) out[1] = t;
    for (int k = 2; k <= deg; ++k)
      out[k] = 2.0 * t * out[k - 1] - out[k - 2];
  }

 private:
  double lo_, hi_;
};

}  // namespace detail

/// Exchange solve of min_p max_i |p(x_i) - f_i| over polynomials of degree
/// at most `degree`. Points must be distinct. When degree + 1 >= #points the
/// interpolant is returned with error 0.
inline MinimaxResult discrete_minimax(const std::vector<double> &points,
                                      const std::vector<double> &values,
                                      int degree) {
  const int npts = static_cast<int>(points.size());
  if (npts == 0) throw argument_error("discrete_minimax needs points");
  if (values.size() != points.size())
    throw argument_error("points/values size mismatch");
  if (degree < 0) throw argument_error("negative degree");

  const auto [lo_it, hi_it] =
      std::minmax_element(points.begin(), points.end());
  const detail::ChebBasis basis(*lo_it, *hi_it);

  const auto eval_all = [&](const Eigen::VectorXd &coeffs) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> row(deg + 1), out(npts);
    for (int i = 0; i < npts; ++i) {
      basis.row(points[i], deg, row.data());
      double s = 0.0;
      for (int k = 0; k <= deg; ++k) s += coeffs(k) * row[k];
      out[i] = s;
    }
    return out;
  };

  MinimaxResult res;

  if (degree + 1 >= npts) {
    // Interpolation through every point.
    const int deg = npts - 1;
    Eigen::MatrixXd vand(npts, npts);
    Eigen::VectorXd rhs(npts);
    std::vector<double> row(npts);
    for (int i = 0; i < npts; ++i) {
      basis.row(points[i], deg, row.data());
      for (int k = 0; k < npts; ++k) vand(i, k) = row[k];
      rhs(i) = values[i];
    }
    Eigen::VectorXd coeffs = vand.fullPivLu().solve(rhs);
    res.degree = degree;
    res.point_values = eval_all(coeffs);
    double err = 0.0;
    for (int i = 0; i < npts; ++i)
      err = std::max(err, std::abs(res.point_values[i] - values[i]));
    res.error = err;
    return res;
  }

  // Chebyshev exchange on the discrete set. Reference set of degree+2
  // indices, kept sorted by point value.
  std::vector<int> order(npts);
  for (int i = 0; i < npts; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return points[a] < points[b]; });

  const int nref = degree + 2;
  std::vector<int> ref(nref);
  for (int j = 0; j < nref; ++j) {
    // spread evenly over the sorted points, endpoints included
    ref[j] = order[(std::size_t(j) * (npts - 1)) / (nref - 1)];
  }
  std::sort(ref.begin(), ref.end(),
            [&](int a, int b) { return points[a] < points[b]; });

  Eigen::VectorXd coeffs;
  double h = 0.0;
  std::vector<double> pv;

  for (int iter = 0; iter < 200; ++iter) {
    // Solve the alternation system: p(x_j) + (-1)^j h = f_j on the reference.
    Eigen::MatrixXd sys(nref, nref);
    Eigen::VectorXd rhs(nref);
    std::vector<double> row(degree + 1);
    for (int j = 0; j < nref; ++j) {
      basis.row(points[ref[j]], degree, row.data());
      for (int k = 0; k <= degree; ++k) sys(j, k) = row[k];
      sys(j, degree + 1) = (j % 2 == 0) ? 1.0 : -1.0;
      rhs(j) = values[ref[j]];
    }
    Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
    coeffs = sol.head(degree + 1);
    h = sol(degree + 1);

    pv = eval_all(coeffs);
    int worst = 0;
    double worst_err = 0.0;
    for (int i = 0; i < npts; ++i) {
      const double e = std::abs(pv[i] - values[i]);
      if (e > worst_err) {
        worst_err = e;
        worst = i;
      }
    }
    if (worst_err <= std::abs(h) * (1.0 + 1e-12) + 1e-14) break;

    // Single-point exchange keeping residual signs alternating.
    const auto sign = [&](int i) {
      return (pv[i] - values[i]) >= 0 ? 1 : -1;
    };
    const double xw = points[worst];
    if (xw < points[ref.front()]) {
      if (sign(worst) == sign(ref.front()))
        ref.front() = worst;
      else {
        ref.pop_back();
        ref.insert(ref.begin(), worst);
      }
    } else if (xw > points[ref.back()]) {
      if (sign(worst) == sign(ref.back()))
        ref.back() = worst;
      else {
        ref.erase(ref.begin());
        ref.push_back(worst);
      }
    } else {
      for (int j = 0; j < nref; ++j) {
        if (j + 1 < nref && xw > points[ref[j]] && xw < points[ref[j + 1]]) {
          if (sign(worst) == sign(ref[j]))
            ref[j] = worst;
          else
            ref[j + 1] = worst;
          break;
        }
        if (points[ref[j]] == xw) {
          ref[j] = worst;
          break;
        }
      }
    }
  }

  res.degree = degree;
  res.point_values = pv;
  double err = 0.0;
  for (int i = 0; i < npts; ++i)
    err = std::max(err, std::abs(pv[i] - values[i]));
  res.error = err;
  return res;
}

}  // namespace qlc0
