#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qlc0/dense_operator.hpp"
#include "qlc0/minimax.hpp"
#include "qlc0/pauli.hpp"

namespace qlc0 {

/// Embeds a contraction A as the top-left block of a unitary on one extra
/// qubit (the block qubit is wire 0 of the result):
///   [[ A,            (I - A A')^1/2 ],
///    [ -(I - A'A)^1/2, -A'          ]]
inline DenseOperator unitary_dilate(const DenseOperator &a) {
  const double nrm = spectral_norm(a);
  if (nrm > 1.0 + 1e-9)
    throw norm_error("unitary_dilate needs a contraction, got norm " +
                     std::to_string(nrm));
  check_capacity(a.qubits() + 1, "unitary_dilate");

  const Eigen::Index d = a.dim();
  const Matrix &m = a.matrix();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix top_right =
      psd_sqrt(DenseOperator(a.qubits(), id - m * m.adjoint())).matrix();
  const Matrix bottom_left =
      psd_sqrt(DenseOperator(a.qubits(), id - m.adjoint() * m)).matrix();

  Matrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = m;
  out.topRightCorner(d, d) = top_right;
  out.bottomLeftCorner(d, d) = -bottom_left;
  out.bottomRightCorner(d, d) = -m.adjoint();
  return DenseOperator(a.qubits() + 1, std::move(out));
}

/// Ensemble of pairwise-disjoint wire subsets; each set gets one flag qubit
/// in operator_dilate.
struct DilationEnsemble {
  std::vector<std::vector<int>> sets;

  void validate(int qubits) const {
    std::vector<bool> seen(qubits, false);
    for (const auto &set : sets) {
      for (int w : set) {
        if (w < 0 || w >= qubits)
          throw argument_error("ensemble wire out of range");
        if (seen[w])
          throw validation_error("ensemble sets must be pairwise disjoint");
        seen[w] = true;
      }
    }
  }
};

/// Attaches one flag qubit per ensemble set: each Pauli term B_sigma picks
/// up |0><0| on flag i when sigma touches S_i and identity otherwise. Flags
/// are appended after the original wires in ensemble order. Preserves the
/// spectral norm.
inline DenseOperator operator_dilate(const PauliExpansion &p,
                                     const DilationEnsemble &e) {
  const int q = p.qubits();
  e.validate(q);
  const int m = static_cast<int>(e.sets.size());
  check_capacity(q + m, "operator_dilate");

  const std::uint64_t dq = std::uint64_t(1) << q;
  const std::uint64_t dm = std::uint64_t(1) << m;
  Matrix out = Matrix::Zero(dq * dm, dq * dm);

  for (const auto &[key, v] : p.coeffs()) {
    const PauliString s(q, key);

    // Flags forced to |0> where the term touches the set; identity flags
    // range over both basis values.
    std::uint64_t active = 0;  // bit i set -> flag i pinned to 0
    for (int i = 0; i < m; ++i)
      if (s.touches(e.sets[i])) active |= std::uint64_t(1) << (m - 1 - i);

    // One nonzero per row of a Pauli matrix.
    for (std::uint64_t r = 0; r < dq; ++r) {
      std::uint64_t c = r;
      cplx phase = v;
      for (int w = 0; w < q; ++w) {
        const std::uint64_t bit = (r >> (q - 1 - w)) & 1u;
        switch (s.letter(w)) {
          case 0: break;
          case 1: c ^= std::uint64_t(1) << (q - 1 - w); break;
          case 2:
            c ^= std::uint64_t(1) << (q - 1 - w);
            phase *= bit ? cplx(0, 1) : cplx(0, -1);
            break;
          case 3:
            if (bit) phase = -phase;
            break;
        }
      }
      for (std::uint64_t f = 0; f < dm; ++f) {
        if (f & active) continue;
        out((r << m) | f, (c << m) | f) += phase;
      }
    }
  }
  return DenseOperator(q + m, std::move(out));
}

/// Symmetric low-degree stand-in for a k-wire CZ: a polynomial in the
/// Hamming-weight operator matching +1 below weight k and -1 at weight k.
struct CzApproxResult {
  DenseOperator op;
  int degree = 0;
  /// max over the weight spectrum of |p(w) - target(w)|, which equals the
  /// spectral distance to the exact gate.
  double spectral_error = 0.0;
  double r = 0.0;
  /// p(0), ..., p(k) after the contraction rescale.
  std::vector<double> poly_values;
};

namespace detail {

/// Pauli degree of a weight-symmetric diagonal operator with eigenvalues
/// g(w) on Hamming-weight-w states: largest j with a nonzero level-j
/// Z-coefficient. Coefficients at level j are computed through Krawtchouk
/// sums, so no dense expansion is needed.
inline int symmetric_diagonal_degree(const std::vector<double> &g, int k,
                                     double tol = 1e-10) {
  // binomials up to k
  std::vector<std::vector<double>> ch(k + 1, std::vector<double>(k + 1, 0.0));
  for (int i = 0; i <= k; ++i) {
    ch[i][0] = 1.0;
    for (int j = 1; j <= i; ++j)
      ch[i][j] = ch[i - 1][j - 1] + (j <= i - 1 ? ch[i - 1][j] : 0.0);
  }
  int deg = 0;
  for (int j = 0; j <= k; ++j) {
    double coeff = 0.0;
    for (int w = 0; w <= k; ++w) {
      // sum over weight-w states of (-1)^{|z & S|} for a fixed |S| = j:
      // i ones of z land inside S, the remaining w-i outside.
      double kraw = 0.0;
      for (int i = 0; i <= j; ++i) {
        if (i > w || w - i > k - j) continue;
        kraw += (i % 2 ? -1.0 : 1.0) * ch[j][i] * ch[k - j][w - i];
      }
      coeff += g[w] * kraw;
    }
    coeff /= double(std::uint64_t(1) << k);
    if (std::abs(coeff) > tol) deg = j;
  }
  return deg;
}

/// Diagonal operator with entry g(popcount(z)) at basis state z.
inline DenseOperator symmetric_diagonal_operator(const std::vector<double> &g,
                                                 int k) {
  const std::uint64_t dim = std::uint64_t(1) << k;
  Matrix out = Matrix::Zero(dim, dim);
  for (std::uint64_t z = 0; z < dim; ++z)
    out(z, z) = g[static_cast<int>(__builtin_popcountll(z))];
  return DenseOperator(k, std::move(out));
}

}  // namespace detail

/// Degree-min(k, ceil(sqrt(k r))) minimax approximation of cz_gate(k) over
/// the Hamming-weight spectrum, rescaled to a contraction if needed.
inline CzApproxResult cz_low_degree_approx(int k, double r) {
  if (k < 2) throw argument_error("cz_low_degree_approx needs k >= 2");
  if (!(r > 1.0 && r <= double(k)))
    throw argument_error("r must lie in (1, k]");
  check_capacity(k, "cz_low_degree_approx");

  const int cap = static_cast<int>(std::ceil(std::sqrt(double(k) * r)));
  const int target_degree = std::min(k, cap);

  std::vector<double> points(k + 1), values(k + 1);
  for (int w = 0; w <= k; ++w) {
    points[w] = double(w);
    values[w] = (w == k) ? -1.0 : 1.0;
  }
  MinimaxResult mm = discrete_minimax(points, values, target_degree);

  // Eigenvalues are exactly the point values, so rescaling to a contraction
  // is exact arithmetic on the spectrum.
  double peak = 0.0;
  for (double v : mm.point_values) peak = std::max(peak, std::abs(v));
  std::vector<double> pv = mm.point_values;
  if (peak > 1.0)
    for (double &v : pv) v /= peak;

  CzApproxResult res;
  res.r = r;
  res.poly_values = pv;
  res.op = detail::symmetric_diagonal_operator(pv, k);
  res.degree = detail::symmetric_diagonal_degree(pv, k);
  double err = 0.0;
  for (int w = 0; w <= k; ++w)
    err = std::max(err, std::abs(pv[w] - values[w]));
  res.spectral_error = err;
  return res;
}

}  // namespace qlc0
