#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qlc0/circuit.hpp"
#include "qlc0/dilation.hpp"
#include "qlc0/minimax.hpp"
#include "qlc0/pauli.hpp"

namespace qlc0 {

/// Constants used in the recorded error bounds. Both the bound and the
/// exactly measured error appear in every report, so the bounds stay
/// auditable instead of silently trusted.
inline constexpr double kOneLayerBoundConstant = 4 * 1.4426950408889634;
inline constexpr double kCircuitBoundConstant = 2 * kOneLayerBoundConstant;

inline double layer_error_bound(int n, double r) {
  return kOneLayerBoundConstant * double(n) *
         std::exp2(-r / 512.0);
}

struct LayerApproxReport {
  PauliExpansion approx{0};
  int achieved_degree = 0;
  double degree_bound = 0.0;   // 4 sqrt(n * ell * r)
  double spectral_error = 0.0; // exact dense ||U A U' - M||
  double error_bound = 0.0;    // one-layer constant * n * 2^(-r/512) * ||A||
  double input_norm = 0.0;
  double threshold_t = 0.0;    // sqrt(n / ell)
  int t0_count = 0;            // gates of size <= t (lightcone, exact)
  int t1_count = 0;            // t < size <= t^2 (approximation + flag)
  int t2_count = 0;            // size > t^2 (approximation + flag)
  bool exact_branch = false;   // r > n/ell: M = U A U' directly
};

enum class LayerBranch { Exact, Approximate, Inadmissible };

/// Admissible parameter ranges: r in (1, sqrt(n/ell)) selects the
/// approximation branch, r in (n/ell, n) the exact branch.
inline LayerBranch classify_layer_regime(int n, int ell, double r) {
  const double ratio = double(n) / double(std::max(ell, 1));
  if (r <= 1.0 || r >= double(n)) return LayerBranch::Inadmissible;
  if (r > ratio) return LayerBranch::Exact;
  if (r < std::sqrt(ratio)) return LayerBranch::Approximate;
  return LayerBranch::Inadmissible;
}

namespace detail {

/// Dilated symmetric gate: diagonal in the set's computational basis with a
/// 2x2 block on the flag qubit per Hamming weight w:
///   [[ p(w), s(w) ], [ -s(w), -p(w) ]],  s = sqrt(1 - p^2).
struct DilatedSymmetricGate {
  std::vector<int> wires;
  int flag_wire = 0;
  std::vector<double> p, s;
};

inline int weight_on_wires(std::uint64_t index, const std::vector<int> &wires,
                           int q) {
  int w = 0;
  for (int wr : wires) w += (index >> (q - 1 - wr)) & 1u;
  return w;
}

inline void conjugate_by_dilated_gate(Matrix &m, int q,
                                      const DilatedSymmetricGate &g) {
  const std::uint64_t dim = std::uint64_t(1) << q;
  const std::uint64_t fbit = std::uint64_t(1) << (q - 1 - g.flag_wire);

  // left factor
  for (std::uint64_t r = 0; r < dim; ++r) {
    if (r & fbit) continue;
    const std::uint64_t r1 = r | fbit;
    const int w = weight_on_wires(r, g.wires, q);
    const double p = g.p[w], s = g.s[w];
    for (std::uint64_t c = 0; c < dim; ++c) {
      const cplx a = m(r, c), b = m(r1, c);
      m(r, c) = p * a + s * b;
      m(r1, c) = -s * a - p * b;
    }
  }
  // right factor (adjoint)
  for (std::uint64_t c = 0; c < dim; ++c) {
    if (c & fbit) continue;
    const std::uint64_t c1 = c | fbit;
    const int w = weight_on_wires(c, g.wires, q);
    const double p = g.p[w], s = g.s[w];
    for (std::uint64_t r = 0; r < dim; ++r) {
      const cplx a = m(r, c), b = m(r, c1);
      m(r, c) = p * a + s * b;
      m(r, c1) = -s * a - p * b;
    }
  }
}

inline std::vector<double> cz_layer_diagonal_for_sets(
    const std::vector<std::vector<int>> &sets, int q) {
  CzLayer l;
  l.sets = sets;
  return cz_layer_diagonal(l, q, 0);
}

}  // namespace detail

/// One CZ layer acting on a degree-bounded observable. Gates no larger than
/// t = sqrt(n/ell) are conjugated exactly (they only grow the lightcone);
/// larger gates are replaced by symmetric low-degree stand-ins carried
/// through one flag qubit each, and the flag block is projected out at the
/// end. For r above n/ell the result is the exact conjugation.
inline LayerApproxReport approx_layer(const CzLayer &layer,
                                      const PauliExpansion &a, int ell,
                                      double r) {
  const int n = a.qubits();
  {
    Qac0Circuit probe;
    probe.n = n;
    probe.layers.push_back(layer);
    probe.validate();
  }
  if (a.degree() > ell)
    throw precondition_error("observable degree " +
                             std::to_string(a.degree()) +
                             " exceeds declared bound " + std::to_string(ell));

  const int ell_eff = std::max(ell, 1);
  const LayerBranch branch = classify_layer_regime(n, ell_eff, r);
  if (branch == LayerBranch::Inadmissible) {
    const double ratio = double(n) / double(ell_eff);
    throw argument_error(
        "r = " + std::to_string(r) + " outside admissible range (1, " +
        std::to_string(std::sqrt(ratio)) + ") union (" +
        std::to_string(ratio) + ", " + std::to_string(n) + ")");
  }

  LayerApproxReport rep;
  rep.threshold_t = std::sqrt(double(n) / double(ell_eff));
  rep.degree_bound = 4.0 * std::sqrt(double(n) * double(ell_eff) * r);

  DenseOperator dense_a = synthesize(a);
  rep.input_norm = spectral_norm_fast(dense_a);
  rep.error_bound = layer_error_bound(n, r) * rep.input_norm;

  // Exact conjugation target, also the oracle side of the reported error.
  Matrix exact = dense_a.matrix();
  detail::conjugate_diagonal(
      exact, detail::cz_layer_diagonal_for_sets(layer.sets, n));

  if (branch == LayerBranch::Exact) {
    rep.exact_branch = true;
    rep.approx = expand(DenseOperator(n, exact));
    rep.achieved_degree = rep.approx.degree();
    rep.spectral_error = 0.0;
    return rep;
  }

  const double t = rep.threshold_t;
  std::vector<std::vector<int>> small_sets;
  std::vector<std::vector<int>> big_sets;
  for (const auto &set : layer.sets) {
    const double size = double(set.size());
    if (size <= t) {
      small_sets.push_back(set);
      ++rep.t0_count;
    } else {
      big_sets.push_back(set);
      if (size <= t * t)
        ++rep.t1_count;
      else
        ++rep.t2_count;
    }
  }

  if (big_sets.empty()) {
    // Pure lightcone: every gate conjugated exactly.
    rep.approx = expand(DenseOperator(n, exact));
    rep.achieved_degree = rep.approx.degree();
    rep.spectral_error = 0.0;
    return rep;
  }

  // Exact gates commute with the dilation, so conjugate by them first and
  // dilate only over the approximated sets.
  Matrix conj_small = dense_a.matrix();
  detail::conjugate_diagonal(
      conj_small, detail::cz_layer_diagonal_for_sets(small_sets, n));
  const PauliExpansion a_small = expand(DenseOperator(n, conj_small));

  const int flags = static_cast<int>(big_sets.size());
  check_capacity(n + flags, "approx_layer");
  DilationEnsemble ensemble{big_sets};
  DenseOperator lifted = operator_dilate(a_small, ensemble);

  Matrix work = lifted.matrix();
  for (int i = 0; i < flags; ++i) {
    const int k = static_cast<int>(big_sets[i].size());
    const CzApproxResult approx = cz_low_degree_approx(k, r);
    detail::DilatedSymmetricGate gate;
    gate.wires = big_sets[i];
    gate.flag_wire = n + i;
    gate.p = approx.poly_values;
    gate.s.resize(gate.p.size());
    for (std::size_t w = 0; w < gate.p.size(); ++w)
      gate.s[w] = std::sqrt(std::max(0.0, 1.0 - gate.p[w] * gate.p[w]));
    detail::conjugate_by_dilated_gate(work, n + flags, gate);
  }

  std::vector<int> flag_wires(flags);
  for (int i = 0; i < flags; ++i) flag_wires[i] = n + i;
  DenseOperator m = project_zero(DenseOperator(n + flags, std::move(work)),
                                 flag_wires);

  rep.approx = expand(m);
  rep.achieved_degree = rep.approx.degree();
  rep.spectral_error =
      spectral_norm_fast(DenseOperator(n, exact - m.matrix()));
  return rep;
}

struct CircuitApproxReport {
  PauliExpansion approx{0};
  std::vector<LayerApproxReport> per_layer;   // one entry per CZ layer
  std::vector<double> degree_bound_schedule;  // bound recursion b_i
  std::vector<double> layer_norms;            // ||M_i|| after each CZ layer
  double total_error = 0.0;
  double total_error_bound = 0.0;
  double degree_bound = 0.0;  // closed-form bound at full depth
  double r = 0.0;
  int depth = 0;
};

/// Runs the layer approximation through a whole circuit, absorbing
/// single-qubit layers exactly (they do not change the degree) and chaining
/// CZ layers with the same parameter r.
inline CircuitApproxReport approx_circuit(const Qac0Circuit &c,
                                          const PauliExpansion &a, double r) {
  c.validate();
  const int q = c.total_wires();
  if (a.qubits() != q)
    throw argument_error("observable must live on the circuit's wires");

  CircuitApproxReport rep;
  rep.r = r;
  rep.depth = c.depth();

  PauliExpansion m = a;
  int cz_index = 0;
  for (std::size_t li = 0; li < c.layers.size(); ++li) {
    if (const auto *sl = std::get_if<SingleQubitLayer>(&c.layers[li])) {
      Matrix dense = synthesize(m).matrix();
      for (const auto &g : sl->gates) {
        detail::apply_single_qubit_left(dense, q, g.wire, g.u);
        detail::apply_single_qubit_right_dagger(dense, q, g.wire, g.u);
      }
      m = expand(DenseOperator(q, std::move(dense)));
      continue;
    }
    const auto &cz = std::get<CzLayer>(c.layers[li]);
    const int ell = std::max(m.degree(), 1);
    ++cz_index;
    if (classify_layer_regime(q, ell, r) == LayerBranch::Inadmissible) {
      const double ratio = double(q) / double(ell);
      throw argument_error(
          "layer " + std::to_string(li) + " (cz layer " +
          std::to_string(cz_index) + "): r = " + std::to_string(r) +
          " outside (1, " + std::to_string(std::sqrt(ratio)) + ") union (" +
          std::to_string(ratio) + ", " + std::to_string(q) + ")");
    }
    LayerApproxReport lr = approx_layer(cz, m, ell, r);
    m = lr.approx;
    rep.layer_norms.push_back(spectral_norm_fast(synthesize(m)));
    rep.per_layer.push_back(std::move(lr));
  }

  // Bound recursion b_{i+1} = 4 sqrt(q * b_i * r) starting from the initial
  // degree, independent of the measured degrees.
  double b = double(std::max(a.degree(), 1));
  for (int i = 0; i < rep.depth; ++i) {
    b = 4.0 * std::sqrt(double(q) * b * r);
    rep.degree_bound_schedule.push_back(b);
  }
  rep.degree_bound = rep.degree_bound_schedule.empty()
                         ? double(std::max(a.degree(), 1))
                         : rep.degree_bound_schedule.back();

  rep.total_error_bound = double(rep.depth) * kCircuitBoundConstant *
                          double(q) * std::exp2(-r / 512.0);

  Matrix exact = synthesize(a).matrix();
  detail::conjugate_by_circuit(exact, c, q, 0);
  rep.total_error = spectral_norm_fast(
      DenseOperator(q, exact - synthesize(m).matrix()));
  rep.approx = std::move(m);
  return rep;
}

struct EprApproxResult {
  PauliExpansion expansion{0};
  double achieved_error = 0.0;
  int poly_degree = 0;
};

/// Low-degree stand-in for the normalized maximally-entangled projector on
/// 2n qubits (pairs (i, i+n)). The projector is the product of n commuting
/// Bell-pair projectors, so a polynomial in their sum with p(n) ~ 1 and
/// p(w<n) ~ 0 does the job at Pauli degree 2 deg(p).
inline EprApproxResult approx_epr(int n, double target_eps) {
  if (n < 1) throw argument_error("approx_epr needs n >= 1");
  if (!(target_eps > 0.0 && target_eps < 1.0))
    throw argument_error("target_eps must lie in (0, 1)");

  std::vector<double> points(n + 1), values(n + 1);
  for (int w = 0; w <= n; ++w) {
    points[w] = double(w);
    values[w] = (w == n) ? 1.0 : 0.0;
  }

  // Smallest polynomial degree whose rescaled-to-contraction error meets
  // the target; degree n interpolates exactly.
  const auto rescaled = [&](const MinimaxResult &mm) {
    double peak = 0.0;
    for (double v : mm.point_values) peak = std::max(peak, std::abs(v));
    std::vector<double> pv = mm.point_values;
    if (peak > 1.0)
      for (double &v : pv) v /= peak;
    double err = 0.0;
    for (int w = 0; w <= n; ++w)
      err = std::max(err, std::abs(pv[w] - values[w]));
    return std::pair<std::vector<double>, double>(std::move(pv), err);
  };

  int deg = 0;
  std::vector<double> pv;
  double rescaled_err = 0.0;
  for (deg = 0; deg <= n; ++deg) {
    auto [cand, err] = rescaled(discrete_minimax(points, values, deg));
    pv = std::move(cand);
    rescaled_err = err;
    if (err <= target_eps) break;
  }
  deg = std::min(deg, n);

  // Express p(sum of Bell projectors) in the product basis: the inverse
  // binomial transform gives the subset-product coefficients beta_s, which
  // collapse to one scalar gamma_k per matched-pair count k.
  std::vector<std::vector<double>> ch(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i <= n; ++i) {
    ch[i][0] = 1.0;
    for (int j = 1; j <= i; ++j)
      ch[i][j] = ch[i - 1][j - 1] + (j <= i - 1 ? ch[i - 1][j] : 0.0);
  }
  std::vector<double> beta(n + 1, 0.0);
  for (int s = 0; s <= n; ++s)
    for (int j = 0; j <= s; ++j)
      beta[s] += ((s - j) % 2 ? -1.0 : 1.0) * ch[s][j] * pv[j];
  std::vector<double> gamma(n + 1, 0.0);
  for (int k = 0; k <= n; ++k)
    for (int s = k; s <= n; ++s)
      gamma[k] += beta[s] * std::pow(0.25, s) * ch[n - k][s - k];

  EprApproxResult res;
  res.poly_degree = deg;
  res.achieved_error = rescaled_err;

  // Paired Pauli strings: wire i and wire n+i carry the same letter; a Y
  // pair contributes a sign flip.
  PauliExpansion out(2 * n);
  std::vector<int> letters(2 * n, 0);
  const std::uint64_t combos = std::uint64_t(1) << (2 * n);
  for (std::uint64_t code = 0; code < combos; ++code) {
    int k = 0, ys = 0;
    std::uint64_t rest = code;
    for (int i = 0; i < n; ++i) {
      const int letter = static_cast<int>(rest & 3u);
      rest >>= 2;
      letters[i] = letter;
      letters[n + i] = letter;
      if (letter != 0) ++k;
      if (letter == 2) ++ys;
    }
    const double coeff = (ys % 2 ? -1.0 : 1.0) * gamma[k];
    if (std::abs(coeff) <= PauliExpansion::kDropThreshold) continue;
    out.set(PauliString::from_letters(letters), coeff);
  }
  res.expansion = std::move(out);
  return res;
}

}  // namespace qlc0
