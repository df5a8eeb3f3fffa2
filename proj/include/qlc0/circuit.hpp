#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qlc0/dense_operator.hpp"
#include "qlc0/pauli.hpp"

namespace qlc0 {

/// k-wire generalized CZ: identity minus twice the all-ones projector.
inline DenseOperator cz_gate(int k) {
  if (k < 1) throw argument_error("cz_gate needs k >= 1");
  check_capacity(k, "cz_gate");
  const std::uint64_t dim = std::uint64_t(1) << k;
  Matrix out = Matrix::Zero(dim, dim);
  for (std::uint64_t i = 0; i < dim; ++i)
    out(i, i) = (i == dim - 1) ? -1.0 : 1.0;
  return DenseOperator(k, std::move(out));
}

struct SingleQubitGate {
  int wire = 0;
  Eigen::Matrix2cd u;
};

struct SingleQubitLayer {
  std::vector<SingleQubitGate> gates;
};

struct CzLayer {
  std::vector<std::vector<int>> sets;
};

using Layer = std::variant<SingleQubitLayer, CzLayer>;

namespace detail {

/// M <- G_w * M for a single-qubit gate on `wire` of a q-qubit system.
inline void apply_single_qubit_left(Matrix &m, int q, int wire,
                                    const Eigen::Matrix2cd &g) {
  const std::uint64_t dim = std::uint64_t(1) << q;
  const std::uint64_t bit = std::uint64_t(1) << (q - 1 - wire);
  for (std::uint64_t r = 0; r < dim; ++r) {
    if (r & bit) continue;
    const std::uint64_t r1 = r | bit;
    for (std::uint64_t c = 0; c < dim; ++c) {
      const cplx a = m(r, c), b = m(r1, c);
      m(r, c) = g(0, 0) * a + g(0, 1) * b;
      m(r1, c) = g(1, 0) * a + g(1, 1) * b;
    }
  }
}

/// M <- M * G_w^dagger.
inline void apply_single_qubit_right_dagger(Matrix &m, int q, int wire,
                                            const Eigen::Matrix2cd &g) {
  const std::uint64_t dim = std::uint64_t(1) << q;
  const std::uint64_t bit = std::uint64_t(1) << (q - 1 - wire);
  const Eigen::Matrix2cd gd = g.adjoint();
  for (std::uint64_t c = 0; c < dim; ++c) {
    if (c & bit) continue;
    const std::uint64_t c1 = c | bit;
    for (std::uint64_t r = 0; r < dim; ++r) {
      const cplx a = m(r, c), b = m(r, c1);
      m(r, c) = a * gd(0, 0) + b * gd(1, 0);
      m(r, c1) = a * gd(0, 1) + b * gd(1, 1);
    }
  }
}

/// Diagonal of a CZ layer (+1/-1 per basis state), on q qubits with wires
/// shifted by `offset`.
inline std::vector<double> cz_layer_diagonal(const CzLayer &layer, int q,
                                             int offset = 0) {
  const std::uint64_t dim = std::uint64_t(1) << q;
  std::vector<double> d(dim, 1.0);
  for (const auto &set : layer.sets) {
    std::uint64_t mask = 0;
    for (int w : set) mask |= std::uint64_t(1) << (q - 1 - (w + offset));
    for (std::uint64_t i = 0; i < dim; ++i)
      if ((i & mask) == mask) d[i] = -d[i];
  }
  return d;
}

inline void apply_diagonal_left(Matrix &m, const std::vector<double> &d) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (d[r] < 0) m.row(r) = -m.row(r);
}

inline void conjugate_diagonal(Matrix &m, const std::vector<double> &d) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (d[r] * d[c] < 0) m(r, c) = -m(r, c);
}

inline void check_gate_unitary(const Eigen::Matrix2cd &g) {
  if ((g.adjoint() * g - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() >
      1e-10)
    throw validation_error("single-qubit gate is not unitary within 1e-10");
}

}  // namespace detail

/// Layered circuit of single-qubit layers and CZ layers on n input wires
/// plus a ancilla wires. Input wires are 0..n-1, ancilla wires n..n+a-1.
/// The first layer in `layers` is applied first.
class Qac0Circuit {
 public:
  int n = 0;
  int a = 0;
  /// Ancilla pure state; empty means |0...0>.
  std::optional<Vector> ancilla_state;
  std::vector<Layer> layers;

  int total_wires() const { return n + a; }

  int depth() const {
    int d = 0;
    for (const auto &l : layers)
      if (std::holds_alternative<CzLayer>(l)) ++d;
    return d;
  }

  void validate() const {
    if (n < 1) throw validation_error("circuit needs at least one input wire");
    if (a < 0) throw validation_error("negative ancilla count");
    check_capacity(total_wires(), "circuit");
    if (ancilla_state) {
      if (ancilla_state->size() != (Eigen::Index(1) << a))
        throw validation_error("ancilla state dimension mismatch");
      if (std::abs(ancilla_state->norm() - 1.0) > 1e-9)
        throw validation_error("ancilla state must be normalized");
    }
    for (const auto &l : layers) {
      if (const auto *sl = std::get_if<SingleQubitLayer>(&l)) {
        std::vector<bool> seen(total_wires(), false);
        for (const auto &g : sl->gates) {
          if (g.wire < 0 || g.wire >= total_wires())
            throw validation_error("gate wire out of range");
          if (seen[g.wire])
            throw validation_error("two gates on one wire in a single layer");
          seen[g.wire] = true;
          detail::check_gate_unitary(g.u);
        }
      } else {
        const auto &cz = std::get<CzLayer>(l);
        std::vector<bool> seen(total_wires(), false);
        for (const auto &set : cz.sets) {
          if (set.empty()) throw validation_error("empty CZ wire set");
          for (int w : set) {
            if (w < 0 || w >= total_wires())
              throw validation_error("CZ wire out of range");
            if (seen[w])
              throw validation_error("CZ sets within a layer must be disjoint");
            seen[w] = true;
          }
        }
      }
    }
  }

  /// Density operator of the ancilla register.
  DenseOperator ancilla_density() const {
    const Eigen::Index dim = Eigen::Index(1) << a;
    Vector v;
    if (ancilla_state) {
      v = *ancilla_state;
    } else {
      v = Vector::Zero(dim);
      v(0) = 1.0;
    }
    return DenseOperator(a, v * v.adjoint());
  }
};

namespace detail {

/// Applies every layer (first layer first) as left factors: M <- U * M.
inline void apply_circuit_left(Matrix &m, const Qac0Circuit &c, int q,
                               int offset) {
  for (const auto &l : c.layers) {
    if (const auto *sl = std::get_if<SingleQubitLayer>(&l)) {
      for (const auto &g : sl->gates)
        apply_single_qubit_left(m, q, g.wire + offset, g.u);
    } else {
      apply_diagonal_left(m, cz_layer_diagonal(std::get<CzLayer>(l), q,
                                               offset));
    }
  }
}

/// M <- U M U^dagger with the circuit embedded at `offset`.
inline void conjugate_by_circuit(Matrix &m, const Qac0Circuit &c, int q,
                                 int offset) {
  for (const auto &l : c.layers) {
    if (const auto *sl = std::get_if<SingleQubitLayer>(&l)) {
      for (const auto &g : sl->gates) {
        apply_single_qubit_left(m, q, g.wire + offset, g.u);
        apply_single_qubit_right_dagger(m, q, g.wire + offset, g.u);
      }
    } else {
      conjugate_diagonal(m, cz_layer_diagonal(std::get<CzLayer>(l), q,
                                              offset));
    }
  }
}

}  // namespace detail

/// Ordered product of the layer unitaries on n+a wires, first layer applied
/// first.
inline DenseOperator build_unitary(const Qac0Circuit &c) {
  c.validate();
  const int q = c.total_wires();
  const std::uint64_t dim = std::uint64_t(1) << q;
  Matrix u = Matrix::Identity(dim, dim);
  detail::apply_circuit_left(u, c, q, 0);
  return DenseOperator(q, std::move(u));
}

/// Channel defined by a circuit plus an ordered output-wire selection;
/// non-output wires are traced out.
struct ChannelSpec {
  Qac0Circuit circuit;
  /// Ordered, distinct wires of the circuit; defaults to 0..n-1.
  std::vector<int> output_wires;

  int n() const { return circuit.n; }
  int m() const {
    return output_wires.empty() ? circuit.n
                                : static_cast<int>(output_wires.size());
  }

  std::vector<int> outputs() const {
    if (!output_wires.empty()) return output_wires;
    std::vector<int> def(circuit.n);
    for (int i = 0; i < circuit.n; ++i) def[i] = i;
    return def;
  }

  void validate() const {
    circuit.validate();
    if (!output_wires.empty())
      detail::check_wires(output_wires, circuit.total_wires());
  }
};

namespace detail {

/// Traces out all wires except `keep` (given in desired output order) and
/// reorders the survivors to match that order.
inline DenseOperator trace_down_to(const DenseOperator &op,
                                   const std::vector<int> &keep) {
  std::vector<bool> kept(op.qubits(), false);
  for (int w : keep) kept[w] = true;
  std::vector<int> traced;
  for (int w = 0; w < op.qubits(); ++w)
    if (!kept[w]) traced.push_back(w);
  DenseOperator reduced = partial_trace(op, traced);

  std::vector<int> sorted_keep(keep);
  std::sort(sorted_keep.begin(), sorted_keep.end());
  std::vector<int> perm(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    auto it = std::lower_bound(sorted_keep.begin(), sorted_keep.end(),
                               keep[i]);
    perm[i] = static_cast<int>(it - sorted_keep.begin());
  }
  return permute_wires(reduced, perm);
}

}  // namespace detail

/// Applies the channel to an n-qubit density operator: append the ancilla,
/// conjugate by the circuit unitary, trace down to the output wires.
inline DenseOperator apply_channel(const ChannelSpec &s,
                                   const DenseOperator &rho) {
  s.validate();
  if (rho.qubits() != s.n())
    throw validation_error("input dimension does not match channel input");
  check_density(rho);

  const int q = s.circuit.total_wires();
  DenseOperator total = tensor(rho, s.circuit.ancilla_density());
  Matrix work = total.matrix();
  detail::conjugate_by_circuit(work, s.circuit, q, 0);
  return detail::trace_down_to(DenseOperator(q, std::move(work)),
                               s.outputs());
}

/// Choi data of a channel: `representation` is the unnormalized form J
/// (image of the unnormalized maximally entangled projector), `state` is
/// 2^-n J, a density operator on n+m qubits (reference register first).
struct ChoiObject {
  int n = 0;
  int m = 0;
  DenseOperator representation;
  DenseOperator state;
};

inline ChoiObject choi(const ChannelSpec &s) {
  s.validate();
  const int n = s.n();
  const int m = s.m();
  const int a = s.circuit.a;
  check_capacity(n + m, "choi");
  check_capacity(2 * n + a, "choi workspace");

  // Maximally entangled projector on reference (wires 0..n-1) and input
  // (wires n..2n-1), unnormalized: entries 1 at ((x<<n)|x, (y<<n)|y).
  const std::uint64_t dn = std::uint64_t(1) << n;
  const std::uint64_t dim = std::uint64_t(1) << (2 * n);
  Matrix epr = Matrix::Zero(dim, dim);
  for (std::uint64_t x = 0; x < dn; ++x)
    for (std::uint64_t y = 0; y < dn; ++y)
      epr((x << n) | x, (y << n) | y) = 1.0;

  DenseOperator total = tensor(DenseOperator(2 * n, std::move(epr)),
                               s.circuit.ancilla_density());
  Matrix work = total.matrix();
  detail::conjugate_by_circuit(work, s.circuit, 2 * n + a, n);

  std::vector<int> keep;
  for (int w = 0; w < n; ++w) keep.push_back(w);
  for (int w : s.outputs()) keep.push_back(n + w);
  DenseOperator rep = detail::trace_down_to(
      DenseOperator(2 * n + a, std::move(work)), keep);

  ChoiObject out;
  out.n = n;
  out.m = m;
  out.state = DenseOperator(rep.qubits(),
                            rep.matrix() / double(std::uint64_t(1) << n));
  out.representation = std::move(rep);
  return out;
}

/// Depth-1 circuit computing the reflection about |x>: X gates on the zero
/// positions of x, an n-wire CZ, and the X gates again.
inline Qac0Circuit hard_instance(const std::vector<int> &x) {
  const int n = static_cast<int>(x.size());
  if (n < 1) throw argument_error("hard_instance needs n >= 1");
  for (int b : x)
    if (b != 0 && b != 1) throw argument_error("x must be a bitstring");

  Eigen::Matrix2cd xgate;
  xgate << 0, 1, 1, 0;
  SingleQubitLayer flips;
  for (int i = 0; i < n; ++i)
    if (x[i] == 0) flips.gates.push_back({i, xgate});

  std::vector<int> all;
  for (int i = 0; i < n; ++i) all.push_back(i);

  Qac0Circuit c;
  c.n = n;
  c.a = 0;
  c.layers.push_back(flips);
  c.layers.push_back(CzLayer{{all}});
  c.layers.push_back(flips);
  return c;
}

}  // namespace qlc0
