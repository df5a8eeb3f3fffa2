#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qlc0/circuit.hpp"
#include "qlc0/learner.hpp"
#include "qlc0/pauli.hpp"

namespace qlc0 {

/// The unitary a circuit performs on its input register when the ancilla
/// returns to |0...0> on every input (clean computation).
struct CleanComputation {
  DenseOperator unitary;  // V on n qubits
  double residual = 0.0;  // leakage outside the ancilla-|0> block
};

inline CleanComputation implicit_unitary(const Qac0Circuit &c,
                                         double tol = 1e-8) {
  const DenseOperator u = build_unitary(c);
  const int n = c.n, a = c.a;
  const std::uint64_t dn = std::uint64_t(1) << n;
  const std::uint64_t da = std::uint64_t(1) << a;

  Matrix v(dn, dn);
  double leak2 = 0.0;
  for (std::uint64_t y = 0; y < dn; ++y) {
    for (std::uint64_t x = 0; x < dn; ++x) {
      v(x, y) = u.matrix()((x << a), (y << a));
      for (std::uint64_t z = 1; z < da; ++z)
        leak2 = std::max(leak2, std::norm(u.matrix()((x << a) | z, (y << a))));
    }
  }
  CleanComputation out;
  out.residual = std::sqrt(leak2);
  if (out.residual > tol)
    throw validation_error(
        "circuit is not a clean computation: ancilla leakage " +
        std::to_string(out.residual));
  out.unitary = DenseOperator(n, std::move(v));
  if ((out.unitary.matrix().adjoint() * out.unitary.matrix() -
       Matrix::Identity(dn, dn))
          .cwiseAbs()
          .maxCoeff() > tol)
    throw validation_error("implicit unitary fails the unitarity check");
  return out;
}

/// V_i with V * V_i supported as W otimes I on wire i. `residual` is the
/// certified distance of V * V_i from that product form.
struct LocalInversion {
  int wire = 0;
  DenseOperator op;  // V_i on the n input qubits
  double residual = 0.0;
};

namespace detail {

inline double product_form_residual(const DenseOperator &p, int wire,
                                    DenseOperator *factor_out = nullptr) {
  // If P = W otimes I_wire then W = Tr_wire(P) / 2.
  DenseOperator w = partial_trace(p, {wire});
  w = DenseOperator(w.qubits(), (w.matrix() / 2.0).eval());
  std::vector<int> rest;
  for (int q = 0; q < p.qubits(); ++q)
    if (q != wire) rest.push_back(q);
  const DenseOperator rebuilt = embed(w, rest, p.qubits());
  if (factor_out) *factor_out = w;
  return spectral_norm(p - rebuilt);
}

}  // namespace detail

/// Canonical local inversion V_i = V^dagger (valid for every wire).
inline LocalInversion local_inversion(const Qac0Circuit &c, int wire) {
  const CleanComputation clean = implicit_unitary(c);
  if (wire < 0 || wire >= c.n) throw argument_error("wire out of range");
  LocalInversion inv;
  inv.wire = wire;
  inv.op = clean.unitary.adjoint();
  inv.residual = detail::product_form_residual(clean.unitary * inv.op, wire);
  return inv;
}

/// Certifies a caller-supplied candidate against the product-form test;
/// rejects residuals above 1e-6.
inline LocalInversion local_inversion(const Qac0Circuit &c, int wire,
                                      const DenseOperator &candidate) {
  const CleanComputation clean = implicit_unitary(c);
  if (wire < 0 || wire >= c.n) throw argument_error("wire out of range");
  if (candidate.qubits() != c.n)
    throw argument_error("candidate must act on the n input qubits");
  if ((candidate.matrix().adjoint() * candidate.matrix() -
       Matrix::Identity(candidate.dim(), candidate.dim()))
          .cwiseAbs()
          .maxCoeff() > 1e-9)
    throw invalid_inversion_error("candidate is not unitary");

  LocalInversion inv;
  inv.wire = wire;
  inv.op = candidate;
  inv.residual =
      detail::product_form_residual(clean.unitary * candidate, wire);
  if (inv.residual > 1e-6)
    throw invalid_inversion_error(
        "candidate fails the local-inversion certificate: residual " +
        std::to_string(inv.residual));
  return inv;
}

/// Choi representation of the single-output restriction
/// rho -> Tr_{-i}(V rho V^dagger): reference register on wires 0..n-1, the
/// surviving output wire last.
inline DenseOperator restricted_choi(const DenseOperator &v, int wire) {
  const int n = v.qubits();
  check_capacity(2 * n, "restricted_choi");
  const std::uint64_t dn = std::uint64_t(1) << n;
  const std::uint64_t dim = std::uint64_t(1) << (2 * n);
  Matrix epr = Matrix::Zero(dim, dim);
  for (std::uint64_t x = 0; x < dn; ++x)
    for (std::uint64_t y = 0; y < dn; ++y)
      epr((x << n) | x, (y << n) | y) = 1.0;

  DenseOperator big(2 * n, std::move(epr));
  std::vector<int> target(n);
  for (int k = 0; k < n; ++k) target[k] = n + k;
  const DenseOperator lifted = embed(v, target, 2 * n);
  big = lifted * big * lifted.adjoint();

  std::vector<int> traced;
  for (int k = 0; k < n; ++k)
    if (k != wire) traced.push_back(n + k);
  return partial_trace(big, traced);
}

/// Conjugated single-wire Pauli recovered from (an approximation of) the
/// restricted channel's Choi representation:
///   Q_x = Tr_out[ M^T (I otimes B_x^T) ],   Q_0 = I.
/// With the exact Choi input this equals V B_x^(wire) V^dagger.
inline DenseOperator heisenberg_slice(const DenseOperator &m_i, int x) {
  if (x < 0 || x > 3) throw argument_error("Pauli index must be in 0..3");
  const int n = m_i.qubits() - 1;
  if (n < 1) throw argument_error("Choi input needs at least 2 qubits");
  if (x == 0) return DenseOperator::identity(n);

  const DenseOperator bx_t = pauli_matrix(PauliString::from_letters({x}))
                                 .transpose();
  const DenseOperator lifted = embed(bx_t, {n}, n + 1);
  const DenseOperator product = m_i.transpose() * lifted;
  return partial_trace(product, {n});
}

/// Pauli decomposition of the swap between wire i and wire i+n of a
/// 2n-qubit system: one half times the sum over paired Paulis.
inline DenseOperator swap_gate(int n, int wire) {
  DenseOperator acc = DenseOperator::zero(2 * n);
  for (int x = 0; x < 4; ++x) {
    const DenseOperator b = pauli_matrix(PauliString::from_letters({x}));
    acc = acc + embed(b, {wire}, 2 * n) * embed(b, {wire + n}, 2 * n);
  }
  return cplx(0.5) * acc;
}

struct SewnOperator {
  int n = 0;
  DenseOperator op;  // on 2n qubits; original register first, mirror second
  /// per_wire[i][x] are the Q_{i,x} blocks the operator was sewn from
  std::vector<std::array<DenseOperator, 4>> per_wire;
};

/// Q_i = 1/2 sum_x Q_{i,x} otimes B_x^(i+n) on 2n qubits.
inline DenseOperator sew_factor(const std::array<DenseOperator, 4> &family,
                                int n, int wire) {
  const std::uint64_t dim = std::uint64_t(1) << (2 * n);
  const std::uint64_t dn = std::uint64_t(1) << n;
  const std::uint64_t mirror_bit = std::uint64_t(1) << (n - 1 - wire);
  Matrix qi = Matrix::Zero(dim, dim);
  for (int x = 0; x < 4; ++x) {
    const Matrix &blk = family[x].matrix();
    const DenseOperator bx = pauli_matrix(PauliString::from_letters({x}));
    for (std::uint64_t r1 = 0; r1 < dn; ++r1)
      for (std::uint64_t c1 = 0; c1 < dn; ++c1) {
        const cplx v = 0.5 * blk(r1, c1);
        if (v == cplx(0.0)) continue;
        for (std::uint64_t r2 = 0; r2 < dn; ++r2) {
          const std::uint64_t rb = (r2 & mirror_bit) ? 1 : 0;
          for (int cb = 0; cb < 2; ++cb) {
            const cplx f = bx.matrix()(rb, cb);
            if (f == cplx(0.0)) continue;
            const std::uint64_t c2 =
                cb ? (r2 | mirror_bit) : (r2 & ~mirror_bit);
            qi((r1 << n) | r2, (c1 << n) | c2) += v * f;
          }
        }
      }
  }
  return DenseOperator(2 * n, std::move(qi));
}

/// Assembles Q = S * prod_i Q_i with Q_i = 1/2 sum_x Q_{i,x} otimes
/// B_x^(i+n). With exact blocks this reconstructs V otimes V^dagger.
inline SewnOperator sew(const std::vector<std::array<DenseOperator, 4>> &blocks,
                        int n) {
  if (static_cast<int>(blocks.size()) != n)
    throw argument_error("need one block family per wire");
  for (const auto &family : blocks)
    for (const auto &b : family)
      if (b.qubits() != n)
        throw argument_error("each block must act on the n-qubit register");
  check_capacity(2 * n, "sew");

  const std::uint64_t dim = std::uint64_t(1) << (2 * n);
  Matrix full_swap = Matrix::Zero(dim, dim);
  {
    const std::uint64_t dn = std::uint64_t(1) << n;
    for (std::uint64_t r1 = 0; r1 < dn; ++r1)
      for (std::uint64_t r2 = 0; r2 < dn; ++r2)
        full_swap((r1 << n) | r2, (r2 << n) | r1) = 1.0;
  }

  Matrix q = std::move(full_swap);
  for (int i = 0; i < n; ++i) q = q * sew_factor(blocks[i], n, i).matrix();

  SewnOperator out;
  out.n = n;
  out.op = DenseOperator(2 * n, std::move(q));
  out.per_wire = blocks;
  return out;
}

enum class ReductionMode { Exact, Sampled };

struct WireReductionReport {
  int wire = 0;
  double inversion_residual = 0.0;
  double choi_error = 0.0;   // ||M_i - exact Choi|| (dense oracle)
  double factor_error = 0.0; // ||Q_i - exact sew factor|| (dense oracle)
  std::uint64_t samples_used = 0;
};

struct ReductionReport {
  SewnOperator sewn;
  std::vector<WireReductionReport> per_wire;
  double final_error = 0.0;  // ||Q - V otimes V^dagger|| (dense oracle)
  double error_bound = 0.0;  // 9 n eps
  double eps = 0.0;
  double delta = 0.0;
  ReductionMode mode = ReductionMode::Exact;
};

/// Per-wire pipeline: restrict the channel to one output wire, learn its
/// Choi representation (exactly or through the shadow learner with a delta/n
/// failure share), slice out the conjugated Paulis, and sew the global
/// V otimes V^dagger back together.
inline ReductionReport run_reduction(const Qac0Circuit &c, ReductionMode mode,
                                     double eps, double delta,
                                     std::uint64_t seed,
                                     const LearnOptions &base_opt = {}) {
  const CleanComputation clean = implicit_unitary(c);
  const int n = c.n;
  check_capacity(2 * n, "run_reduction");

  ReductionReport rep;
  rep.mode = mode;
  rep.eps = eps;
  rep.delta = delta;
  rep.error_bound = 9.0 * double(n) * eps;

  std::vector<std::array<DenseOperator, 4>> blocks;
  for (int i = 0; i < n; ++i) {
    WireReductionReport wr;
    wr.wire = i;

    const LocalInversion inv = local_inversion(c, i);
    wr.inversion_residual = inv.residual;

    // The single-output restriction is the same channel for every valid
    // local inversion; its Choi representation is what the slices consume.
    const DenseOperator exact_choi = restricted_choi(clean.unitary, i);

    DenseOperator m_i = exact_choi;
    if (mode == ReductionMode::Sampled) {
      LearnOptions opt = base_opt;
      opt.seed = rng::derive(seed, std::uint64_t(i) + 101);
      const DenseOperator state(
          exact_choi.qubits(),
          (exact_choi.matrix() / std::exp2(double(n))).eval());
      LowDegreeHypothesis hyp = learn_choi_state(
          state, n, 1, n + 1, eps, delta / double(n), opt);
      m_i = synthesize(hyp.expansion);
      wr.samples_used = hyp.samples_used;
    }
    wr.choi_error = spectral_norm(m_i - exact_choi);

    std::array<DenseOperator, 4> family{
        DenseOperator::identity(n), DenseOperator::identity(n),
        DenseOperator::identity(n), DenseOperator::identity(n)};
    for (int x = 1; x < 4; ++x) family[x] = heisenberg_slice(m_i, x);

    std::array<DenseOperator, 4> exact_family{
        DenseOperator::identity(n), DenseOperator::identity(n),
        DenseOperator::identity(n), DenseOperator::identity(n)};
    for (int x = 1; x < 4; ++x)
      exact_family[x] = heisenberg_slice(exact_choi, x);
    wr.factor_error = spectral_norm(sew_factor(family, n, i) -
                                    sew_factor(exact_family, n, i));

    blocks.push_back(std::move(family));
    rep.per_wire.push_back(wr);
  }

  rep.sewn = sew(blocks, n);
  rep.final_error = spectral_norm(
      rep.sewn.op - tensor(clean.unitary, clean.unitary.adjoint()));
  return rep;
}

}  // namespace qlc0
