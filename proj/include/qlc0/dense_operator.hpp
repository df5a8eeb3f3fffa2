#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "qlc0/config.hpp"
#include "qlc0/errors.hpp"

namespace qlc0 {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Dense square complex operator on `qubits` qubits (dimension 2^qubits).
/// Wire 0 is the highest-order tensor factor: the bit of wire w within a
/// basis-state index is bit (qubits - 1 - w). All modules share this
/// convention.
class DenseOperator {
 public:
  DenseOperator() : qubits_(0), m_(Matrix::Zero(1, 1)) {}

  DenseOperator(int qubits, Matrix m) : qubits_(qubits), m_(std::move(m)) {
    if (qubits < 0) throw argument_error("negative qubit count");
    const Eigen::Index dim = Eigen::Index(1) << qubits;
    if (m_.rows() != dim || m_.cols() != dim)
      throw validation_error("matrix dimension does not match qubit count");
    if (!m_.allFinite())
      throw validation_error("operator entries must be finite");
  }

  static DenseOperator identity(int qubits) {
    check_capacity(qubits, "identity");
    const Eigen::Index dim = Eigen::Index(1) << qubits;
    return DenseOperator(qubits, Matrix::Identity(dim, dim));
  }

  static DenseOperator zero(int qubits) {
    check_capacity(qubits, "zero");
    const Eigen::Index dim = Eigen::Index(1) << qubits;
    return DenseOperator(qubits, Matrix::Zero(dim, dim));
  }

  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Matrix &matrix() const { return m_; }
  Matrix &matrix() { return m_; }

  DenseOperator adjoint() const { return DenseOperator(qubits_, m_.adjoint()); }
  DenseOperator transpose() const {
    return DenseOperator(qubits_, m_.transpose());
  }
  cplx trace() const { return m_.trace(); }

  DenseOperator operator*(const DenseOperator &o) const {
    if (qubits_ != o.qubits_) throw argument_error("qubit count mismatch");
    return DenseOperator(qubits_, m_ * o.m_);
  }
  DenseOperator operator+(const DenseOperator &o) const {
    if (qubits_ != o.qubits_) throw argument_error("qubit count mismatch");
    return DenseOperator(qubits_, m_ + o.m_);
  }
  DenseOperator operator-(const DenseOperator &o) const {
    if (qubits_ != o.qubits_) throw argument_error("qubit count mismatch");
    return DenseOperator(qubits_, m_ - o.m_);
  }
  friend DenseOperator operator*(cplx c, const DenseOperator &o) {
    return DenseOperator(o.qubits_, c * o.m_);
  }

  bool is_hermitian(double tol = 1e-12) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  int qubits_;
  Matrix m_;
};

enum class NormKind { Spectral, Schatten2Normalized, Frobenius, Trace };

namespace detail {

inline Eigen::VectorXd singular_values(const Matrix &m) {
  // Full decomposition only; Jacobi is the most accurate at small sizes.
  if (m.rows() <= 256) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

}  // namespace detail

inline double spectral_norm(const DenseOperator &a) {
  if (a.dim() == 1) return std::abs(a.matrix()(0, 0));
  return detail::singular_values(a.matrix())(0);
}

/// Spectral norm that takes the eigenvalue route for Hermitian input.
/// Same value as spectral_norm; used where many large Hermitian
/// differences have to be measured.
inline double spectral_norm_fast(const DenseOperator &a) {
  if (a.dim() == 1) return std::abs(a.matrix()(0, 0));
  const double scale = a.matrix().cwiseAbs().maxCoeff();
  if ((a.matrix() - a.matrix().adjoint()).cwiseAbs().maxCoeff() <=
      1e-13 * std::max(1.0, scale)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return spectral_norm(a);
}

inline double norm(const DenseOperator &a, NormKind kind) {
  switch (kind) {
    case NormKind::Spectral:
      return spectral_norm(a);
    case NormKind::Frobenius:
      return a.matrix().norm();
    case NormKind::Schatten2Normalized:
      return a.matrix().norm() / std::sqrt(double(a.dim()));
    case NormKind::Trace:
      return detail::singular_values(a.matrix()).sum();
  }
  throw argument_error("unknown norm kind");
}

/// Kronecker product; a's wires become the high-order block (wires 0..).
inline DenseOperator tensor(const DenseOperator &a, const DenseOperator &b) {
  const int q = a.qubits() + b.qubits();
  check_capacity(q, "tensor");
  const Eigen::Index da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return DenseOperator(q, std::move(out));
}

namespace detail {

inline void check_wires(const std::vector<int> &wires, int q,
                        bool require_distinct = true) {
  std::vector<bool> seen(q, false);
  for (int w : wires) {
    if (w < 0 || w >= q)
      throw argument_error("wire index " + std::to_string(w) +
                           " out of range for " + std::to_string(q) +
                           " qubits");
    if (require_distinct && seen[w])
      throw argument_error("duplicate wire index " + std::to_string(w));
    seen[w] = true;
  }
}

// Scatters the bits of `value` (low bit = last wire in `wires`) into an
// index, following the wire-0-is-MSB convention.
inline std::uint64_t scatter_bits(std::uint64_t value,
                                  const std::vector<int> &wires, int q) {
  std::uint64_t idx = 0;
  const int k = static_cast<int>(wires.size());
  for (int j = 0; j < k; ++j) {
    const std::uint64_t bit = (value >> (k - 1 - j)) & 1u;
    idx |= bit << (q - 1 - wires[j]);
  }
  return idx;
}

}  // namespace detail

/// Partial trace over `traced_wires`; remaining wires keep their relative
/// order. Preserves the trace exactly.
inline DenseOperator partial_trace(const DenseOperator &a,
                                   const std::vector<int> &traced_wires) {
  const int q = a.qubits();
  detail::check_wires(traced_wires, q);
  std::vector<bool> traced(q, false);
  for (int w : traced_wires) traced[w] = true;
  std::vector<int> kept;
  for (int w = 0; w < q; ++w)
    if (!traced[w]) kept.push_back(w);

  const int qk = static_cast<int>(kept.size());
  const int qt = q - qk;
  const std::uint64_t dk = std::uint64_t(1) << qk;
  const std::uint64_t dt = std::uint64_t(1) << qt;

  std::vector<std::uint64_t> kept_idx(dk), traced_idx(dt);
  std::vector<int> tw;
  for (int w = 0; w < q; ++w)
    if (traced[w]) tw.push_back(w);
  for (std::uint64_t v = 0; v < dk; ++v)
    kept_idx[v] = detail::scatter_bits(v, kept, q);
  for (std::uint64_t v = 0; v < dt; ++v)
    traced_idx[v] = detail::scatter_bits(v, tw, q);

  Matrix out = Matrix::Zero(dk, dk);
  for (std::uint64_t r = 0; r < dk; ++r)
    for (std::uint64_t c = 0; c < dk; ++c) {
      cplx s = 0.0;
      for (std::uint64_t t = 0; t < dt; ++t)
        s += a.matrix()(kept_idx[r] | traced_idx[t],
                        kept_idx[c] | traced_idx[t]);
      out(r, c) = s;
    }
  return DenseOperator(qk, std::move(out));
}

/// Result wire j acts where `wires[j]` pointed in the input; remaining
/// wires of the enlarged space carry identity.
inline DenseOperator embed(const DenseOperator &op,
                           const std::vector<int> &wires, int total_qubits) {
  if (static_cast<int>(wires.size()) != op.qubits())
    throw argument_error("embed: wire list size must match operator qubits");
  detail::check_wires(wires, total_qubits);
  check_capacity(total_qubits, "embed");

  std::vector<bool> used(total_qubits, false);
  for (int w : wires) used[w] = true;
  std::vector<int> rest;
  for (int w = 0; w < total_qubits; ++w)
    if (!used[w]) rest.push_back(w);

  const std::uint64_t dop = std::uint64_t(1) << op.qubits();
  const std::uint64_t dfree = std::uint64_t(1) << rest.size();
  const std::uint64_t dim = std::uint64_t(1) << total_qubits;

  std::vector<std::uint64_t> op_idx(dop), free_idx(dfree);
  for (std::uint64_t v = 0; v < dop; ++v)
    op_idx[v] = detail::scatter_bits(v, wires, total_qubits);
  for (std::uint64_t v = 0; v < dfree; ++v)
    free_idx[v] = detail::scatter_bits(v, rest, total_qubits);

  Matrix out = Matrix::Zero(dim, dim);
  for (std::uint64_t r = 0; r < dop; ++r)
    for (std::uint64_t c = 0; c < dop; ++c) {
      const cplx v = op.matrix()(r, c);
      if (v == cplx(0.0)) continue;
      for (std::uint64_t f = 0; f < dfree; ++f)
        out(op_idx[r] | free_idx[f], op_idx[c] | free_idx[f]) = v;
    }
  return DenseOperator(total_qubits, std::move(out));
}

/// Reorders wires: result wire i carries what input wire perm[i] carried.
inline DenseOperator permute_wires(const DenseOperator &a,
                                   const std::vector<int> &perm) {
  const int q = a.qubits();
  if (static_cast<int>(perm.size()) != q)
    throw argument_error("permutation size mismatch");
  detail::check_wires(perm, q);

  const std::uint64_t dim = std::uint64_t(1) << q;
  std::vector<std::uint64_t> map(dim);
  for (std::uint64_t x = 0; x < dim; ++x) {
    std::uint64_t y = 0;
    for (int i = 0; i < q; ++i) {
      const std::uint64_t bit = (x >> (q - 1 - i)) & 1u;
      y |= bit << (q - 1 - perm[i]);
    }
    map[x] = y;  // new index x reads from old index y
  }
  Matrix out(dim, dim);
  for (std::uint64_t r = 0; r < dim; ++r)
    for (std::uint64_t c = 0; c < dim; ++c)
      out(r, c) = a.matrix()(map[r], map[c]);
  return DenseOperator(q, std::move(out));
}

/// <0...0| a |0...0> block over `wires`; remaining wires keep relative order.
inline DenseOperator project_zero(const DenseOperator &a,
                                  const std::vector<int> &wires) {
  const int q = a.qubits();
  detail::check_wires(wires, q);
  std::vector<bool> proj(q, false);
  for (int w : wires) proj[w] = true;
  std::vector<int> kept;
  for (int w = 0; w < q; ++w)
    if (!proj[w]) kept.push_back(w);

  const int qk = static_cast<int>(kept.size());
  const std::uint64_t dk = std::uint64_t(1) << qk;
  std::vector<std::uint64_t> kept_idx(dk);
  for (std::uint64_t v = 0; v < dk; ++v)
    kept_idx[v] = detail::scatter_bits(v, kept, q);

  Matrix out(dk, dk);
  for (std::uint64_t r = 0; r < dk; ++r)
    for (std::uint64_t c = 0; c < dk; ++c)
      out(r, c) = a.matrix()(kept_idx[r], kept_idx[c]);
  return DenseOperator(qk, std::move(out));
}

/// Hermitian PSD square root. Eigenvalues in [-1e-9, 0) are clamped to 0;
/// anything lower is rejected.
inline DenseOperator psd_sqrt(const DenseOperator &a) {
  const double scale = std::max(1.0, a.matrix().cwiseAbs().maxCoeff());
  if ((a.matrix() - a.matrix().adjoint()).cwiseAbs().maxCoeff() >
      1e-9 * scale)
    throw not_psd_error("psd_sqrt: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      ((a.matrix() + a.matrix().adjoint()) / 2.0).eval());
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-9)
      throw not_psd_error("psd_sqrt: eigenvalue " + std::to_string(ev(i)) +
                          " below -1e-9");
    ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  }
  Matrix r = es.eigenvectors() * ev.asDiagonal() *
             es.eigenvectors().adjoint();
  return DenseOperator(a.qubits(), std::move(r));
}

/// Checks the density-operator contract: Hermitian, PSD and unit trace
/// within `tol`.
inline void check_density(const DenseOperator &rho, double tol = 1e-9) {
  if ((rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff() > tol)
    throw validation_error("density operator must be Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > tol)
    throw validation_error("density operator must have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(),
                                           Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw validation_error("density operator must be PSD");
}

}  // namespace qlc0
