#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qlc0/dense_operator.hpp"

namespace qlc0 {

/// A Pauli string over {I,X,Y,Z}^q, packed two bits per letter.
/// Letter codes: 0=I, 1=X, 2=Y, 3=Z. Wire 0 is the leftmost letter.
class PauliString {
 public:
  PauliString() : qubits_(0), packed_(0) {}

  PauliString(int qubits, std::uint64_t packed)
      : qubits_(qubits), packed_(packed) {
    if (qubits < 0 || qubits > 32)
      throw argument_error("PauliString supports up to 32 qubits");
  }

  static PauliString from_letters(const std::vector<int> &letters) {
    std::uint64_t p = 0;
    const int q = static_cast<int>(letters.size());
    for (int i = 0; i < q; ++i) {
      if (letters[i] < 0 || letters[i] > 3)
        throw argument_error("Pauli letter must be in {0,1,2,3}");
      p |= std::uint64_t(letters[i]) << (2 * i);
    }
    return PauliString(q, p);
  }

  static PauliString from_text(const std::string &text) {
    std::vector<int> letters;
    letters.reserve(text.size());
    for (char c : text) {
      switch (c) {
        case 'I': letters.push_back(0); break;
        case 'X': letters.push_back(1); break;
        case 'Y': letters.push_back(2); break;
        case 'Z': letters.push_back(3); break;
        default:
          throw argument_error(std::string("invalid Pauli letter '") + c +
                               "'");
      }
    }
    return from_letters(letters);
  }

  static PauliString identity(int qubits) { return PauliString(qubits, 0); }

  /// Single-wire Pauli `letter` at `wire`, identity elsewhere.
  static PauliString single(int qubits, int wire, int letter) {
    if (wire < 0 || wire >= qubits) throw argument_error("wire out of range");
    if (letter < 0 || letter > 3)
      throw argument_error("Pauli letter must be in {0,1,2,3}");
    return PauliString(qubits, std::uint64_t(letter) << (2 * wire));
  }

  int qubits() const { return qubits_; }
  std::uint64_t packed() const { return packed_; }

  int letter(int wire) const {
    return static_cast<int>((packed_ >> (2 * wire)) & 3u);
  }

  int weight() const {
    int w = 0;
    for (int i = 0; i < qubits_; ++i)
      if (letter(i) != 0) ++w;
    return w;
  }

  /// True if some letter inside `wires` is non-identity.
  bool touches(const std::vector<int> &wires) const {
    for (int w : wires)
      if (letter(w) != 0) return true;
    return false;
  }

  std::string text() const {
    static const char names[] = "IXYZ";
    std::string s(qubits_, 'I');
    for (int i = 0; i < qubits_; ++i) s[i] = names[letter(i)];
    return s;
  }

  bool operator==(const PauliString &o) const {
    return qubits_ == o.qubits_ && packed_ == o.packed_;
  }
  bool operator<(const PauliString &o) const {
    return packed_ < o.packed_;
  }

 private:
  int qubits_;
  std::uint64_t packed_;
};

inline std::ostream &operator<<(std::ostream &os, const PauliString &s) {
  return os << s.text();
}

/// Dense matrix of a Pauli string: Kronecker product of single-qubit Paulis.
inline DenseOperator pauli_matrix(const PauliString &s) {
  const int q = s.qubits();
  check_capacity(q, "pauli_matrix");
  const std::uint64_t dim = std::uint64_t(1) << q;
  Matrix out = Matrix::Zero(dim, dim);
  for (std::uint64_t r = 0; r < dim; ++r) {
    std::uint64_t c = r;
    cplx phase = 1.0;
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
    out(r, c) = phase;
  }
  return DenseOperator(q, std::move(out));
}

/// Sparse Pauli expansion A = sum_sigma coeff(sigma) * B_sigma.
/// Keys are ordered by packed letters, so iteration is deterministic.
class PauliExpansion {
 public:
  using CoeffMap = std::map<std::uint64_t, cplx>;

  /// Coefficients with magnitude at or below this are dropped.
  static constexpr double kDropThreshold = 1e-12;

  explicit PauliExpansion(int qubits) : qubits_(qubits) {
    if (qubits < 0 || qubits > 32)
      throw argument_error("PauliExpansion supports up to 32 qubits");
  }

  int qubits() const { return qubits_; }
  const CoeffMap &coeffs() const { return coeffs_; }
  std::size_t term_count() const { return coeffs_.size(); }

  cplx coeff(const PauliString &s) const {
    auto it = coeffs_.find(s.packed());
    return it == coeffs_.end() ? cplx(0.0) : it->second;
  }

  void set(const PauliString &s, cplx value) {
    if (s.qubits() != qubits_)
      throw argument_error("Pauli string length mismatch");
    if (std::abs(value) <= kDropThreshold)
      coeffs_.erase(s.packed());
    else
      coeffs_[s.packed()] = value;
  }

  void add(const PauliString &s, cplx value) { set(s, coeff(s) + value); }

  /// Largest support size among stored terms; 0 for the empty expansion.
  int degree() const {
    int d = 0;
    for (const auto &[key, v] : coeffs_)
      d = std::max(d, PauliString(qubits_, key).weight());
    return d;
  }

  /// Sum over stored terms of |coeff|^2 (the squared normalized 2-norm).
  double l2_squared() const {
    double s = 0.0;
    for (const auto &[key, v] : coeffs_) s += std::norm(v);
    return s;
  }

  std::vector<PauliString> support() const {
    std::vector<PauliString> out;
    out.reserve(coeffs_.size());
    for (const auto &[key, v] : coeffs_) out.emplace_back(qubits_, key);
    return out;
  }

 private:
  int qubits_;
  CoeffMap coeffs_;
};

/// Pauli coefficients of a dense operator, coeff(sigma) = 2^-q Tr(B_sigma^† A).
/// Computed with a per-wire basis transform in O(4^q q).
inline PauliExpansion expand(const DenseOperator &a) {
  const int q = a.qubits();
  const std::uint64_t dim = std::uint64_t(1) << q;

  // work[r * dim + c]; wires are converted one at a time from (row bit,
  // col bit) pairs to Pauli letter indices stored in the same two bits.
  std::vector<cplx> work(dim * dim);
  for (std::uint64_t r = 0; r < dim; ++r)
    for (std::uint64_t c = 0; c < dim; ++c)
      work[(r << q) | c] = a.matrix()(r, c);

  for (int w = 0; w < q; ++w) {
    const std::uint64_t rbit = std::uint64_t(1) << (q - 1 - w + q);
    const std::uint64_t cbit = std::uint64_t(1) << (q - 1 - w);
    const std::uint64_t total = dim * dim;
    for (std::uint64_t base = 0; base < total; ++base) {
      if (base & (rbit | cbit)) continue;
      const cplx m00 = work[base];
      const cplx m01 = work[base | cbit];
      const cplx m10 = work[base | rbit];
      const cplx m11 = work[base | rbit | cbit];
      work[base] = 0.5 * (m00 + m11);                    // I
      work[base | cbit] = 0.5 * (m01 + m10);             // X
      work[base | rbit] = cplx(0, 0.5) * (m01 - m10);    // Y
      work[base | rbit | cbit] = 0.5 * (m00 - m11);      // Z
    }
  }

  PauliExpansion out(q);
  for (std::uint64_t r = 0; r < dim; ++r)
    for (std::uint64_t c = 0; c < dim; ++c) {
      const cplx v = work[(r << q) | c];
      if (std::abs(v) <= PauliExpansion::kDropThreshold) continue;
      std::uint64_t packed = 0;
      for (int w = 0; w < q; ++w) {
        const std::uint64_t hi = (r >> (q - 1 - w)) & 1u;
        const std::uint64_t lo = (c >> (q - 1 - w)) & 1u;
        packed |= ((hi << 1) | lo) << (2 * w);
      }
      out.set(PauliString(q, packed), v);
    }
  return out;
}

/// Dense matrix of an expansion: sum of coeff(sigma) * B_sigma.
inline DenseOperator synthesize(const PauliExpansion &p) {
  const int q = p.qubits();
  check_capacity(q, "synthesize");
  const std::uint64_t dim = std::uint64_t(1) << q;
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto &[key, v] : p.coeffs()) {
    const PauliString s(q, key);
    for (std::uint64_t r = 0; r < dim; ++r) {
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
      out(r, c) += phase;
    }
  }
  return DenseOperator(q, std::move(out));
}

/// Keeps exactly the terms with weight <= d.
inline PauliExpansion truncate_degree(const PauliExpansion &p, int d) {
  if (d < 0) throw argument_error("truncation degree must be >= 0");
  PauliExpansion out(p.qubits());
  for (const auto &[key, v] : p.coeffs()) {
    const PauliString s(p.qubits(), key);
    if (s.weight() <= d) out.set(s, v);
  }
  return out;
}

/// Complement of truncate_degree: terms with weight > d.
inline PauliExpansion high_degree_part(const PauliExpansion &p, int d) {
  PauliExpansion out(p.qubits());
  for (const auto &[key, v] : p.coeffs()) {
    const PauliString s(p.qubits(), key);
    if (s.weight() > d) out.set(s, v);
  }
  return out;
}

/// CSV rows `sigma_string,weight,re,im`, ordered by packed key.
inline void write_spectrum_csv(std::ostream &os, const PauliExpansion &p) {
  os << "sigma_string,weight,re,im\n";
  char buf[64];
  for (const auto &[key, v] : p.coeffs()) {
    const PauliString s(p.qubits(), key);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", v.real(), v.imag());
    os << s.text() << ',' << s.weight() << ',' << buf << '\n';
  }
}

}  // namespace qlc0
