#pragma once

#include <random>
#include <vector>

#include "qlc0/circuit.hpp"
#include "qlc0/dense_operator.hpp"
#include "qlc0/pauli.hpp"

namespace qlc0::testing {

using Rng = std::mt19937_64;

inline Matrix random_gaussian(int dim, Rng &rng) {
  std::normal_distribution<double> g;
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = cplx(g(rng), g(rng));
  return m;
}

inline DenseOperator random_operator(int q, Rng &rng) {
  return DenseOperator(q, random_gaussian(1 << q, rng));
}

inline DenseOperator random_unitary(int q, Rng &rng) {
  const Matrix g = random_gaussian(1 << q, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix qmat = qr.householderQ();
  // fix the phase so the distribution is Haar
  const Matrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < qmat.cols(); ++i) {
    const cplx d = rmat(i, i);
    if (std::abs(d) > 0) qmat.col(i) *= d / std::abs(d);
  }
  return DenseOperator(q, std::move(qmat));
}

inline Eigen::Matrix2cd random_gate(Rng &rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix2cd m;
  m << cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng)),
      cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
  Eigen::Matrix2cd q = qr.householderQ();
  return q;
}

inline DenseOperator random_density(int q, Rng &rng) {
  const Matrix g = random_gaussian(1 << q, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DenseOperator(q, std::move(rho));
}

inline DenseOperator random_hermitian(int q, Rng &rng) {
  const Matrix g = random_gaussian(1 << q, rng);
  return DenseOperator(q, ((g + g.adjoint()) / 2.0).eval());
}

/// Random operator rescaled to a given spectral norm.
inline DenseOperator random_with_norm(int q, double target, Rng &rng) {
  DenseOperator a = random_operator(q, rng);
  const double nrm = spectral_norm(a);
  return DenseOperator(q, (a.matrix() * (target / nrm)).eval());
}

inline PauliString random_pauli(int q, int weight, Rng &rng) {
  std::vector<int> wires(q);
  for (int i = 0; i < q; ++i) wires[i] = i;
  std::shuffle(wires.begin(), wires.end(), rng);
  std::vector<int> letters(q, 0);
  std::uniform_int_distribution<int> letter(1, 3);
  for (int i = 0; i < weight; ++i) letters[wires[i]] = letter(rng);
  return PauliString::from_letters(letters);
}

/// Random layered circuit: depth CZ layers with disjoint random sets,
/// interleaved with random single-qubit layers.
inline Qac0Circuit random_circuit(int n, int a, int depth, Rng &rng,
                                  int max_set = 3) {
  Qac0Circuit c;
  c.n = n;
  c.a = a;
  const int q = n + a;
  std::uniform_int_distribution<int> set_size(2, std::max(2, max_set));
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  const auto push_single = [&]() {
    SingleQubitLayer l;
    for (int w = 0; w < q; ++w)
      if (coin(rng) < 0.7) l.gates.push_back({w, random_gate(rng)});
    c.layers.push_back(l);
  };

  push_single();
  for (int d = 0; d < depth; ++d) {
    CzLayer cz;
    std::vector<int> wires(q);
    for (int i = 0; i < q; ++i) wires[i] = i;
    std::shuffle(wires.begin(), wires.end(), rng);
    std::size_t used = 0;
    while (used < wires.size()) {
      const int k =
          std::min<int>(set_size(rng), static_cast<int>(wires.size() - used));
      if (k < 2) break;
      std::vector<int> set(wires.begin() + used, wires.begin() + used + k);
      std::sort(set.begin(), set.end());
      cz.sets.push_back(set);
      used += k;
      if (coin(rng) < 0.3) break;
    }
    if (cz.sets.empty()) cz.sets.push_back({wires[0], wires[1]});
    c.layers.push_back(cz);
    push_single();
  }
  return c;
}

}  // namespace qlc0::testing
