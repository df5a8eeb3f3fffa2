#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "qlc0/dense_operator.hpp"
#include "qlc0/pauli.hpp"

namespace qlc0 {

namespace rng {

/// splitmix64; one independent stream per sample keeps shadow collection
/// partition-independent.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Stream {
  std::uint64_t state;
  explicit Stream(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  /// integer in [0, n) via the multiply-shift reduction
  std::uint64_t below(std::uint64_t n) {
    return std::uint64_t((static_cast<unsigned __int128>(next()) * n) >> 64);
  }
  std::uint64_t sample_stream(std::uint64_t index) const {
    return mix(state ^ mix(index));
  }
};

inline std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
  return mix(master ^ mix(index + 0x51ed2701));
}

}  // namespace rng

/// One random-Pauli-basis measurement record: basis letter (1=X,2=Y,3=Z)
/// and outcome sign per wire.
struct ShadowSample {
  std::vector<std::uint8_t> bases;
  std::vector<std::int8_t> outcomes;
};

struct ShadowSet {
  int qubits = 0;
  std::uint64_t seed = 0;
  /// median-of-means batch count used by estimators
  int batches = 1;
  std::vector<ShadowSample> samples;
};

namespace detail {

inline Eigen::Matrix2cd basis_rotation(int basis) {
  Eigen::Matrix2cd h;
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  switch (basis) {
    case 3:
      return Eigen::Matrix2cd::Identity();
    case 1:
      return h;
    case 2: {
      // maps Y to Z: H * S^dagger
      Eigen::Matrix2cd sdg;
      sdg << 1, 0, 0, cplx(0, -1);
      return h * sdg;
    }
  }
  throw argument_error("basis must be 1, 2 or 3");
}

/// Diagonal of R rho R^dagger for a per-wire basis assignment; these are the
/// exact outcome probabilities of measuring every wire in its basis.
inline std::vector<double> measurement_distribution(
    const Matrix &rho, int q, const std::vector<std::uint8_t> &bases) {
  Matrix work = rho;
  for (int w = 0; w < q; ++w) {
    if (bases[w] == 3) continue;
    const Eigen::Matrix2cd r = basis_rotation(bases[w]);
    const std::uint64_t dim = std::uint64_t(1) << q;
    const std::uint64_t bit = std::uint64_t(1) << (q - 1 - w);
    for (std::uint64_t row = 0; row < dim; ++row) {
      if (row & bit) continue;
      const std::uint64_t row1 = row | bit;
      for (std::uint64_t col = 0; col < dim; ++col) {
        const cplx a = work(row, col), b = work(row1, col);
        work(row, col) = r(0, 0) * a + r(0, 1) * b;
        work(row1, col) = r(1, 0) * a + r(1, 1) * b;
      }
    }
    const Eigen::Matrix2cd rd = r.adjoint();
    for (std::uint64_t col = 0; col < dim; ++col) {
      if (col & bit) continue;
      const std::uint64_t col1 = col | bit;
      for (std::uint64_t row = 0; row < dim; ++row) {
        const cplx a = work(row, col), b = work(row, col1);
        work(row, col) = a * rd(0, 0) + b * rd(1, 0);
        work(row, col1) = a * rd(0, 1) + b * rd(1, 1);
      }
    }
  }
  const std::uint64_t dim = std::uint64_t(1) << q;
  std::vector<double> probs(dim);
  for (std::uint64_t z = 0; z < dim; ++z)
    probs[z] = std::max(0.0, work(z, z).real());
  return probs;
}

/// Cumulative distributions for every basis combination, built lazily, plus
/// precomputed config-key pieces for the streaming sampler.
class MeasurementTable {
 public:
  MeasurementTable(const Matrix &rho, int q) : rho_(rho), q_(q) {
    combos_ = 1;
    for (int i = 0; i < q; ++i) combos_ *= 3;
    cache_.resize(combos_);

    // config key = base(combo) + spread(outcome bits); wire 0 owns the most
    // significant base-6 digit
    std::vector<std::uint64_t> place(q, 1);
    for (int w = q - 2; w >= 0; --w) place[w] = place[w + 1] * 6;
    if (combos_ <= (std::uint64_t(1) << 22)) {
      base_key_.resize(combos_);
      for (std::uint64_t combo = 0; combo < combos_; ++combo) {
        std::uint64_t cc = combo, key = 0;
        for (int w = 0; w < q; ++w) {
          key += (cc % 3) * 2 * place[w];
          cc /= 3;
        }
        base_key_[combo] = key;
      }
    }
    sign_spread_.resize(std::uint64_t(1) << q);
    for (std::uint64_t z = 0; z < sign_spread_.size(); ++z) {
      std::uint64_t key = 0;
      for (int w = 0; w < q; ++w)
        if ((z >> (q - 1 - w)) & 1u) key += place[w];
      sign_spread_[z] = key;
    }
  }

  std::uint64_t combos() const { return combos_; }
  int qubits() const { return q_; }

  static std::vector<std::uint8_t> combo_bases(std::uint64_t combo, int q) {
    std::vector<std::uint8_t> bases(q);
    for (int w = 0; w < q; ++w) {
      bases[w] = static_cast<std::uint8_t>(combo % 3 + 1);
      combo /= 3;
    }
    return bases;
  }

  std::uint64_t config_key_for(std::uint64_t combo, std::uint64_t z) const {
    if (!base_key_.empty()) return base_key_[combo] + sign_spread_[z];
    std::vector<std::uint64_t> places(q_, 1);
    for (int w = q_ - 2; w >= 0; --w) places[w] = places[w + 1] * 6;
    std::uint64_t cc = combo, key = 0;
    for (int w = 0; w < q_; ++w) {
      key += (cc % 3) * 2 * places[w];
      cc /= 3;
    }
    return key + sign_spread_[z];
  }

  const std::vector<double> &cumulative(std::uint64_t combo) {
    auto &slot = cache_[combo];
    if (slot.empty()) {
      const auto probs =
          measurement_distribution(rho_, q_, combo_bases(combo, q_));
      slot.resize(probs.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        slot[i] = acc;
      }
      // guard against rounding when the trace is 1 - eps
      slot.back() = std::max(slot.back(), 1.0);
    }
    return slot;
  }

 private:
  Matrix rho_;
  int q_;
  std::uint64_t combos_;
  std::vector<std::vector<double>> cache_;
  std::vector<std::uint64_t> base_key_;
  std::vector<std::uint64_t> sign_spread_;
};

inline std::uint64_t sample_outcome(const std::vector<double> &cumulative,
                                    double u) {
  const auto it =
      std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::uint64_t(std::min<std::ptrdiff_t>(
      it - cumulative.begin(),
      static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

/// Per-wire config digit: (basis-1)*2 + (outcome < 0), so 0..5.
inline std::uint64_t config_key(const std::vector<std::uint8_t> &bases,
                                const std::vector<std::int8_t> &outcomes) {
  std::uint64_t key = 0;
  for (std::size_t w = 0; w < bases.size(); ++w)
    key = key * 6 + std::uint64_t((bases[w] - 1) * 2 + (outcomes[w] < 0));
  return key;
}

/// Draws sample `index` and returns just its config key. Produces the same
/// record stream as collect_shadows for the same seed.
inline std::uint64_t draw_config_key(MeasurementTable &table,
                                     std::uint64_t seed,
                                     std::uint64_t index) {
  rng::Stream stream(rng::derive(seed, index));
  const std::uint64_t combo = stream.below(table.combos());
  const auto &cum = table.cumulative(combo);
  const std::uint64_t z = sample_outcome(cum, stream.uniform());
  return table.config_key_for(combo, z);
}

}  // namespace detail

/// Draws `n_samples` random-Pauli-basis measurements of `state` from the
/// exact outcome distribution. Deterministic given `seed`, and each sample
/// has its own derived substream, so any partition of the index range
/// produces identical records.
inline ShadowSet collect_shadows(const DenseOperator &state,
                                 std::uint64_t n_samples, std::uint64_t seed,
                                 int batches = 1) {
  check_density(state);
  if (batches < 1) throw argument_error("batches must be >= 1");
  if (n_samples < std::uint64_t(batches))
    throw argument_error("need at least one sample per batch");

  const int q = state.qubits();
  detail::MeasurementTable table(state.matrix(), q);

  ShadowSet out;
  out.qubits = q;
  out.seed = seed;
  out.batches = batches;
  out.samples.resize(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    rng::Stream stream(rng::derive(seed, i));
    const std::uint64_t combo = stream.below(table.combos());
    const auto &cum = table.cumulative(combo);
    const std::uint64_t z = detail::sample_outcome(cum, stream.uniform());

    ShadowSample &s = out.samples[i];
    s.bases = detail::MeasurementTable::combo_bases(combo, q);
    s.outcomes.resize(q);
    for (int w = 0; w < q; ++w)
      s.outcomes[w] = ((z >> (q - 1 - w)) & 1u) ? -1 : 1;
  }
  return out;
}

/// Per-batch aggregation of samples by (basis, outcome) configuration; the
/// per-observable estimator only depends on the configuration, so batch
/// means reduce to weighted sums over configs.
class ShadowAccumulator {
 public:
  ShadowAccumulator(int qubits, int batches, std::uint64_t total_samples)
      : q_(qubits), batches_(batches), total_(total_samples) {
    if (batches_ < 1) throw argument_error("batches must be >= 1");
    if (total_ < std::uint64_t(batches_))
      throw argument_error("need at least one sample per batch");
    configs_ = 1;
    bool dense = true;
    for (int i = 0; i < q_; ++i) {
      configs_ *= 6;
      if (configs_ > 60000) {
        dense = false;
        break;
      }
    }
    if (dense)
      dense_.assign(std::size_t(batches_) * configs_, 0);
    else
      sparse_.resize(batches_);
    batch_size_.assign(batches_, 0);
  }

  int qubits() const { return q_; }
  int batches() const { return batches_; }
  std::uint64_t total_samples() const { return total_; }

  int batch_of(std::uint64_t sample_index) const {
    return static_cast<int>(sample_index * std::uint64_t(batches_) / total_);
  }

  void add(std::uint64_t sample_index, std::uint64_t config) {
    const int b = batch_of(sample_index);
    ++batch_size_[b];
    if (!dense_.empty())
      ++dense_[std::size_t(b) * configs_ + config];
    else
      ++sparse_[b][config];
  }

  void add_sample(std::uint64_t sample_index, const ShadowSample &s) {
    add(sample_index, detail::config_key(s.bases, s.outcomes));
  }

  /// Median over batches of the batch-mean single-sample estimator for
  /// sigma: product over the support of 3 * outcome when the basis matches,
  /// zero otherwise.
  double estimate(const PauliString &sigma) const {
    std::vector<int> support;
    for (int w = 0; w < q_; ++w)
      if (sigma.letter(w) != 0) support.push_back(w);

    // digit place values, wire 0 owns the most significant digit
    std::vector<std::uint64_t> place(q_, 1);
    for (int w = q_ - 2; w >= 0; --w) place[w] = place[w + 1] * 6;

    std::vector<double> means(batches_, 0.0);
    const auto weight = [&](std::uint64_t config) {
      double v = 1.0;
      for (int w : support) {
        const int digit = int((config / place[w]) % 6);
        const int basis = digit / 2 + 1;
        if (basis != sigma.letter(w)) return 0.0;
        v *= (digit % 2) ? -3.0 : 3.0;
      }
      return v;
    };

    for (int b = 0; b < batches_; ++b) {
      double sum = 0.0;
      if (!dense_.empty()) {
        const std::int64_t *row = dense_.data() + std::size_t(b) * configs_;
        for (std::uint64_t cfg = 0; cfg < configs_; ++cfg)
          if (row[cfg]) sum += double(row[cfg]) * weight(cfg);
      } else {
        for (const auto &[cfg, count] : sparse_[b])
          sum += double(count) * weight(cfg);
      }
      means[b] = sum / double(batch_size_[b]);
    }
    std::sort(means.begin(), means.end());
    const int k = batches_;
    return (k % 2) ? means[k / 2]
                   : 0.5 * (means[k / 2 - 1] + means[k / 2]);
  }

  /// Global config counts (all batches merged), for pair statistics.
  std::vector<std::pair<std::uint64_t, std::int64_t>> merged_counts() const {
    std::unordered_map<std::uint64_t, std::int64_t> acc;
    if (!dense_.empty()) {
      for (int b = 0; b < batches_; ++b) {
        const std::int64_t *row = dense_.data() + std::size_t(b) * configs_;
        for (std::uint64_t cfg = 0; cfg < configs_; ++cfg)
          if (row[cfg]) acc[cfg] += row[cfg];
      }
    } else {
      for (const auto &m : sparse_)
        for (const auto &[cfg, count] : m) acc[cfg] += count;
    }
    std::vector<std::pair<std::uint64_t, std::int64_t>> out(acc.begin(),
                                                            acc.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  int q_;
  int batches_;
  std::uint64_t total_;
  std::uint64_t configs_ = 1;
  std::vector<std::int64_t> dense_;
  std::vector<std::unordered_map<std::uint64_t, std::int64_t>> sparse_;
  std::vector<std::int64_t> batch_size_;
};

inline ShadowAccumulator accumulate(const ShadowSet &shadows) {
  ShadowAccumulator acc(shadows.qubits, shadows.batches,
                        shadows.samples.size());
  for (std::size_t i = 0; i < shadows.samples.size(); ++i)
    acc.add_sample(i, shadows.samples[i]);
  return acc;
}

/// Median-of-means estimates of Tr(B_sigma rho) for each observable.
inline std::map<PauliString, double> estimate_pauli_observables(
    const ShadowSet &shadows, const std::vector<PauliString> &observables,
    int max_degree) {
  for (const auto &s : observables) {
    if (s.qubits() != shadows.qubits)
      throw argument_error("observable length mismatch");
    if (s.weight() > max_degree)
      throw precondition_error("observable weight " +
                               std::to_string(s.weight()) +
                               " exceeds declared degree bound " +
                               std::to_string(max_degree));
  }
  const ShadowAccumulator acc = accumulate(shadows);
  std::map<PauliString, double> out;
  for (const auto &s : observables) out[s] = acc.estimate(s);
  return out;
}

/// Tr(rho^2) from the dense state.
inline double exact_purity(const DenseOperator &state) {
  return (state.matrix() * state.matrix()).trace().real();
}

/// Unbiased two-copy purity estimator: the pair U-statistic of
/// Tr(snapshot_s snapshot_t), which factorizes per wire into
/// {same basis+sign: 5, same basis opposite sign: -4, different basis: 1/2}.
inline double estimate_purity(const ShadowSet &shadows) {
  const std::uint64_t n = shadows.samples.size();
  if (n < 2) throw precondition_error("purity needs at least 2 samples");
  const int q = shadows.qubits;

  ShadowAccumulator acc(q, 1, n);
  for (std::size_t i = 0; i < shadows.samples.size(); ++i)
    acc.add_sample(i, shadows.samples[i]);
  const auto counts = acc.merged_counts();

  std::vector<std::uint64_t> place(q, 1);
  for (int w = q - 2; w >= 0; --w) place[w] = place[w + 1] * 6;

  const auto pair_weight = [&](std::uint64_t c1, std::uint64_t c2) {
    double v = 1.0;
    for (int w = 0; w < q; ++w) {
      const int d1 = int((c1 / place[w]) % 6);
      const int d2 = int((c2 / place[w]) % 6);
      if (d1 / 2 != d2 / 2)
        v *= 0.5;
      else if (d1 == d2)
        v *= 5.0;
      else
        v *= -4.0;
    }
    return v;
  };

  double total = 0.0;
  for (const auto &[c1, n1] : counts) {
    for (const auto &[c2, n2] : counts) {
      const double w = pair_weight(c1, c2);
      total += w * double(n1) * double(n2);
    }
    total -= pair_weight(c1, c1) * double(n1);
  }
  return total / (double(n) * double(n - 1));
}

/// JSON-lines serialization: a header object, then one sample per line,
/// e.g. {"b":"XZY","o":"+-+"}.
inline void write_shadow_jsonl(std::ostream &os, const ShadowSet &shadows) {
  nlohmann::json header;
  header["qubits"] = shadows.qubits;
  header["seed"] = shadows.seed;
  header["batches"] = shadows.batches;
  header["samples"] = shadows.samples.size();
  os << header.dump() << '\n';
  static const char basis_names[] = {'?', 'X', 'Y', 'Z'};
  for (const auto &s : shadows.samples) {
    std::string b(s.bases.size(), '?'), o(s.outcomes.size(), '?');
    for (std::size_t w = 0; w < s.bases.size(); ++w) {
      b[w] = basis_names[s.bases[w]];
      o[w] = s.outcomes[w] > 0 ? '+' : '-';
    }
    os << "{\"b\":\"" << b << "\",\"o\":\"" << o << "\"}\n";
  }
}

inline ShadowSet read_shadow_jsonl(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw io_error("shadow stream is missing its header line");
  nlohmann::json header = nlohmann::json::parse(line);
  ShadowSet out;
  out.qubits = header.at("qubits").get<int>();
  out.seed = header.at("seed").get<std::uint64_t>();
  out.batches = header.at("batches").get<int>();
  const std::uint64_t count = header.at("samples").get<std::uint64_t>();
  out.samples.reserve(count);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string b = j.at("b").get<std::string>();
    const std::string o = j.at("o").get<std::string>();
    if (static_cast<int>(b.size()) != out.qubits || o.size() != b.size())
      throw io_error("shadow sample line has wrong width");
    ShadowSample s;
    s.bases.resize(b.size());
    s.outcomes.resize(o.size());
    for (std::size_t w = 0; w < b.size(); ++w) {
      switch (b[w]) {
        case 'X': s.bases[w] = 1; break;
        case 'Y': s.bases[w] = 2; break;
        case 'Z': s.bases[w] = 3; break;
        default: throw io_error("invalid basis letter in shadow line");
      }
      s.outcomes[w] = (o[w] == '+') ? 1 : -1;
    }
    out.samples.push_back(std::move(s));
  }
  if (out.samples.size() != count)
    throw io_error("shadow stream sample count mismatch");
  return out;
}

}  // namespace qlc0
