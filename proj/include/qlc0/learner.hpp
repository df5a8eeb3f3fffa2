#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qlc0/circuit.hpp"
#include "qlc0/pauli.hpp"
#include "qlc0/shadows.hpp"

namespace qlc0 {

/// How the shadow accuracy target is derived from the requested 2-norm
/// accuracy eps.
///  - ParsevalTight: per-observable target eps * 2^m / sqrt(M), the exact
///    Parseval budget over the M estimated coefficients. Feasible at desk
///    scale and delivers the same guarantee.
///  - PerTermOverCount: the looser eps^2 / (D (n+m)^D 2^m) per-term target;
///    kept for cross-checking the documented rescaling chain on tiny
///    instances, unusable at realistic sizes.
enum class AccuracyPolicy { ParsevalTight, PerTermOverCount };

struct LearnOptions {
  AccuracyPolicy policy = AccuracyPolicy::ParsevalTight;
  std::uint64_t seed = 1;
  std::uint64_t max_samples = 6ULL * 1000 * 1000 * 1000;
  std::uint64_t max_observables = 4ULL * 1000 * 1000;
  /// Diagnostics: replaces the planned sample count when nonzero. The
  /// guarantee no longer applies below the planned count.
  std::uint64_t samples_override = 0;
};

/// All Pauli strings on q wires with weight at most d, ordered by packed key.
inline std::vector<PauliString> low_weight_strings(int q, int d) {
  std::vector<PauliString> out;
  std::vector<int> letters(q, 0);
  const auto emit = [&]() { out.push_back(PauliString::from_letters(letters)); };

  // depth-first over wires, tracking remaining weight budget
  const auto rec = [&](auto &&self, int wire, int budget) -> void {
    if (wire == q) {
      emit();
      return;
    }
    letters[wire] = 0;
    self(self, wire + 1, budget);
    if (budget > 0) {
      for (int l = 1; l <= 3; ++l) {
        letters[wire] = l;
        self(self, wire + 1, budget - 1);
      }
      letters[wire] = 0;
    }
  };
  rec(rec, 0, d);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::uint64_t low_weight_count(int q, int d) {
  long double total = 0.0L;
  long double binom = 1.0L;
  long double pow3 = 1.0L;
  for (int j = 0; j <= d && j <= q; ++j) {
    total += binom * pow3;
    binom = binom * (q - j) / (j + 1);
    pow3 *= 3.0L;
  }
  return static_cast<std::uint64_t>(total + 0.5L);
}

struct ShadowPlan {
  std::uint64_t observables = 0;  // M
  double shadow_accuracy = 0.0;   // per-observable target
  int batches = 0;                // K = ceil(8 ln(M / delta))
  std::uint64_t samples = 0;      // N = ceil(4 * 3^D * K / accuracy^2)
};

inline ShadowPlan plan_shadow_run(int n, int m, int D, double eps,
                                  double delta, AccuracyPolicy policy) {
  const int q = n + m;
  if (D < 1 || D > q) throw argument_error("D must lie in [1, n+m]");
  if (!(eps > 0.0 && eps < 1.0)) throw argument_error("eps must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw argument_error("delta must be in (0,1)");

  ShadowPlan plan;
  plan.observables = low_weight_count(q, D);
  const double M = double(plan.observables);
  if (policy == AccuracyPolicy::ParsevalTight)
    plan.shadow_accuracy = eps * std::exp2(double(m)) / std::sqrt(M);
  else
    plan.shadow_accuracy = eps * eps /
                           (double(D) * std::pow(double(q), double(D)) *
                            std::exp2(double(m)));
  plan.batches =
      std::max(1, int(std::ceil(8.0 * std::log(M / delta))));
  const double per_batch = 4.0 * std::pow(3.0, double(D)) /
                           (plan.shadow_accuracy * plan.shadow_accuracy);
  plan.samples = std::uint64_t(
      std::ceil(per_batch * double(plan.batches)));
  plan.samples = std::max<std::uint64_t>(plan.samples, plan.batches);
  return plan;
}

/// Learned low-degree stand-in for a Choi representation:
/// L = sum over |sigma| <= D of alpha_sigma B_sigma.
struct LowDegreeHypothesis {
  PauliExpansion expansion{0};
  int D = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t samples_used = 0;
  int batches = 0;
  double shadow_accuracy = 0.0;
  std::uint64_t observable_count = 0;
  AccuracyPolicy policy = AccuracyPolicy::ParsevalTight;
  std::uint64_t seed = 0;
  bool meets_plan = true;

  double l2_norm() const { return std::sqrt(expansion.l2_squared()); }
};

/// Core estimation step shared by all entry points: median-of-means shadow
/// estimates of Tr(rho B_sigma), rescaled into Choi coefficients by 2^-m.
inline LowDegreeHypothesis learn_from_accumulator(
    const ShadowAccumulator &acc, int n, int m, int D) {
  const int q = n + m;
  if (acc.qubits() != q)
    throw argument_error("accumulator qubit count must equal n+m");
  LowDegreeHypothesis hyp;
  hyp.expansion = PauliExpansion(q);
  hyp.D = D;
  const double rescale = std::exp2(-double(m));
  for (const PauliString &sigma : low_weight_strings(q, D)) {
    const double o = acc.estimate(sigma);
    hyp.expansion.set(sigma, o * rescale);
  }
  hyp.samples_used = acc.total_samples();
  hyp.batches = acc.batches();
  return hyp;
}

/// Learns from an exactly prepared Choi state, streaming samples straight
/// into per-batch config counts (nothing is materialized).
inline LowDegreeHypothesis learn_choi_state(const DenseOperator &choi_state,
                                            int n, int m, int D, double eps,
                                            double delta,
                                            const LearnOptions &opt = {}) {
  if (choi_state.qubits() != n + m)
    throw argument_error("Choi state must live on n+m qubits");
  const ShadowPlan plan = plan_shadow_run(n, m, D, eps, delta, opt.policy);
  if (plan.observables > opt.max_observables)
    throw infeasibility_error(
        "observable count " + std::to_string(plan.observables) +
        " exceeds budget " + std::to_string(opt.max_observables));
  std::uint64_t samples = plan.samples;
  if (opt.samples_override > 0)
    samples = std::max<std::uint64_t>(opt.samples_override, plan.batches);
  if (samples > opt.max_samples)
    throw infeasibility_error(
        "required sample count " + std::to_string(samples) +
        " exceeds budget " + std::to_string(opt.max_samples));
  check_density(choi_state);

  detail::MeasurementTable table(choi_state.matrix(), n + m);
  ShadowAccumulator acc(n + m, plan.batches, samples);
  for (std::uint64_t i = 0; i < samples; ++i)
    acc.add(i, detail::draw_config_key(table, opt.seed, i));

  LowDegreeHypothesis hyp = learn_from_accumulator(acc, n, m, D);
  hyp.eps = eps;
  hyp.delta = delta;
  hyp.shadow_accuracy = plan.shadow_accuracy;
  hyp.observable_count = plan.observables;
  hyp.policy = opt.policy;
  hyp.seed = opt.seed;
  hyp.meets_plan = samples >= plan.samples;
  return hyp;
}

/// Learns the Choi representation of the channel defined by a circuit spec.
inline LowDegreeHypothesis learn_channel(const ChannelSpec &spec, int D,
                                         double eps, double delta,
                                         const LearnOptions &opt = {}) {
  const ChoiObject co = choi(spec);
  return learn_choi_state(co.state, co.n, co.m, D, eps, delta, opt);
}

/// Learns from already-collected shadows of a Choi state. The batches field
/// of the set drives the median-of-means; `meets_plan` records whether the
/// provided sample count reaches the planned one for these parameters.
inline LowDegreeHypothesis learn_channel(const ShadowSet &shadows, int n,
                                         int m, int D, double eps,
                                         double delta,
                                         AccuracyPolicy policy =
                                             AccuracyPolicy::ParsevalTight) {
  if (shadows.qubits != n + m)
    throw argument_error("shadow set must live on n+m qubits");
  const ShadowPlan plan = plan_shadow_run(n, m, D, eps, delta, policy);
  LowDegreeHypothesis hyp =
      learn_from_accumulator(accumulate(shadows), n, m, D);
  hyp.eps = eps;
  hyp.delta = delta;
  hyp.shadow_accuracy = plan.shadow_accuracy;
  hyp.observable_count = plan.observables;
  hyp.policy = policy;
  hyp.seed = shadows.seed;
  hyp.meets_plan = shadows.samples.size() >= plan.samples &&
                   shadows.batches >= plan.batches;
  return hyp;
}

/// Truncation degree schedule D = ceil(kappa * (n+a)^(1-2^-d) * m^(2^-d + 1)
/// * ln(1/eps)^2), clamped to [1, n+m]. The eps floor
/// eps >= exp(-n^(2^-d-2) / m) is reported, not enforced.
struct DegreeScheduleResult {
  int D = 1;
  double raw = 0.0;
  bool eps_condition_ok = true;
};

inline DegreeScheduleResult degree_schedule(int n, int m, int a, int depth_d,
                                            double eps, double kappa = 1.0) {
  if (n < 1 || m < 1 || a < 0 || depth_d < 1)
    throw argument_error("degree_schedule needs positive n, m, depth");
  if (!(eps > 0.0 && eps < 1.0)) throw argument_error("eps must be in (0,1)");
  const double expo = std::exp2(-double(depth_d));
  const double lg = std::log(1.0 / eps);
  DegreeScheduleResult res;
  res.raw = kappa * std::pow(double(n + a), 1.0 - expo) *
            std::pow(double(m), expo + 1.0) * lg * lg;
  res.D = std::max(1, std::min(n + m, int(std::ceil(res.raw))));
  const double floor_exp =
      std::exp(-std::pow(double(n), std::exp2(-double(depth_d) - 2.0)) /
               double(m));
  res.eps_condition_ok = eps >= floor_exp;
  return res;
}

enum class PurityMode { Exact, Sampled };

/// Decision between "close to the degree-D class" and "far from it", from a
/// learned hypothesis plus a 2-norm estimate of the target.
struct TolerantVerdict {
  bool far = false;
  double distance_estimate = 0.0;  // sqrt(max(v^2 - ||L||_2^2, 0))
  double threshold = 0.0;          // (eps1 + eps2) / 2
  double v = 0.0;                  // ||J||_2 estimate
  double l2_of_L = 0.0;
  double eps_prime = 0.0;          // learner accuracy used
  LowDegreeHypothesis hypothesis;
};

struct TolerantTestOptions {
  LearnOptions learn;
  std::uint64_t purity_samples = 200000;
};

/// Learner accuracy for the tester: with an exact (or concentrated) 2-norm
/// estimate v, correctness needs 3 eps' < min(thr^2 - eps1^2, eps2^2 - thr^2)
/// for the squared-distance chains; a 0.9 margin absorbs estimator noise.
inline double tolerant_accuracy(double eps1, double eps2) {
  const double thr = 0.5 * (eps1 + eps2);
  const double room =
      std::min(thr * thr - eps1 * eps1, eps2 * eps2 - thr * thr);
  return std::min(0.5, 0.9 * room / 3.0);
}

inline TolerantVerdict tolerant_test(const ChannelSpec &spec, int D,
                                     double eps1, double eps2, double delta,
                                     PurityMode purity_mode,
                                     const TolerantTestOptions &opt = {}) {
  if (!(0.0 < eps1 && eps1 < eps2 && eps2 < 1.0))
    throw argument_error("need 0 < eps1 < eps2 < 1");

  const ChoiObject co = choi(spec);
  const int n = co.n, m = co.m;

  TolerantVerdict verdict;
  verdict.threshold = 0.5 * (eps1 + eps2);
  verdict.eps_prime = tolerant_accuracy(eps1, eps2);

  verdict.hypothesis =
      learn_choi_state(co.state, n, m, D, verdict.eps_prime, delta,
                       opt.learn);
  verdict.l2_of_L = verdict.hypothesis.l2_norm();

  // ||J||_2^2 = 2^(n-m) Tr(rho^2) under the unnormalized-J convention.
  double purity = 0.0;
  if (purity_mode == PurityMode::Exact) {
    purity = exact_purity(co.state);
  } else {
    LearnOptions purity_opt = opt.learn;
    purity_opt.seed = rng::mix(opt.learn.seed ^ 0x9d2c5680ULL);
    const ShadowSet shadows =
        collect_shadows(co.state, opt.purity_samples, purity_opt.seed);
    purity = estimate_purity(shadows);
  }
  verdict.v =
      std::sqrt(std::max(0.0, std::exp2(double(n - m)) * purity));

  const double gap2 =
      verdict.v * verdict.v - verdict.l2_of_L * verdict.l2_of_L;
  verdict.distance_estimate = std::sqrt(std::max(0.0, gap2));
  verdict.far = verdict.distance_estimate >= verdict.threshold;
  return verdict;
}

}  // namespace qlc0
