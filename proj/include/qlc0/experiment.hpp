#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlc0/circuit_json.hpp"
#include "qlc0/learner.hpp"
#include "qlc0/lowdeg.hpp"
#include "qlc0/reduction.hpp"

namespace qlc0 {

inline constexpr const char *kReportFormatVersion = "1";

struct ExperimentConfig {
  std::string command;
  std::string circuit_path;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  std::string out_path;
  bool strict = false;
  int max_qubits_override = 0;
  double kappa = 1.0;
};

struct RunReport {
  nlohmann::json config_echo;
  nlohmann::json results;
  nlohmann::json timings;
  nlohmann::json versions;
  bool guarantee_failed = false;
  /// csv name suffix -> content; written beside the JSON report
  std::vector<std::pair<std::string, std::string>> csv_files;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config"] = config_echo;
    j["results"] = results;
    j["timings"] = timings;
    j["versions"] = versions;
    j["guarantee_failed"] = guarantee_failed;
    return j;
  }
};

namespace detail {

inline double param_double(const std::map<std::string, std::string> &params,
                           const std::string &key, double fallback,
                           bool required = false) {
  auto it = params.find(key);
  if (it == params.end()) {
    if (required) throw argument_error("missing required parameter --" + key);
    return fallback;
  }
  try {
    return std::stod(it->second);
  } catch (...) {
    throw argument_error("parameter --" + key + " is not a number");
  }
}

inline long long param_int(const std::map<std::string, std::string> &params,
                           const std::string &key, long long fallback,
                           bool required = false) {
  auto it = params.find(key);
  if (it == params.end()) {
    if (required) throw argument_error("missing required parameter --" + key);
    return fallback;
  }
  try {
    return std::stoll(it->second);
  } catch (...) {
    throw argument_error("parameter --" + key + " is not an integer");
  }
}

inline std::string param_str(const std::map<std::string, std::string> &params,
                             const std::string &key,
                             const std::string &fallback,
                             bool required = false) {
  auto it = params.find(key);
  if (it == params.end()) {
    if (required) throw argument_error("missing required parameter --" + key);
    return fallback;
  }
  return it->second;
}

inline void check_known_params(const std::map<std::string, std::string> &p,
                               const std::set<std::string> &allowed) {
  for (const auto &[k, v] : p)
    if (!allowed.count(k))
      throw argument_error("unknown parameter --" + k);
}

inline nlohmann::json expansion_coeffs_json(const PauliExpansion &p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &[key, v] : p.coeffs()) {
    const PauliString s(p.qubits(), key);
    nlohmann::json row;
    row["sigma"] = s.text();
    row["re"] = v.real();
    row["im"] = v.imag();
    arr.push_back(row);
  }
  return arr;
}

inline std::string spectrum_csv(const PauliExpansion &p) {
  std::ostringstream os;
  write_spectrum_csv(os, p);
  return os.str();
}

inline PauliExpansion observable_from_param(const std::string &value, int q) {
  std::ifstream in(value);
  if (in) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error &e) {
      throw validation_error("observable file parse error: " +
                             std::string(e.what()));
    }
    PauliExpansion p(q);
    for (const auto &row : j) {
      const PauliString s = PauliString::from_text(row.at("sigma"));
      if (s.qubits() != q)
        throw validation_error("observable term length mismatch");
      p.set(s, cplx(row.value("re", 0.0), row.value("im", 0.0)));
    }
    return p;
  }
  const PauliString s = PauliString::from_text(value);
  if (s.qubits() != q)
    throw validation_error("observable string must cover all " +
                           std::to_string(q) + " wires");
  PauliExpansion p(q);
  p.set(s, 1.0);
  return p;
}

/// Paper-form error bound for the k-wire CZ stand-in; meaningful only when
/// at most 2.
inline double cz_error_bound(double r) {
  return std::exp2(1.0 - r / 256.0) * 1.4426950408889634;
}

}  // namespace detail

inline RunReport run_config(const ExperimentConfig &cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  if (cfg.max_qubits_override > 0) set_max_qubits(cfg.max_qubits_override);

  RunReport rep;
  rep.config_echo["command"] = cfg.command;
  rep.config_echo["circuit"] = cfg.circuit_path;
  rep.config_echo["params"] = cfg.params;
  rep.config_echo["seed"] = cfg.seed;
  rep.config_echo["strict"] = cfg.strict;
  rep.config_echo["kappa"] = cfg.kappa;
  rep.versions["format"] = kReportFormatVersion;
  rep.versions["kappa"] = cfg.kappa;
  rep.versions["max_qubits"] = max_qubits();
  rep.versions["one_layer_bound_constant"] = kOneLayerBoundConstant;
  rep.versions["circuit_bound_constant"] = kCircuitBoundConstant;

  ChannelSpec spec;
  bool have_spec = false;
  if (!cfg.circuit_path.empty()) {
    spec = load_channel_spec(cfg.circuit_path);
    have_spec = true;
  }
  const auto need_spec = [&]() {
    if (!have_spec)
      throw validation_error("command " + cfg.command +
                             " needs --circuit <file>");
  };
  const auto t_loaded = clock::now();

  nlohmann::json &res = rep.results;

  if (cfg.command == "spectrum") {
    detail::check_known_params(cfg.params, {});
    need_spec();
    const PauliExpansion p = expand(build_unitary(spec.circuit));
    res["qubits"] = p.qubits();
    res["terms"] = p.term_count();
    res["degree"] = p.degree();
    res["coeffs"] = detail::expansion_coeffs_json(p);
    rep.csv_files.emplace_back("spectrum", detail::spectrum_csv(p));

  } else if (cfg.command == "approx-cz") {
    detail::check_known_params(cfg.params, {"k", "r", "r-sweep"});
    const int k = static_cast<int>(detail::param_int(cfg.params, "k", 0, true));
    std::vector<double> rs;
    if (cfg.params.count("r-sweep")) {
      std::stringstream ss(cfg.params.at("r-sweep"));
      std::string tok;
      while (std::getline(ss, tok, ',')) rs.push_back(std::stod(tok));
    } else {
      rs.push_back(detail::param_double(cfg.params, "r", 0.0, true));
    }

    nlohmann::json arr = nlohmann::json::array();
    std::ostringstream csv;
    csv << "r,degree,spectral_error,bound\n";
    char line[160];
    for (double r : rs) {
      const CzApproxResult a = cz_low_degree_approx(k, r);
      nlohmann::json row;
      row["k"] = k;
      row["r"] = r;
      row["degree"] = a.degree;
      row["spectral_error"] = a.spectral_error;
      row["poly_values"] = a.poly_values;
      row["bound"] = detail::cz_error_bound(r);
      arr.push_back(row);
      std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g\n", r, a.degree,
                    a.spectral_error, detail::cz_error_bound(r));
      csv << line;
      const int cap =
          static_cast<int>(std::ceil(std::sqrt(double(k) * r)));
      if (a.degree > cap || spectral_norm(a.op) > 1.0 + 1e-9)
        rep.guarantee_failed = true;
      const double bound = detail::cz_error_bound(r);
      if (bound <= 2.0 && a.spectral_error > bound)
        rep.guarantee_failed = true;
    }
    res = rs.size() == 1 ? arr[0] : nlohmann::json{{"sweep", arr}};
    if (rs.size() > 1) rep.csv_files.emplace_back("sweep", csv.str());

  } else if (cfg.command == "approx-circuit") {
    detail::check_known_params(cfg.params, {"observable", "r"});
    need_spec();
    const double r = detail::param_double(cfg.params, "r", 0.0, true);
    const PauliExpansion obs = detail::observable_from_param(
        detail::param_str(cfg.params, "observable", "", true),
        spec.circuit.total_wires());

    const CircuitApproxReport car = approx_circuit(spec.circuit, obs, r);
    res["r"] = car.r;
    res["depth"] = car.depth;
    res["total_error"] = car.total_error;
    res["total_error_bound"] = car.total_error_bound;
    res["degree_bound"] = car.degree_bound;
    res["degree_bound_schedule"] = car.degree_bound_schedule;
    res["layer_norms"] = car.layer_norms;
    res["approx_degree"] = car.approx.degree();
    res["approx_terms"] = car.approx.term_count();
    res["per_layer"] = nlohmann::json::array();
    for (const auto &lr : car.per_layer) {
      nlohmann::json row;
      row["achieved_degree"] = lr.achieved_degree;
      row["degree_bound"] = lr.degree_bound;
      row["spectral_error"] = lr.spectral_error;
      row["error_bound"] = lr.error_bound;
      row["input_norm"] = lr.input_norm;
      row["threshold_t"] = lr.threshold_t;
      row["t0"] = lr.t0_count;
      row["t1"] = lr.t1_count;
      row["t2"] = lr.t2_count;
      row["exact_branch"] = lr.exact_branch;
      res["per_layer"].push_back(row);
      if (lr.achieved_degree > int(std::ceil(lr.degree_bound)))
        rep.guarantee_failed = true;
    }
    if (car.total_error_bound <= 2.0 &&
        car.total_error > car.total_error_bound)
      rep.guarantee_failed = true;

  } else if (cfg.command == "choi") {
    detail::check_known_params(cfg.params, {});
    need_spec();
    const ChoiObject co = choi(spec);
    res["n"] = co.n;
    res["m"] = co.m;
    res["state_trace"] = co.state.trace().real();
    res["representation_trace"] = co.representation.trace().real();
    res["purity"] = exact_purity(co.state);
    std::vector<int> out_wires(co.m);
    for (int i = 0; i < co.m; ++i) out_wires[i] = co.n + i;
    const DenseOperator marginal = partial_trace(co.state, out_wires);
    res["input_marginal_distance"] = spectral_norm(
        marginal - DenseOperator(
                       co.n, Matrix::Identity(marginal.dim(), marginal.dim()) /
                                 double(marginal.dim())));
    const PauliExpansion p = expand(co.representation);
    res["degree"] = p.degree();
    res["terms"] = p.term_count();
    rep.csv_files.emplace_back("choi_spectrum", detail::spectrum_csv(p));

  } else if (cfg.command == "learn") {
    detail::check_known_params(
        cfg.params, {"D", "eps", "delta", "policy", "samples"});
    need_spec();
    const int D = static_cast<int>(detail::param_int(cfg.params, "D", 0, true));
    const double eps = detail::param_double(cfg.params, "eps", 0.0, true);
    const double delta = detail::param_double(cfg.params, "delta", 0.0, true);

    LearnOptions opt;
    opt.seed = cfg.seed;
    const std::string policy =
        detail::param_str(cfg.params, "policy", "tight");
    if (policy == "paper")
      opt.policy = AccuracyPolicy::PerTermOverCount;
    else if (policy != "tight")
      throw argument_error("--policy must be tight or paper");
    opt.samples_override = static_cast<std::uint64_t>(
        detail::param_int(cfg.params, "samples", 0));

    const LowDegreeHypothesis hyp =
        learn_channel(spec, D, eps, delta, opt);
    res["D"] = hyp.D;
    res["eps"] = hyp.eps;
    res["delta"] = hyp.delta;
    res["samples_used"] = hyp.samples_used;
    res["batches"] = hyp.batches;
    res["shadow_accuracy"] = hyp.shadow_accuracy;
    res["observable_count"] = hyp.observable_count;
    res["policy"] = policy;
    res["meets_plan"] = hyp.meets_plan;
    res["l2_of_L"] = hyp.l2_norm();
    res["coeffs"] = detail::expansion_coeffs_json(hyp.expansion);

    if (spec.n() + spec.m() <= 10) {
      const ChoiObject co = choi(spec);
      const PauliExpansion exact = expand(co.representation);
      const PauliExpansion trunc = truncate_degree(exact, D);
      double to_trunc = 0.0, to_full = 0.0;
      {
        PauliExpansion diff = hyp.expansion;
        for (const auto &[key, v] : trunc.coeffs())
          diff.add(PauliString(diff.qubits(), key), -v);
        to_trunc = std::sqrt(diff.l2_squared());
        PauliExpansion diff_full = hyp.expansion;
        for (const auto &[key, v] : exact.coeffs())
          diff_full.add(PauliString(diff_full.qubits(), key), -v);
        to_full = std::sqrt(diff_full.l2_squared());
      }
      res["l2_to_truncation_exact"] = to_trunc;
      res["l2_to_choi_exact"] = to_full;
      res["oracle"] = "dense-choi";
      if (to_trunc > eps) rep.guarantee_failed = true;
    }

  } else if (cfg.command == "tolerant-test") {
    detail::check_known_params(
        cfg.params, {"D", "eps1", "eps2", "delta", "purity"});
    need_spec();
    const int D = static_cast<int>(detail::param_int(cfg.params, "D", 0, true));
    const double eps1 = detail::param_double(cfg.params, "eps1", 0.0, true);
    const double eps2 = detail::param_double(cfg.params, "eps2", 0.0, true);
    const double delta = detail::param_double(cfg.params, "delta", 0.1);
    const std::string purity =
        detail::param_str(cfg.params, "purity", "exact");
    TolerantTestOptions opt;
    opt.learn.seed = cfg.seed;
    const TolerantVerdict v = tolerant_test(
        spec, D, eps1, eps2, delta,
        purity == "sampled" ? PurityMode::Sampled : PurityMode::Exact, opt);
    res["verdict"] = v.far ? "far" : "close";
    res["distance_estimate"] = v.distance_estimate;
    res["threshold"] = v.threshold;
    res["v"] = v.v;
    res["l2_of_L"] = v.l2_of_L;
    res["eps_prime"] = v.eps_prime;
    res["samples_used"] = v.hypothesis.samples_used;

  } else if (cfg.command == "reduce") {
    detail::check_known_params(cfg.params, {"mode", "eps", "delta"});
    need_spec();
    const std::string mode_str =
        detail::param_str(cfg.params, "mode", "exact");
    if (mode_str != "exact" && mode_str != "sampled")
      throw argument_error("--mode must be exact or sampled");
    const ReductionMode mode = mode_str == "sampled" ? ReductionMode::Sampled
                                                     : ReductionMode::Exact;
    const double eps = detail::param_double(cfg.params, "eps", 0.0,
                                            mode == ReductionMode::Sampled);
    const double delta = detail::param_double(cfg.params, "delta", 0.1);

    const ReductionReport rr =
        run_reduction(spec.circuit, mode, eps, delta, cfg.seed);
    res["mode"] = mode_str;
    res["eps"] = rr.eps;
    res["delta"] = rr.delta;
    res["error_bound"] = rr.error_bound;
    res["final_error"] = rr.final_error;
    res["per_wire"] = nlohmann::json::array();
    for (const auto &wr : rr.per_wire) {
      nlohmann::json row;
      row["wire"] = wr.wire;
      row["inversion_residual"] = wr.inversion_residual;
      row["choi_error"] = wr.choi_error;
      row["factor_error"] = wr.factor_error;
      row["samples_used"] = wr.samples_used;
      res["per_wire"].push_back(row);
    }
    if (mode == ReductionMode::Exact) {
      if (rr.final_error > 1e-7) rep.guarantee_failed = true;
    } else if (rr.final_error > rr.error_bound) {
      rep.guarantee_failed = true;
    }

  } else {
    throw argument_error("unknown command: " + cfg.command);
  }

  const auto t_done = clock::now();
  const auto ms = [](auto a, auto b) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(b - a)
        .count();
  };
  rep.timings["load_ms"] = ms(t0, t_loaded);
  rep.timings["compute_ms"] = ms(t_loaded, t_done);
  return rep;
}

/// Writes the JSON report (and any CSV payloads beside it). Empty path
/// writes nothing and leaves output to the caller.
inline void emit_report(const RunReport &rep, const std::string &out_path) {
  if (out_path.empty()) return;
  {
    std::ofstream out(out_path);
    if (!out) throw io_error("cannot write report to " + out_path);
    out << rep.to_json().dump(2) << '\n';
    if (!out) throw io_error("write failure on " + out_path);
  }
  for (const auto &[name, content] : rep.csv_files) {
    std::string base = out_path;
    const auto dot = base.rfind('.');
    if (dot != std::string::npos) base.resize(dot);
    const std::string csv_path = base + "." + name + ".csv";
    std::ofstream out(csv_path);
    if (!out) throw io_error("cannot write CSV to " + csv_path);
    out << content;
    if (!out) throw io_error("write failure on " + csv_path);
  }
}

}  // namespace qlc0
