// Command-line front end: load a circuit, run one analysis/learning/testing
// pipeline, emit a JSON report (plus CSV for tabular payloads).

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlc0/qlc0.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitGuarantee = 4;

void add_common(CLI::App *cmd, qlc0::ExperimentConfig &cfg,
                bool needs_circuit) {
  if (needs_circuit)
    cmd->add_option("--circuit", cfg.circuit_path, "circuit JSON file")
        ->required();
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--out", cfg.out_path, "JSON report path");
  cmd->add_flag("--strict", cfg.strict,
                "exit 4 when a guarantee check fails");
  cmd->add_option("--max-qubits", cfg.max_qubits_override,
                  "override the dense-capacity ceiling");
  cmd->add_option("--kappa", cfg.kappa, "degree-schedule constant");
}

void add_param(CLI::App *cmd, qlc0::ExperimentConfig &cfg,
               const std::string &name, const std::string &help,
               bool required = false) {
  auto *opt = cmd->add_option_function<std::string>(
      "--" + name,
      [&cfg, name](const std::string &v) { cfg.params[name] = v; }, help);
  if (required) opt->required();
}

nlohmann::json error_json(const std::string &kind, const std::string &what) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = what;
  return j;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"analysis, learning and testing toolkit for shallow "
               "CZ-layer circuits"};
  app.require_subcommand(1);

  qlc0::ExperimentConfig cfg;

  auto *spectrum = app.add_subcommand(
      "spectrum", "Pauli spectrum of the circuit unitary");
  add_common(spectrum, cfg, true);

  auto *approx_cz = app.add_subcommand(
      "approx-cz", "low-degree stand-in for a k-wire CZ gate");
  add_common(approx_cz, cfg, false);
  add_param(approx_cz, cfg, "k", "gate arity", true);
  add_param(approx_cz, cfg, "r", "error parameter in (1, k]");
  add_param(approx_cz, cfg, "r-sweep", "comma-separated r values");

  auto *approx_circuit = app.add_subcommand(
      "approx-circuit", "low-degree approximation of a conjugated observable");
  add_common(approx_circuit, cfg, true);
  add_param(approx_circuit, cfg, "observable",
            "Pauli string over all wires, or a JSON term file", true);
  add_param(approx_circuit, cfg, "r", "error parameter", true);

  auto *choi_cmd =
      app.add_subcommand("choi", "Choi data of the circuit's channel");
  add_common(choi_cmd, cfg, true);

  auto *learn = app.add_subcommand(
      "learn", "shadow-based low-degree Choi learner");
  add_common(learn, cfg, true);
  add_param(learn, cfg, "D", "truncation degree", true);
  add_param(learn, cfg, "eps", "2-norm accuracy target", true);
  add_param(learn, cfg, "delta", "failure probability", true);
  add_param(learn, cfg, "policy", "accuracy policy: tight | paper");
  add_param(learn, cfg, "samples", "diagnostic sample-count override");

  auto *tolerant = app.add_subcommand(
      "tolerant-test", "close/far decision against the degree-D class");
  add_common(tolerant, cfg, true);
  add_param(tolerant, cfg, "D", "truncation degree", true);
  add_param(tolerant, cfg, "eps1", "closeness radius", true);
  add_param(tolerant, cfg, "eps2", "farness radius", true);
  add_param(tolerant, cfg, "delta", "failure probability");
  add_param(tolerant, cfg, "purity", "purity mode: exact | sampled");

  auto *reduce = app.add_subcommand(
      "reduce", "per-wire channel learning sewn into V otimes V^dagger");
  add_common(reduce, cfg, true);
  add_param(reduce, cfg, "mode", "exact | sampled");
  add_param(reduce, cfg, "eps", "per-wire learner accuracy");
  add_param(reduce, cfg, "delta", "total failure probability");

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    qlc0::RunReport rep = qlc0::run_config(cfg);
    qlc0::emit_report(rep, cfg.out_path);
    if (cfg.out_path.empty()) std::cout << rep.to_json().dump(2) << '\n';
    if (cfg.strict && rep.guarantee_failed) {
      std::cerr << error_json("guarantee", "a guarantee check failed").dump()
                << '\n';
      return kExitGuarantee;
    }
    return kExitOk;
  } catch (const qlc0::capacity_error &e) {
    std::cerr << error_json("capacity", e.what()).dump() << '\n';
    return kExitCapacity;
  } catch (const qlc0::infeasibility_error &e) {
    std::cerr << error_json("infeasibility", e.what()).dump() << '\n';
    return kExitCapacity;
  } catch (const qlc0::io_error &e) {
    std::cerr << error_json("io", e.what()).dump() << '\n';
    return kExitCapacity;
  } catch (const qlc0::error &e) {
    std::cerr << error_json("validation", e.what()).dump() << '\n';
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << error_json("internal", e.what()).dump() << '\n';
    return kExitValidation;
  }
}
