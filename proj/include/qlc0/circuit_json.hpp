#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "qlc0/circuit.hpp"

namespace qlc0 {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json &j,
                                const std::set<std::string> &allowed,
                                const std::string &where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw validation_error("unknown key \"" + it.key() + "\" in " + where);
}

inline cplx parse_complex(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number())
    throw validation_error("complex number must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json dump_complex(cplx v) {
  return nlohmann::json::array({v.real(), v.imag()});
}

}  // namespace detail

inline ChannelSpec channel_spec_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw validation_error("circuit JSON must be an object");
  detail::reject_unknown_keys(
      j, {"n", "a", "ancilla", "layers", "output_wires"}, "circuit");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw validation_error("circuit needs integer field \"n\"");

  ChannelSpec spec;
  spec.circuit.n = j["n"].get<int>();
  spec.circuit.a = j.value("a", 0);

  if (j.contains("ancilla") && !j["ancilla"].is_null()) {
    const auto &anc = j["ancilla"];
    if (anc.is_string()) {
      if (anc.get<std::string>() != "zeros")
        throw validation_error("ancilla string form must be \"zeros\"");
    } else if (anc.is_array()) {
      Vector v(anc.size());
      for (std::size_t i = 0; i < anc.size(); ++i)
        v(i) = detail::parse_complex(anc[i]);
      spec.circuit.ancilla_state = v;
    } else {
      throw validation_error("ancilla must be \"zeros\" or an amplitude list");
    }
  }

  for (const auto &lj : j.value("layers", nlohmann::json::array())) {
    if (!lj.is_object() || !lj.contains("type"))
      throw validation_error("layer needs a \"type\" field");
    const std::string type = lj["type"].get<std::string>();
    if (type == "single") {
      detail::reject_unknown_keys(lj, {"type", "gates"}, "single layer");
      SingleQubitLayer layer;
      for (auto it = lj.value("gates", nlohmann::json::object()).begin();
           it != lj.value("gates", nlohmann::json::object()).end(); ++it) {
        SingleQubitGate g;
        g.wire = std::stoi(it.key());
        const auto &entries = it.value();
        if (!entries.is_array() || entries.size() != 4)
          throw validation_error("gate needs 4 complex entries (row-major)");
        g.u << detail::parse_complex(entries[0]),
            detail::parse_complex(entries[1]),
            detail::parse_complex(entries[2]),
            detail::parse_complex(entries[3]);
        layer.gates.push_back(g);
      }
      spec.circuit.layers.push_back(layer);
    } else if (type == "cz") {
      detail::reject_unknown_keys(lj, {"type", "sets"}, "cz layer");
      CzLayer layer;
      for (const auto &sj : lj.value("sets", nlohmann::json::array()))
        layer.sets.push_back(sj.get<std::vector<int>>());
      spec.circuit.layers.push_back(layer);
    } else {
      throw validation_error("layer type must be \"single\" or \"cz\"");
    }
  }

  if (j.contains("output_wires"))
    spec.output_wires = j["output_wires"].get<std::vector<int>>();

  spec.validate();
  return spec;
}

inline nlohmann::json channel_spec_to_json(const ChannelSpec &spec) {
  nlohmann::json j;
  j["n"] = spec.circuit.n;
  j["a"] = spec.circuit.a;
  if (spec.circuit.ancilla_state) {
    nlohmann::json amps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < spec.circuit.ancilla_state->size(); ++i)
      amps.push_back(detail::dump_complex((*spec.circuit.ancilla_state)(i)));
    j["ancilla"] = amps;
  } else {
    j["ancilla"] = "zeros";
  }
  j["layers"] = nlohmann::json::array();
  for (const auto &l : spec.circuit.layers) {
    nlohmann::json lj;
    if (const auto *sl = std::get_if<SingleQubitLayer>(&l)) {
      lj["type"] = "single";
      lj["gates"] = nlohmann::json::object();
      for (const auto &g : sl->gates) {
        lj["gates"][std::to_string(g.wire)] = nlohmann::json::array(
            {detail::dump_complex(g.u(0, 0)), detail::dump_complex(g.u(0, 1)),
             detail::dump_complex(g.u(1, 0)),
             detail::dump_complex(g.u(1, 1))});
      }
    } else {
      lj["type"] = "cz";
      lj["sets"] = std::get<CzLayer>(l).sets;
    }
    j["layers"].push_back(lj);
  }
  if (!spec.output_wires.empty()) j["output_wires"] = spec.output_wires;
  return j;
}

inline ChannelSpec load_channel_spec(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open circuit file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error &e) {
    throw validation_error("circuit JSON parse error: " +
                           std::string(e.what()));
  }
  return channel_spec_from_json(j);
}

}  // namespace qlc0
