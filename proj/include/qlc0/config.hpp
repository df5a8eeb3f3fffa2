#pragma once

#include <atomic>
#include <cstdlib>
#include <string>

#include "qlc0/errors.hpp"

namespace qlc0 {

namespace detail {

inline int initial_max_qubits() {
  if (const char *env = std::getenv("QLC0_MAX_QUBITS")) {
    char *end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 30) return static_cast<int>(v);
  }
  return 14;
}

inline std::atomic<int> &max_qubits_slot() {
  // 2^14 dense complex matrices are ~4 GB; beyond that we error loudly
  // instead of thrashing. Overridable via QLC0_MAX_QUBITS or set_max_qubits.
  static std::atomic<int> slot{initial_max_qubits()};
  return slot;
}

}  // namespace detail

inline int max_qubits() { return detail::max_qubits_slot().load(); }

inline void set_max_qubits(int q) {
  if (q < 1) throw argument_error("max_qubits must be >= 1");
  detail::max_qubits_slot().store(q);
}

inline void check_capacity(int qubits, const std::string &what) {
  if (qubits > max_qubits()) {
    throw capacity_error(what + " needs " + std::to_string(qubits) +
                         " qubits, configured ceiling is " +
                         std::to_string(max_qubits()));
  }
}

}  // namespace qlc0
