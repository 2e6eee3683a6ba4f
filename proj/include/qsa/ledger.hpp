#pragma once

#include <cstdint>
#include <map>

namespace qsa {

/// Resource counters for one run. Every counter only grows within a run;
/// ledgers of independent runs merge by summation. Reflection and walk-step
/// totals routinely pass 2^64 at small eps, so they are kept as doubles.
struct ResourceLedger {
  double reflections = 0.0;             // reflections through input states and projectors
  std::uint64_t controlled_ops = 0;      // controlled-unitary applications (phase estimation)
  double walk_steps = 0.0;              // modeled quantum-walk steps
  std::uint64_t qsample_copies = 0;      // fresh qsample preparations
  std::uint64_t restoration_failures = 0;
  std::uint64_t classical_samples = 0;
  std::map<int, double> reflections_by_stage;

  void charge_reflections(double n, int stage = -1) {
    reflections += n;
    if (stage >= 0) reflections_by_stage[stage] += n;
  }

  ResourceLedger& operator+=(const ResourceLedger& o) {
    reflections += o.reflections;
    controlled_ops += o.controlled_ops;
    walk_steps += o.walk_steps;
    qsample_copies += o.qsample_copies;
    restoration_failures += o.restoration_failures;
    classical_samples += o.classical_samples;
    for (const auto& [k, v] : o.reflections_by_stage) reflections_by_stage[k] += v;
    return *this;
  }
};

}  // namespace qsa
