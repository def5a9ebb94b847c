#pragma once

#include <cstdint>

#include "chainopt/random_support.hpp"

namespace chainopt {

// Patrol simulation: one agent walks the chain; a sequence of static
// intruders appear one after another, each staying for `residence` time
// steps. An intruder is caught when the agent occupies its node at any
// instant of the stay.
struct SimulationSpec {
  int intruders = 500;
  int residence = 10;          // tau: instants per intruder (>= 1)
  int replications = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  bool capture_on_appearance = true;   // count co-location at the arrival instant
  bool reset_agent_per_intruder = false;  // redraw the agent when an intruder arrives
  bool random_support = false;  // draw one failure realization per replication
};

struct SimulationStats {
  double mean = 0.0;  // capture percentage across replications
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::vector<double> per_replication;
};

// Runs the simulation for a patrol policy given by weights x on g. When
// spec.random_support is set, `fm` must be a non-empty failure model; each
// replication draws one realization and walks the redistributed chain.
// Deterministic for a fixed spec: per-replication streams are derived from
// (seed, replication) and failure draws use a stream separate from the walk.
SimulationStats simulate_surveillance(const Graph& g, const Vector& x,
                                      const SimulationSpec& spec,
                                      const FailureModel* fm = nullptr);

}  // namespace chainopt
