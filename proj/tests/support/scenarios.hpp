#pragma once

// Reference scenarios: the baseline regulation regime, the two oscillatory
// regimes, saturating actuation and the all-sequestration plant.

#include "aifdom/circuit_models.hpp"
#include "aifdom/dominance.hpp"
#include "aifdom/ode_sim.hpp"

namespace aifdom::testing {

inline const ControllerParams kController{2.0, 10.0};

inline FopPlantParams fop_params(double theta2, double k) { return {1.0, theta2, k, 1.0}; }

inline const HillParams kHillA{1.0, 0.2, 1};
inline const HillParams kHillB{0.1, 1.0, 2};

inline Vector ones4() { return Vector::Ones(4); }

struct Scenario {
  SystemModel model;
  Trajectory traj;
  ProxyRegionSpec spec;
};

/// Regulation regime theta2 = k = 1. Its attractor is a point, so the proxy
/// hull is built from the whole trajectory.
inline Scenario regulation_scenario() {
  Scenario s{fop_closed_loop(kController, fop_params(1.0, 1.0)), {}, {}};
  s.traj = integrate(s.model, ones4(), 100.0);
  s.spec.transient_fraction = 0.0;
  return s;
}

inline Scenario oscillatory_scenario(double theta2, double k,
                                     const std::optional<HillParams>& hill = {}) {
  Scenario s{fop_closed_loop(kController, fop_params(theta2, k), hill), {}, {}};
  s.traj = integrate(s.model, ones4(), 200.0);
  return s;
}

inline Scenario all_seq_scenario() {
  Scenario s{all_seq_closed_loop(kController, AllSeqPlantParams{1.0, 1.0, 1.0, 1.0}, 4.0), {}, {}};
  s.traj = integrate(s.model, ones4(), 200.0);
  s.spec.box_coords = {2, 3};
  return s;
}

}  // namespace aifdom::testing
