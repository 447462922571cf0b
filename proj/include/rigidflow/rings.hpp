//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_RINGS_HPP_
#define RIGIDFLOW_RINGS_HPP_

#include <vector>

#include "rigidflow/molgraph.hpp"

namespace rigidflow {

inline constexpr int kMaxRingSize = 10;

struct Ring {
  std::vector<int> atoms;  // in cycle order
  std::vector<int> bonds;  // sorted bond indices
};

struct RingSystem {
  std::vector<int> atoms;  // sorted
  std::vector<int> bonds;  // sorted
  std::vector<int> rings;  // indices into RingInfo::rings
};

struct RingInfo {
  std::vector<Ring> rings;
  // Unions of rings sharing at least one bond.
  std::vector<RingSystem> systems;

  // Per bond: index of its ring system, or -1.
  std::vector<int> bond_system;
};

// Minimum cycle basis restricted to rings of at most `max_size` atoms:
// candidate simple cycles are taken shortest first and kept while they are
// linearly independent over GF(2) in the bond space. Cycles that only exist
// through larger rings are left out, so macrocycles stay flexible.
RingInfo perceive_rings(const MolecularGraph &g, int max_size = kMaxRingSize);

// RMS distance of the atoms to their least-squares plane.
double plane_rms(const Points &pts);

bool is_planar_ring_system(const MolecularGraph &g,
                           const std::vector<int> &atoms, double tol);

}  // namespace rigidflow

#endif  // RIGIDFLOW_RINGS_HPP_
