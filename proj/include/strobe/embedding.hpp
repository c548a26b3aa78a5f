#pragma once

// Placement of the toric-code links in a cubic lattice, with SWAP shuttle
// paths through auxiliary layers for the couplings that wrap around the torus.
//
// The logical plane sits at z = 0 in the medial (rotated) layout
//   h(r, c) -> (r + c, c - r + L)
//   v(r, c) -> (r + c, c - r - 1 + L)
// in which every non-wrapping medial edge is a unit step. Wrapping edges are
// served by shuttling one partner into an auxiliary layer (z = +1 for pairs
// that are far apart along x, z = -1 otherwise), along an L-shaped route that
// ends directly above or below the other partner.

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "strobe/lattice.hpp"

namespace strobe {

using Coord = std::array<int, 3>;

struct CubicEmbedding {
  int L = 0;
  std::vector<Coord> logical_to_physical;  ///< indexed by link
  /// Logical pairs (a < b) that must interact; each has a swap path, which is
  /// empty when the partners are already adjacent.
  std::map<std::pair<int, int>, std::vector<Coord>> swap_paths;

  /// SWAPs for one out-and-back shuttle of every path.
  std::size_t swap_count() const;
  std::size_t wrap_pair_count() const;

  nlohmann::json to_json() const;
  /// One row per SWAP: step, pair, from, to. Carries a schema comment header.
  std::string schedule_csv() const;
};

struct EmbeddingReport {
  std::vector<std::string> violations;
  std::size_t injectivity_violations = 0;
  std::size_t adjacency_violations = 0;
  std::size_t coverage_violations = 0;

  bool ok() const { return violations.empty(); }
};

CubicEmbedding plan_cubic_embedding(const TorusLattice& lat);

/// Checks injectivity of the placement, unit steps along every path, that
/// paths leave the logical plane, and that every medial edge of `lat` is
/// either physically adjacent or served by a path that starts at one partner
/// and ends next to the other. Never throws on a bad embedding.
EmbeddingReport validate_embedding(const CubicEmbedding& e, const TorusLattice& lat);

bool physically_adjacent(const Coord& a, const Coord& b);

}  // namespace strobe
