#pragma once

// L x L toric-code lattice with periodic boundaries.
//
// Link indexing (frozen; golden files depend on it): horizontal links first,
// row-major, then vertical links.
//   h(r, c) = r L + c          joins vertex (r, c) to (r, c+1)
//   v(r, c) = L^2 + r L + c    joins vertex (r, c) to (r+1, c)
// Vertex (r, c) has index r L + c. Plaquette (r, c) has vertex (r, c) as its
// upper-left corner.
//
// Neighbourhoods are listed so that consecutive entries (cyclically) are
// nearest neighbours on the medial lattice:
//   vertex    [h(r, c-1), v(r-1, c), h(r, c), v(r, c)]        left, up, right, down
//   plaquette [h(r, c), v(r, c+1), h(r+1, c), v(r, c)]        top, right, bottom, left

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "strobe/pauli.hpp"

namespace strobe {

enum class ExcitationType { Electric, Magnetic };

class TorusLattice {
 public:
  /// Throws std::invalid_argument for L < 2 or 2L^2 > 64 links.
  explicit TorusLattice(int L);

  int L() const { return L_; }
  std::size_t n_links() const { return 2 * static_cast<std::size_t>(L_) * L_; }
  std::size_t n_vertices() const { return static_cast<std::size_t>(L_) * L_; }
  std::size_t n_plaquettes() const { return n_vertices(); }

  int horizontal_link(int r, int c) const;
  int vertical_link(int r, int c) const;
  bool is_horizontal(int link) const { return link < L_ * L_; }
  /// (r, c) of a link within its family.
  std::pair<int, int> link_position(int link) const;

  const std::array<int, 4>& vertex_links(int v) const;
  const std::array<int, 4>& plaquette_links(int p) const;
  /// The two vertices (resp. plaquettes) whose neighbourhood contains `link`.
  std::array<int, 2> link_vertices(int link) const;
  std::array<int, 2> link_plaquettes(int link) const;

  PauliString vertex_stabilizer(int v) const;
  PauliString plaquette_stabilizer(int p) const;
  std::vector<PauliString> vertex_stabilizers() const;
  std::vector<PauliString> plaquette_stabilizers() const;

  /// Non-contractible loops. logical_z(0): Z on h(r, 0) for all r;
  /// logical_z(1): Z on v(0, c) for all c. logical_x(0): X on h(0, c) for all
  /// c; logical_x(1): X on v(r, 0) for all r. logical_z(k) anticommutes with
  /// logical_x(k) and commutes with the other loop and every stabilizer.
  PauliString logical_z(int k) const;
  PauliString logical_x(int k) const;

  /// Unordered pairs of links that are consecutive in some vertex or plaquette
  /// neighbourhood (the medial-lattice edges), sorted and deduplicated.
  std::vector<std::pair<int, int>> medial_edges() const;

  nlohmann::json to_json() const;

 private:
  int wrap(int k) const { return ((k % L_) + L_) % L_; }
  void check_link(int link) const;

  int L_;
  std::vector<std::array<int, 4>> vertex_links_;
  std::vector<std::array<int, 4>> plaquette_links_;
  std::vector<std::array<int, 2>> link_vertices_;
  std::vector<std::array<int, 2>> link_plaquettes_;
};

}  // namespace strobe
