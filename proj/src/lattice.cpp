#include "strobe/lattice.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace strobe {

TorusLattice::TorusLattice(int L) : L_(L) {
  if (L < 2) throw std::invalid_argument("TorusLattice: L must be at least 2");
  if (2 * L * L > static_cast<int>(kMaxQubits)) {
    throw std::invalid_argument("TorusLattice: L = " + std::to_string(L) +
                                " exceeds the 64-link register");
  }
  const int n = L * L;
  vertex_links_.resize(n);
  plaquette_links_.resize(n);
  link_vertices_.assign(2 * n, {-1, -1});
  link_plaquettes_.assign(2 * n, {-1, -1});
  for (int r = 0; r < L; ++r) {
    for (int c = 0; c < L; ++c) {
      const int idx = r * L + c;
      vertex_links_[idx] = {horizontal_link(r, c - 1), vertical_link(r - 1, c),
                            horizontal_link(r, c), vertical_link(r, c)};
      plaquette_links_[idx] = {horizontal_link(r, c), vertical_link(r, c + 1),
                               horizontal_link(r + 1, c), vertical_link(r, c)};
    }
  }
  auto record = [](std::array<int, 2>& slot, int owner) {
    if (slot[0] < 0) {
      slot[0] = owner;
    } else {
      slot[1] = owner;
    }
  };
  for (int k = 0; k < n; ++k) {
    for (int link : vertex_links_[k]) record(link_vertices_[link], k);
    for (int link : plaquette_links_[k]) record(link_plaquettes_[link], k);
  }
}

int TorusLattice::horizontal_link(int r, int c) const { return wrap(r) * L_ + wrap(c); }

int TorusLattice::vertical_link(int r, int c) const {
  return L_ * L_ + wrap(r) * L_ + wrap(c);
}

void TorusLattice::check_link(int link) const {
  if (link < 0 || link >= static_cast<int>(n_links())) {
    throw std::out_of_range("TorusLattice: link " + std::to_string(link) + " out of range");
  }
}

std::pair<int, int> TorusLattice::link_position(int link) const {
  check_link(link);
  const int k = link % (L_ * L_);
  return {k / L_, k % L_};
}

const std::array<int, 4>& TorusLattice::vertex_links(int v) const {
  if (v < 0 || v >= static_cast<int>(n_vertices())) {
    throw std::out_of_range("TorusLattice: vertex " + std::to_string(v) + " out of range");
  }
  return vertex_links_[v];
}

const std::array<int, 4>& TorusLattice::plaquette_links(int p) const {
  if (p < 0 || p >= static_cast<int>(n_plaquettes())) {
    throw std::out_of_range("TorusLattice: plaquette " + std::to_string(p) +
                            " out of range");
  }
  return plaquette_links_[p];
}

std::array<int, 2> TorusLattice::link_vertices(int link) const {
  check_link(link);
  return link_vertices_[link];
}

std::array<int, 2> TorusLattice::link_plaquettes(int link) const {
  check_link(link);
  return link_plaquettes_[link];
}

namespace {

PauliString product_on(std::size_t n, const std::array<int, 4>& links, char op) {
  std::uint64_t mask = 0;
  for (int l : links) mask |= std::uint64_t{1} << l;
  return op == 'Z' ? PauliString(n, 0, mask) : PauliString(n, mask, 0);
}

}  // namespace

PauliString TorusLattice::vertex_stabilizer(int v) const {
  return product_on(n_links(), vertex_links(v), 'Z');
}

PauliString TorusLattice::plaquette_stabilizer(int p) const {
  return product_on(n_links(), plaquette_links(p), 'X');
}

std::vector<PauliString> TorusLattice::vertex_stabilizers() const {
  std::vector<PauliString> out;
  for (int v = 0; v < static_cast<int>(n_vertices()); ++v) out.push_back(vertex_stabilizer(v));
  return out;
}

std::vector<PauliString> TorusLattice::plaquette_stabilizers() const {
  std::vector<PauliString> out;
  for (int p = 0; p < static_cast<int>(n_plaquettes()); ++p) {
    out.push_back(plaquette_stabilizer(p));
  }
  return out;
}

PauliString TorusLattice::logical_z(int k) const {
  std::uint64_t mask = 0;
  for (int j = 0; j < L_; ++j) {
    mask |= std::uint64_t{1} << (k == 0 ? horizontal_link(j, 0) : vertical_link(0, j));
  }
  if (k != 0 && k != 1) throw std::out_of_range("logical_z: k must be 0 or 1");
  return PauliString(n_links(), 0, mask);
}

PauliString TorusLattice::logical_x(int k) const {
  std::uint64_t mask = 0;
  for (int j = 0; j < L_; ++j) {
    mask |= std::uint64_t{1} << (k == 0 ? horizontal_link(0, j) : vertical_link(j, 0));
  }
  if (k != 0 && k != 1) throw std::out_of_range("logical_x: k must be 0 or 1");
  return PauliString(n_links(), mask, 0);
}

std::vector<std::pair<int, int>> TorusLattice::medial_edges() const {
  std::vector<std::pair<int, int>> edges;
  auto add_cycle = [&](const std::array<int, 4>& nb) {
    for (int k = 0; k < 4; ++k) {
      const int a = nb[k];
      const int b = nb[(k + 1) % 4];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  };
  for (const auto& nb : vertex_links_) add_cycle(nb);
  for (const auto& nb : plaquette_links_) add_cycle(nb);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

nlohmann::json TorusLattice::to_json() const {
  nlohmann::json j;
  j["L"] = L_;
  j["n_links"] = n_links();
  j["link_indexing"] = "h(r,c)=r*L+c, v(r,c)=L*L+r*L+c";
  j["vertex_links"] = vertex_links_;
  j["plaquette_links"] = plaquette_links_;
  return j;
}

}  // namespace strobe
