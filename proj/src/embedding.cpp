#include "strobe/embedding.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

namespace strobe {

bool physically_adjacent(const Coord& a, const Coord& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]) == 1;
}

namespace {

std::string coord_str(const Coord& c) {
  return "(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
         std::to_string(c[2]) + ")";
}

std::vector<Coord> shuttle_path(const Coord& from, const Coord& to) {
  const int layer = std::abs(from[0] - to[0]) >= std::abs(from[1] - to[1]) ? 1 : -1;
  std::vector<Coord> path{from};
  Coord cur{from[0], from[1], layer};
  path.push_back(cur);
  while (cur[0] != to[0]) {
    cur[0] += cur[0] < to[0] ? 1 : -1;
    path.push_back(cur);
  }
  while (cur[1] != to[1]) {
    cur[1] += cur[1] < to[1] ? 1 : -1;
    path.push_back(cur);
  }
  return path;
}

}  // namespace

CubicEmbedding plan_cubic_embedding(const TorusLattice& lat) {
  CubicEmbedding e;
  e.L = lat.L();
  const int L = lat.L();
  e.logical_to_physical.resize(lat.n_links());
  for (int link = 0; link < static_cast<int>(lat.n_links()); ++link) {
    const auto [r, c] = lat.link_position(link);
    const int y = lat.is_horizontal(link) ? c - r + L : c - r - 1 + L;
    e.logical_to_physical[link] = {r + c, y, 0};
  }
  for (const auto& [a, b] : lat.medial_edges()) {
    const Coord& pa = e.logical_to_physical[a];
    const Coord& pb = e.logical_to_physical[b];
    e.swap_paths[{a, b}] =
        physically_adjacent(pa, pb) ? std::vector<Coord>{} : shuttle_path(pa, pb);
  }
  return e;
}

std::size_t CubicEmbedding::swap_count() const {
  std::size_t n = 0;
  for (const auto& [pair, path] : swap_paths) {
    if (!path.empty()) n += 2 * (path.size() - 1);
  }
  return n;
}

std::size_t CubicEmbedding::wrap_pair_count() const {
  std::size_t n = 0;
  for (const auto& [pair, path] : swap_paths) n += path.empty() ? 0 : 1;
  return n;
}

nlohmann::json CubicEmbedding::to_json() const {
  nlohmann::json j;
  j["L"] = L;
  j["logical_to_physical"] = logical_to_physical;
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& [pair, path] : swap_paths) {
    paths.push_back({{"a", pair.first}, {"b", pair.second}, {"path", path}});
  }
  j["swap_paths"] = paths;
  j["swap_count"] = swap_count();
  return j;
}

std::string CubicEmbedding::schedule_csv() const {
  std::ostringstream os;
  os << "# schema: strobe.swap_schedule/1\n";
  os << "step,link_a,link_b,from_x,from_y,from_z,to_x,to_y,to_z\n";
  std::size_t step = 0;
  for (const auto& [pair, path] : swap_paths) {
    for (std::size_t k = 1; k < path.size(); ++k) {
      const Coord& f = path[k - 1];
      const Coord& t = path[k];
      os << step++ << ',' << pair.first << ',' << pair.second << ',' << f[0] << ','
         << f[1] << ',' << f[2] << ',' << t[0] << ',' << t[1] << ',' << t[2] << '\n';
    }
  }
  return os.str();
}

EmbeddingReport validate_embedding(const CubicEmbedding& e, const TorusLattice& lat) {
  EmbeddingReport rep;
  auto fail = [&](std::size_t& counter, std::string msg) {
    ++counter;
    rep.violations.push_back(std::move(msg));
  };

  if (e.logical_to_physical.size() != lat.n_links()) {
    fail(rep.coverage_violations, "placement covers " +
                                      std::to_string(e.logical_to_physical.size()) +
                                      " links, lattice has " + std::to_string(lat.n_links()));
    return rep;
  }
  std::map<Coord, int> occupied;
  for (int link = 0; link < static_cast<int>(e.logical_to_physical.size()); ++link) {
    const Coord& c = e.logical_to_physical[link];
    auto [it, inserted] = occupied.emplace(c, link);
    if (!inserted) {
      fail(rep.injectivity_violations, "links " + std::to_string(it->second) + " and " +
                                           std::to_string(link) + " share " + coord_str(c));
    }
  }

  for (const auto& [pair, path] : e.swap_paths) {
    const std::string tag =
        "pair (" + std::to_string(pair.first) + "," + std::to_string(pair.second) + ")";
    for (std::size_t k = 1; k < path.size(); ++k) {
      if (!physically_adjacent(path[k - 1], path[k])) {
        fail(rep.adjacency_violations, tag + ": step " + coord_str(path[k - 1]) + " -> " +
                                           coord_str(path[k]) + " is not a unit step");
      }
      const auto hit = occupied.find(path[k]);
      if (hit != occupied.end()) {
        fail(rep.adjacency_violations, tag + ": path enters logical site " +
                                           coord_str(path[k]) + " of link " +
                                           std::to_string(hit->second));
      }
    }
  }

  for (const auto& [a, b] : lat.medial_edges()) {
    const std::string tag = "pair (" + std::to_string(a) + "," + std::to_string(b) + ")";
    const Coord& pa = e.logical_to_physical[a];
    const Coord& pb = e.logical_to_physical[b];
    const auto it = e.swap_paths.find({a, b});
    if (it == e.swap_paths.end()) {
      fail(rep.coverage_violations, tag + ": no schedule entry");
      continue;
    }
    const auto& path = it->second;
    if (path.empty()) {
      if (!physically_adjacent(pa, pb)) {
        fail(rep.coverage_violations, tag + ": partners not adjacent and no path");
      }
      continue;
    }
    const bool starts = path.front() == pa || path.front() == pb;
    const Coord& other = path.front() == pa ? pb : pa;
    if (!starts || !physically_adjacent(path.back(), other)) {
      fail(rep.coverage_violations, tag + ": path does not bring the partners together");
    }
  }
  return rep;
}

}  // namespace strobe
