#include "agvsb/layout.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace agvsb {

char zone_letter(Zone z) { return static_cast<char>('A' + static_cast<int>(z)); }

std::optional<Zone> zone_from_letter(char c) {
  if (c >= 'a' && c <= 'f') c = static_cast<char>(c - 'a' + 'A');
  if (c < 'A' || c > 'F') return std::nullopt;
  return static_cast<Zone>(c - 'A');
}

std::string_view scale_name(WarehouseScale s) {
  switch (s) {
    case WarehouseScale::Small: return "small";
    case WarehouseScale::Medium: return "medium";
    case WarehouseScale::Large: return "large";
  }
  return "?";
}

WarehouseScale parse_scale(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "small") return WarehouseScale::Small;
  if (lower == "medium" || lower == "middle") return WarehouseScale::Medium;
  if (lower == "large") return WarehouseScale::Large;
  throw ValidationError("layout", "unknown warehouse scale '" + std::string(name) + "'");
}

GridDims default_dims(WarehouseScale s) {
  switch (s) {
    case WarehouseScale::Small: return {15, 15};
    case WarehouseScale::Medium: return {25, 25};
    case WarehouseScale::Large: return {40, 40};
  }
  return {15, 15};
}

GridMap::GridMap(int width, int height, Cell station, double cellSize)
    : width_(width), height_(height), cellSize_(cellSize), station_(station) {
  if (width <= 0 || height <= 0) throw ValidationError("layout.dims", "grid must be non-empty");
  if (!inBounds(station)) throw ValidationError("layout.station", "station outside grid");
  kinds_.assign(cellCount(), CellKind::Corridor);
  zones_.assign(cellCount(), -1);
  kinds_[index(station)] = CellKind::Station;
}

std::optional<Zone> GridMap::zoneOf(Cell c) const {
  if (!inBounds(c)) return std::nullopt;
  const auto z = zones_[index(c)];
  if (z < 0) return std::nullopt;
  return static_cast<Zone>(z);
}

std::vector<Cell> GridMap::obstacles() const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < kinds_.size(); ++i)
    if (kinds_[i] == CellKind::Obstacle) out.push_back(cellAt(i));
  return out;
}

void GridMap::setObstacle(Cell c) {
  if (c == station_) throw ValidationError("layout.obstacles", "station cannot be an obstacle");
  kinds_[index(c)] = CellKind::Obstacle;
  zones_[index(c)] = -1;
  rebuildZoneIndex();
}

void GridMap::setStorage(Cell c, Zone z) {
  if (c == station_) throw ValidationError("layout.zones", "station cannot hold storage");
  kinds_[index(c)] = CellKind::Storage;
  zones_[index(c)] = static_cast<std::int8_t>(z);
  rebuildZoneIndex();
}

void GridMap::rebuildZoneIndex() {
  for (auto& v : zoneCells_) v.clear();
  for (std::size_t i = 0; i < zones_.size(); ++i)
    if (zones_[i] >= 0) zoneCells_[static_cast<std::size_t>(zones_[i])].push_back(cellAt(i));
}

std::string GridMap::dump() const {
  std::string out;
  out.reserve(cellCount() + static_cast<std::size_t>(height_));
  for (int y = height_ - 1; y >= 0; --y) {
    for (int x = 0; x < width_; ++x) {
      const Cell c{x, y};
      switch (kind(c)) {
        case CellKind::Corridor: out += '.'; break;
        case CellKind::Obstacle: out += '#'; break;
        case CellKind::Station: out += 'S'; break;
        case CellKind::Storage: out += zone_letter(*zoneOf(c)); break;
      }
    }
    out += '\n';
  }
  return out;
}

GridMap GridMap::parse(std::string_view text, double cellSize) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw ValidationError("layout", "empty map text");
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  std::optional<Cell> station;
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != w)
      throw ValidationError("layout", "ragged map row " + std::to_string(r));
    const auto pos = rows[static_cast<std::size_t>(r)].find('S');
    if (pos != std::string::npos) station = Cell{static_cast<int>(pos), h - 1 - r};
  }
  if (!station) throw ValidationError("layout.station", "map has no 'S' cell");
  GridMap map(w, h, *station, cellSize);
  for (int r = 0; r < h; ++r) {
    for (int x = 0; x < w; ++x) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(x)];
      const Cell c{x, h - 1 - r};
      if (ch == '#') {
        map.kinds_[map.index(c)] = CellKind::Obstacle;
      } else if (ch == '.' || ch == 'S') {
        continue;
      } else if (auto z = zone_from_letter(ch)) {
        map.kinds_[map.index(c)] = CellKind::Storage;
        map.zones_[map.index(c)] = static_cast<std::int8_t>(*z);
      } else {
        throw ValidationError("layout", std::string("unexpected map character '") + ch + "'");
      }
    }
  }
  map.rebuildZoneIndex();
  return map;
}

bool operator==(const GridMap& a, const GridMap& b) {
  return a.width_ == b.width_ && a.height_ == b.height_ && a.cellSize_ == b.cellSize_ &&
         a.station_ == b.station_ && a.kinds_ == b.kinds_ && a.zones_ == b.zones_;
}

GridMap generate_layout(WarehouseScale scale, std::uint64_t seed, const LayoutConfig& config) {
  const GridDims dims = config.dims.value_or(default_dims(scale));
  if (dims.width < 3 || dims.height < 3)
    throw ValidationError("layout.dims", "grid must be at least 3x3");
  const Cell station{dims.width / 2, 0};
  GridMap map(dims.width, dims.height, station, config.cellSize);

  // Single-width corridors on every even row and column; storage bays sit on
  // the odd/odd lattice so each bay touches four corridor cells.
  std::vector<Cell> storage;
  for (int y = 1; y < dims.height; y += 2)
    for (int x = 1; x < dims.width; x += 2) storage.push_back({x, y});

  std::sort(storage.begin(), storage.end(), [&](Cell a, Cell b) {
    const int da = manhattan(a, station), db = manhattan(b, station);
    if (da != db) return da < db;
    return a < b;
  });
  const auto nF = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.zoneFFraction * static_cast<double>(storage.size()))));
  std::vector<Cell> rest(storage.begin() + static_cast<std::ptrdiff_t>(nF), storage.end());
  std::sort(rest.begin(), rest.end());  // column-major bands A..E from left to right

  std::vector<std::pair<Cell, Zone>> labelled;
  for (std::size_t i = 0; i < nF; ++i) labelled.emplace_back(storage[i], Zone::F);
  for (std::size_t i = 0; i < rest.size(); ++i)
    labelled.emplace_back(rest[i], static_cast<Zone>(std::min<std::size_t>(4, i * 5 / rest.size())));

  std::array<std::size_t, 6> zoneCount{};
  for (const auto& [c, z] : labelled) ++zoneCount[static_cast<std::size_t>(z)];

  // Pillars: a seeded shuffle of the bays, never emptying a zone.
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(scale)));
  std::vector<std::size_t> order(labelled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto nObstacles = static_cast<std::size_t>(
      std::floor(config.obstacleFraction * static_cast<double>(labelled.size())));
  std::vector<bool> isPillar(labelled.size(), false);
  std::size_t placed = 0;
  for (std::size_t k = 0; k < order.size() && placed < nObstacles; ++k) {
    const auto z = static_cast<std::size_t>(labelled[order[k]].second);
    if (zoneCount[z] <= 1) continue;
    --zoneCount[z];
    isPillar[order[k]] = true;
    ++placed;
  }

  for (std::size_t i = 0; i < labelled.size(); ++i) {
    const Cell c = labelled[i].first;
    if (isPillar[i]) {
      map.kinds_[map.index(c)] = CellKind::Obstacle;
    } else {
      map.kinds_[map.index(c)] = CellKind::Storage;
      map.zones_[map.index(c)] = static_cast<std::int8_t>(labelled[i].second);
    }
  }
  map.rebuildZoneIndex();
  return map;
}

Cell storage_coordinate(const GridMap& map, Zone zone, Rng& rng) {
  const auto& cells = map.zoneCells(zone);
  if (cells.empty())
    throw UnknownZoneError(std::string("zone '") + zone_letter(zone) + "' has no cells in this map");
  return cells[uniform_index(rng, cells.size())];
}

Cell storage_coordinate(const GridMap& map, Zone zone, std::uint64_t seed) {
  Rng rng(seed);
  return storage_coordinate(map, zone, rng);
}

Cell storage_coordinate(const GridMap& map, std::string_view zone, std::uint64_t seed) {
  std::optional<Zone> z;
  if (zone.size() == 1) z = zone_from_letter(zone.front());
  if (!z) throw UnknownZoneError("unknown zone label '" + std::string(zone) + "'");
  return storage_coordinate(map, *z, seed);
}

namespace {
constexpr std::array<Cell, 4> kSteps{Cell{0, 1}, Cell{0, -1}, Cell{-1, 0}, Cell{1, 0}};
}

std::vector<int> bfs_distances(const GridMap& map, Cell from) {
  std::vector<int> dist(map.cellCount(), -1);
  if (!map.passable(from)) return dist;
  std::deque<Cell> frontier{from};
  dist[map.index(from)] = 0;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (const Cell d : kSteps) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (!map.passable(n) || dist[map.index(n)] >= 0) continue;
      dist[map.index(n)] = dist[map.index(c)] + 1;
      frontier.push_back(n);
    }
  }
  return dist;
}

std::vector<bool> flood_fill(const GridMap& map, Cell from) {
  const auto dist = bfs_distances(map, from);
  std::vector<bool> reached(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) reached[i] = dist[i] >= 0;
  return reached;
}

}  // namespace agvsb
