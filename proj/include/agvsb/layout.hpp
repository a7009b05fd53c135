#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agvsb/rng.hpp"
#include "agvsb/types.hpp"

namespace agvsb {

enum class WarehouseScale { Small, Medium, Large };

/// Storage zones. Zone F is the high-demand block placed next to the station.
enum class Zone : std::uint8_t { A, B, C, D, E, F };
inline constexpr std::array<Zone, 6> kAllZones{Zone::A, Zone::B, Zone::C,
                                               Zone::D, Zone::E, Zone::F};

char zone_letter(Zone z);
std::optional<Zone> zone_from_letter(char c);

std::string_view scale_name(WarehouseScale s);
WarehouseScale parse_scale(std::string_view name);

struct GridDims {
  int width = 0;
  int height = 0;
};

/// Default grid sizes in cells. Overridable through LayoutConfig.
GridDims default_dims(WarehouseScale s);

struct LayoutConfig {
  std::optional<GridDims> dims;
  double cellSize = 1.0;
  /// Fraction of storage cells turned into pillars/obstacles.
  double obstacleFraction = 0.10;
  /// Fraction of storage cells (nearest to the station) labelled F.
  double zoneFFraction = 1.0 / 6.0;
};

enum class CellKind : std::uint8_t { Corridor, Storage, Obstacle, Station };

/// Rectangular warehouse grid. Immutable once built.
class GridMap {
 public:
  GridMap() = default;
  /// Builds an open grid (every cell corridor) with the station at `station`.
  GridMap(int width, int height, Cell station, double cellSize = 1.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double cellSize() const noexcept { return cellSize_; }
  Cell station() const noexcept { return station_; }

  bool inBounds(Cell c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }
  Cell cellAt(std::size_t idx) const noexcept {
    return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
            static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }
  std::size_t cellCount() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  CellKind kind(Cell c) const { return kinds_[index(c)]; }
  bool isObstacle(Cell c) const { return !inBounds(c) || kind(c) == CellKind::Obstacle; }
  bool passable(Cell c) const { return inBounds(c) && kind(c) != CellKind::Obstacle; }
  std::optional<Zone> zoneOf(Cell c) const;

  const std::vector<Cell>& zoneCells(Zone z) const {
    return zoneCells_[static_cast<std::size_t>(z)];
  }
  std::vector<Cell> obstacles() const;

  /// Plain-text dump: top row first; '#' obstacle, '.' corridor, 'S' station,
  /// zone letter for storage cells.
  std::string dump() const;
  static GridMap parse(std::string_view text, double cellSize = 1.0);

  void setObstacle(Cell c);
  void setStorage(Cell c, Zone z);

  friend bool operator==(const GridMap& a, const GridMap& b);
  friend GridMap generate_layout(WarehouseScale, std::uint64_t, const LayoutConfig&);

 private:
  void rebuildZoneIndex();

  int width_ = 0;
  int height_ = 0;
  double cellSize_ = 1.0;
  Cell station_{};
  std::vector<CellKind> kinds_;
  std::vector<std::int8_t> zones_;  // -1 when the cell has no zone
  std::array<std::vector<Cell>, 6> zoneCells_;
};

GridMap generate_layout(WarehouseScale scale, std::uint64_t seed, const LayoutConfig& config);
inline GridMap generate_layout(WarehouseScale scale, std::uint64_t seed) {
  return generate_layout(scale, seed, LayoutConfig{});
}

/// Uniform draw among the non-obstacle cells of `zone`.
Cell storage_coordinate(const GridMap& map, Zone zone, Rng& rng);
Cell storage_coordinate(const GridMap& map, Zone zone, std::uint64_t seed);
/// Letter form; throws UnknownZoneError for labels outside A-F or absent zones.
Cell storage_coordinate(const GridMap& map, std::string_view zone, std::uint64_t seed);

/// Cells reachable from `from` through passable cells (4-connected).
std::vector<bool> flood_fill(const GridMap& map, Cell from);

/// Breadth-first distances in cells from `from`; -1 for unreachable cells.
std::vector<int> bfs_distances(const GridMap& map, Cell from);

}  // namespace agvsb
