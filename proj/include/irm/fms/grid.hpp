#pragma once

#include "irm/influence.hpp"

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace irm::fms {

struct Cell {
    int x = 0;
    int y = 0;

    auto operator<=>(const Cell&) const = default;
};

Value to_json(Cell c);
Cell cell_from_json(const Value& v);
std::string to_string(Cell c);

constexpr int unreachable = -1;

/// Rectangular 4-connected grid. '#' marks a blocked cell in the row form.
class GridMap {
public:
    GridMap() = default;
    GridMap(int width, int height, std::set<Cell> blocked = {});

    static GridMap from_rows(const std::vector<std::string>& rows);
    std::vector<std::string> to_rows() const;

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }
    const std::set<Cell>& blocked() const { return blocked_; }

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    bool is_free(Cell c) const { return in_bounds(c) && !free_mask_.empty() && free_mask_[index(c)]; }

    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x); }
    Cell cell_at(std::size_t i) const { return Cell{static_cast<int>(i % static_cast<std::size_t>(width_)), static_cast<int>(i / static_cast<std::size_t>(width_))}; }

    /// Free 4-neighbors in ascending (x, y) order.
    std::vector<Cell> free_neighbors(Cell c) const;

    bool operator==(const GridMap& other) const
    {
        return width_ == other.width_ && height_ == other.height_ && blocked_ == other.blocked_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::set<Cell> blocked_;
    std::vector<bool> free_mask_;
};

/// Per-cell BFS distance over free cells (unreachable = -1). Cells in
/// `obstacles` are not entered. A positive `max_distance` stops the search.
std::vector<int> bfs_distances(const GridMap& grid, Cell source, const std::set<Cell>& obstacles = {},
                               int max_distance = -1);

/// Shortest 4-connected path from `from` to `to` that avoids `obstacles`,
/// excluding `from` and including `to`. Among equal-length paths the
/// lexicographically smallest next step is taken at every cell.
std::optional<std::vector<Cell>> shortest_path(const GridMap& grid, Cell from, Cell to,
                                               const std::set<Cell>& obstacles = {});

} // namespace irm::fms
