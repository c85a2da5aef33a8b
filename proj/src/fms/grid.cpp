#include "irm/fms/grid.hpp"

#include "irm/error.hpp"

#include <deque>

namespace irm::fms {

Value to_json(Cell c) { return Value::array({c.x, c.y}); }

Cell cell_from_json(const Value& v)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw Error(ErrorCode::ParseError, "a cell is written [x, y], got " + v.dump());
    }
    return Cell{v[0].get<int>(), v[1].get<int>()};
}

std::string to_string(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

GridMap::GridMap(int width, int height, std::set<Cell> blocked)
    : width_(width), height_(height), blocked_(std::move(blocked))
{
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::ValidationError, "grid dimensions must be positive");
    }
    free_mask_.assign(size(), true);
    for (const auto& b : blocked_) {
        if (!in_bounds(b)) {
            throw Error(ErrorCode::ValidationError, "blocked cell " + to_string(b) + " is outside the grid");
        }
        free_mask_[index(b)] = false;
    }
}

GridMap GridMap::from_rows(const std::vector<std::string>& rows)
{
    if (rows.empty() || rows.front().empty()) {
        throw Error(ErrorCode::ValidationError, "grid rows must be non-empty");
    }
    const auto width = rows.front().size();
    std::set<Cell> blocked;
    for (std::size_t y = 0; y < rows.size(); ++y) {
        if (rows[y].size() != width) {
            throw Error(ErrorCode::ValidationError, "grid row " + std::to_string(y) + " has a different width");
        }
        for (std::size_t x = 0; x < width; ++x) {
            char ch = rows[y][x];
            if (ch == '#') {
                blocked.insert(Cell{static_cast<int>(x), static_cast<int>(y)});
            }
            else if (ch != '.') {
                throw Error(ErrorCode::ValidationError, std::string("unexpected grid character '") + ch + "'");
            }
        }
    }
    return GridMap(static_cast<int>(width), static_cast<int>(rows.size()), std::move(blocked));
}

std::vector<std::string> GridMap::to_rows() const
{
    std::vector<std::string> rows(static_cast<std::size_t>(height_), std::string(static_cast<std::size_t>(width_), '.'));
    for (const auto& b : blocked_) {
        rows[static_cast<std::size_t>(b.y)][static_cast<std::size_t>(b.x)] = '#';
    }
    return rows;
}

std::vector<Cell> GridMap::free_neighbors(Cell c) const
{
    // Already in ascending (x, y) order.
    const Cell candidates[] = {{c.x - 1, c.y}, {c.x, c.y - 1}, {c.x, c.y + 1}, {c.x + 1, c.y}};
    std::vector<Cell> out;
    out.reserve(4);
    for (const auto& n : candidates) {
        if (is_free(n)) {
            out.push_back(n);
        }
    }
    return out;
}

std::vector<int> bfs_distances(const GridMap& grid, Cell source, const std::set<Cell>& obstacles, int max_distance)
{
    std::vector<int> dist(grid.size(), unreachable);
    if (!grid.is_free(source)) {
        return dist;
    }
    std::deque<Cell> queue{source};
    dist[grid.index(source)] = 0;
    while (!queue.empty()) {
        Cell c = queue.front();
        queue.pop_front();
        int d = dist[grid.index(c)];
        if (max_distance >= 0 && d >= max_distance) {
            continue;
        }
        for (const auto& n : grid.free_neighbors(c)) {
            auto& dn = dist[grid.index(n)];
            if (dn == unreachable && obstacles.count(n) == 0) {
                dn = d + 1;
                queue.push_back(n);
            }
        }
    }
    return dist;
}

std::optional<std::vector<Cell>> shortest_path(const GridMap& grid, Cell from, Cell to, const std::set<Cell>& obstacles)
{
    if (from == to) {
        return std::vector<Cell>{};
    }
    if (!grid.is_free(to) || obstacles.count(to) != 0) {
        return std::nullopt;
    }
    auto without_from = obstacles;
    without_from.erase(from);
    auto dist = bfs_distances(grid, to, without_from);
    if (!grid.is_free(from) || dist[grid.index(from)] == unreachable) {
        return std::nullopt;
    }
    std::vector<Cell> path;
    Cell c = from;
    while (c != to) {
        int d = dist[grid.index(c)];
        for (const auto& n : grid.free_neighbors(c)) {
            if (dist[grid.index(n)] == d - 1) {
                c = n;
                break;
            }
        }
        path.push_back(c);
    }
    return path;
}

} // namespace irm::fms
