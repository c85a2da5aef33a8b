#pragma once

#include "irm/engine.hpp"
#include "irm/fms/grid.hpp"

#include <span>
#include <vector>

namespace irm::fms {

struct Emitter {
    Cell cell;
    int amplitude = 0;
};

/// Linear decay law: max(0, amplitude - distance); unreachable cells get 0.
constexpr int decay(int amplitude, int distance) noexcept
{
    if (distance < 0) return 0;
    return amplitude > distance ? amplitude - distance : 0;
}

/// Net potential per cell: sum of attractive minus sum of repulsive terms.
struct FieldSample {
    int width = 0;
    int height = 0;
    std::vector<int> potential;

    int at(Cell c) const { return potential[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x)]; }

    bool operator==(const FieldSample&) const = default;
};

/// Superposes every emitter's field over BFS distances that respect walls.
/// Throws Error(EmitterOnBlockedCell) for an emitter outside the free cells.
/// The parallel path computes per-emitter distances concurrently and reduces
/// per cell; results equal the serial path exactly.
FieldSample compute_fields(const GridMap& grid, std::span<const Emitter> attractors,
                           std::span<const Emitter> repulsors, Execution execution = Execution::parallel);

inline FieldSample compute_fields_serial(const GridMap& grid, std::span<const Emitter> attractors,
                                         std::span<const Emitter> repulsors)
{
    return compute_fields(grid, attractors, repulsors, Execution::serial);
}

} // namespace irm::fms
