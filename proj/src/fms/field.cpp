#include "irm/fms/field.hpp"

#include "irm/error.hpp"

namespace irm::fms {

namespace {

void check_emitters(const GridMap& grid, std::span<const Emitter> emitters)
{
    for (const auto& e : emitters) {
        if (!grid.is_free(e.cell)) {
            throw Error(ErrorCode::EmitterOnBlockedCell, "emitter at " + to_string(e.cell) + " is not on a free cell");
        }
    }
}

} // namespace

FieldSample compute_fields(const GridMap& grid, std::span<const Emitter> attractors, std::span<const Emitter> repulsors,
                           Execution execution)
{
    check_emitters(grid, attractors);
    check_emitters(grid, repulsors);

    FieldSample field{grid.width(), grid.height(), std::vector<int>(grid.size(), 0)};
    const std::size_t n_attr = attractors.size();
    const std::size_t n_total = n_attr + repulsors.size();
    auto emitter = [&](std::size_t k) -> const Emitter& { return k < n_attr ? attractors[k] : repulsors[k - n_attr]; };

    if (execution == Execution::serial) {
        for (std::size_t k = 0; k < n_total; ++k) {
            const auto& e = emitter(k);
            const int sign = k < n_attr ? 1 : -1;
            auto dist = bfs_distances(grid, e.cell, {}, e.amplitude);
            for (std::size_t i = 0; i < dist.size(); ++i) {
                field.potential[i] += sign * decay(e.amplitude, dist[i]);
            }
        }
        return field;
    }

    std::vector<std::vector<int>> distances(n_total);
    const auto n = static_cast<std::ptrdiff_t>(n_total);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto& e = emitter(static_cast<std::size_t>(k));
        distances[static_cast<std::size_t>(k)] = bfs_distances(grid, e.cell, {}, e.amplitude);
    }
    const auto cells = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < cells; ++i) {
        int sum = 0;
        for (std::size_t k = 0; k < n_total; ++k) {
            const int term = decay(emitter(k).amplitude, distances[k][static_cast<std::size_t>(i)]);
            sum += k < n_attr ? term : -term;
        }
        field.potential[static_cast<std::size_t>(i)] = sum;
    }
    return field;
}

} // namespace irm::fms
