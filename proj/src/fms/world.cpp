#include "irm/fms/world.hpp"

#include "irm/error.hpp"

#include <set>

namespace irm::fms {

FmsWorld::FmsWorld(FmsConfig config) : config_(std::move(config))
{
    auto problems = check_config(config_);
    if (!problems.empty()) {
        throw Error(ErrorCode::ValidationError, problems.front());
    }
    for (std::size_t i = 0; i < config_.shops.size(); ++i) {
        shop_index_[config_.shops[i].id] = i;
        shop_distances_.push_back(bfs_distances(config_.grid, config_.shops[i].cell));
    }
    for (std::size_t i = 0; i < config_.tasks.size(); ++i) {
        task_index_[config_.tasks[i].id] = i;
    }
}

const ShopDecl& FmsWorld::shop(const std::string& id) const
{
    auto it = shop_index_.find(id);
    if (it == shop_index_.end()) {
        throw Error(ErrorCode::ValidationError, "unknown shop '" + id + "'");
    }
    return config_.shops[it->second];
}

const TaskDecl& FmsWorld::task(const std::string& id) const
{
    auto it = task_index_.find(id);
    if (it == task_index_.end()) {
        throw Error(ErrorCode::ValidationError, "unknown task '" + id + "'");
    }
    return config_.tasks[it->second];
}

bool FmsWorld::is_shop_cell(Cell c) const
{
    for (const auto& s : config_.shops) {
        if (s.cell == c) return true;
    }
    return false;
}

const std::vector<int>& FmsWorld::distances_from_shop(const std::string& id) const
{
    auto it = shop_index_.find(id);
    if (it == shop_index_.end()) {
        throw Error(ErrorCode::ValidationError, "unknown shop '" + id + "'");
    }
    return shop_distances_[it->second];
}

int FmsWorld::distance_to_shop(const std::string& id, Cell from) const
{
    if (!grid().in_bounds(from)) return unreachable;
    return distances_from_shop(id)[grid().index(from)];
}

std::vector<std::string> check_config(const FmsConfig& c)
{
    std::vector<std::string> out;
    if (c.params.attract_amplitude < 0 || c.params.repulse_amplitude < 0) {
        out.push_back("field amplitudes must be non-negative");
    }
    if (c.params.progress_window < 1) {
        out.push_back("progress window must be at least 1 tick");
    }
    std::set<std::string> ids;
    std::set<Cell> occupied;
    std::set<std::string> shop_ids;
    for (const auto& s : c.shops) {
        if (!ids.insert(s.id).second) out.push_back("duplicate id '" + s.id + "'");
        shop_ids.insert(s.id);
        if (!c.grid.in_bounds(s.cell)) out.push_back("shop '" + s.id + "' at " + to_string(s.cell) + " is outside the grid");
        else if (!c.grid.is_free(s.cell)) out.push_back("shop '" + s.id + "' at " + to_string(s.cell) + " is on a blocked cell");
    }
    for (const auto& a : c.agvs) {
        if (!ids.insert(a.id).second) out.push_back("duplicate id '" + a.id + "'");
        if (!c.grid.in_bounds(a.cell)) out.push_back("agv '" + a.id + "' at " + to_string(a.cell) + " is outside the grid");
        else if (!c.grid.is_free(a.cell)) out.push_back("agv '" + a.id + "' at " + to_string(a.cell) + " is on a blocked cell");
        if (!occupied.insert(a.cell).second) out.push_back("agv '" + a.id + "' shares cell " + to_string(a.cell));
    }
    std::set<std::string> task_ids;
    for (const auto& t : c.tasks) {
        if (!task_ids.insert(t.id).second) out.push_back("duplicate task id '" + t.id + "'");
        if (shop_ids.count(t.source) == 0) out.push_back("task '" + t.id + "' has unknown source shop '" + t.source + "'");
        if (shop_ids.count(t.destination) == 0) out.push_back("task '" + t.id + "' has unknown destination shop '" + t.destination + "'");
        if (t.source == t.destination) out.push_back("task '" + t.id + "' starts and ends at the same shop");
    }
    return out;
}

} // namespace irm::fms
