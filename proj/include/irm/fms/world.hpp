#pragma once

#include "irm/fms/field.hpp"
#include "irm/fms/grid.hpp"
#include "irm/level_graph.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace irm::fms {

namespace kinds {
// shop floor
inline const std::string move = "move";
inline const std::string forced_move = "forced-move";
inline const std::string emit_repulsion = "emit-repulsion";
inline const std::string inhibit_move = "inhibit-move";
inline const std::string inhibit_repulsion = "inhibit-repulsion";
// task assignment
inline const std::string need_transport = "need-transport";
inline const std::string can_serve = "can-serve";
inline const std::string task_status = "task-status";
// deadlock solving
inline const std::string deadlock_emergence = "deadlock-emergence";
inline const std::string deadlock_resolved = "deadlock-resolved";
inline const std::string no_escape = "no-escape";
} // namespace kinds

namespace types {
inline const std::string agv = "agv";
inline const std::string shop = "shop";
inline const std::string deadlock_solver = "deadlock-solver";
} // namespace types

struct FmsParams {
    int attract_amplitude = 16;
    int repulse_amplitude = 4;
    int progress_window = 6;
    bool jitter = false;
    /// Deadlock-solving level acts on the floor (constraints, forced moves).
    /// When off it only records deadlocks.
    bool control = false;

    bool operator==(const FmsParams&) const = default;
};

struct ShopDecl {
    std::string id;
    Cell cell;
    bool operator==(const ShopDecl&) const = default;
};

struct AgvDecl {
    std::string id;
    Cell cell;
    bool operator==(const AgvDecl&) const = default;
};

struct TaskDecl {
    std::string id;
    std::string source;
    std::string destination;
    Tick release = 0;
    bool operator==(const TaskDecl&) const = default;
};

/// Which engine level plays which role.
struct FmsLevels {
    LevelId floor = "floor";
    LevelId tasks = "tasks";
    LevelId control = "control";
    bool operator==(const FmsLevels&) const = default;
};

struct FmsConfig {
    GridMap grid;
    std::vector<ShopDecl> shops;
    std::vector<AgvDecl> agvs;
    std::vector<TaskDecl> tasks;
    FmsParams params;
    FmsLevels levels;
};

/// Immutable shop-floor knowledge shared by every FMS rule: the map, shop
/// locations, the task book and per-shop distance tables.
class FmsWorld {
public:
    explicit FmsWorld(FmsConfig config);

    const FmsConfig& config() const { return config_; }
    const GridMap& grid() const { return config_.grid; }
    const FmsParams& params() const { return config_.params; }
    const FmsLevels& levels() const { return config_.levels; }

    const ShopDecl& shop(const std::string& id) const;
    const TaskDecl& task(const std::string& id) const;
    bool has_task(const std::string& id) const { return task_index_.count(id) != 0; }
    bool is_shop_cell(Cell c) const;
    /// Walls-only BFS distance from the shop to every cell.
    const std::vector<int>& distances_from_shop(const std::string& id) const;
    int distance_to_shop(const std::string& id, Cell from) const;

private:
    FmsConfig config_;
    std::map<std::string, std::size_t> shop_index_;
    std::map<std::string, std::size_t> task_index_;
    std::vector<std::vector<int>> shop_distances_;
};

using WorldPtr = std::shared_ptr<const FmsWorld>;

/// Checks references and cell placement; returns every problem found.
std::vector<std::string> check_config(const FmsConfig& config);

} // namespace irm::fms
