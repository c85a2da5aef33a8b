#pragma once

#include "irm/engine.hpp"
#include "irm/fms/world.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace irm::fms {

/// AGV body attributes in the shop-floor level.
struct AgvBody {
    Cell cell;
    std::optional<std::string> carrying;
    std::optional<std::string> assigned;
    /// Shop the AGV currently heads for.
    std::optional<std::string> goal;
    bool repulsing = false;
    /// Whether the last reaction changed the cell.
    bool moved = false;
    /// Cells after each of the last k reactions, oldest first.
    std::vector<Cell> window;
    /// Pickup/delivery events of the last reaction.
    Value events = Value::array();

    bool idle() const { return !assigned && !carrying; }

    Value to_json() const;
    static AgvBody from_json(const Value& v);
    bool operator==(const AgvBody&) const = default;
};

struct ShopBody {
    Cell cell;
    /// Tasks waiting for a pickup or a delivery at this shop, in order.
    std::vector<std::string> pending;
    bool emitting = false;

    Value to_json() const;
    static ShopBody from_json(const Value& v);
    bool operator==(const ShopBody&) const = default;
};

/// Typed view of sigma^floor.
struct FloorView {
    std::map<std::string, AgvBody> agvs;
    std::map<std::string, ShopBody> shops;
    /// Physical task progress: "picked" or "delivered".
    std::map<std::string, std::string> progress;

    static FloorView read(const PropertyMap& properties);
    void write(PropertyMap& properties) const;
};

/// Cell whose net potential an AGV sensed.
struct FieldProbe {
    Cell cell;
    int potential = 0;
};

/// Net potential sensed by an AGV heading for `goal` (attractive only when
/// the goal shop emits) among the given repulsive AGVs.
std::vector<FieldProbe> sense_field(const FmsWorld& world, const std::optional<std::string>& goal, bool goal_emitting,
                                    const std::vector<Cell>& repulsors, const std::vector<Cell>& cells);

/// Index of the probe to move to: strictly above `current`, maximal, ties to
/// the smallest cell. nullopt means stay.
std::optional<std::size_t> ascend(const std::vector<FieldProbe>& neighbors, int current);

struct MoveRequest {
    Cell from;
    Cell to;
};

/// Applies simultaneous moves under cell capacity one: the lowest id wins a
/// contested cell, an AGV cannot enter a cell whose occupant stays, and
/// swaps or longer rotation cycles all stay.
std::map<std::string, Cell> resolve_moves(const std::map<std::string, MoveRequest>& requests);

BehaviorRule agv_behavior(WorldPtr world);
BehaviorRule shop_behavior(WorldPtr world);
ReactionRule floor_reaction(WorldPtr world);

} // namespace irm::fms
