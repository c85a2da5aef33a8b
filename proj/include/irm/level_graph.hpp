#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace irm {

/// Name of a level. Equality and ordering are by name only; the graph
/// attaches no hierarchy to the ordering.
struct LevelId {
    std::string name;

    LevelId() = default;
    LevelId(std::string n) : name(std::move(n)) {}
    LevelId(const char* n) : name(n) {}

    auto operator<=>(const LevelId&) const = default;
};

using LevelSet = std::set<LevelId>;
using LevelEdge = std::pair<LevelId, LevelId>;

/// Raw, user supplied level structure. Edges may contain duplicates and
/// self-loops; validate() normalizes them.
struct LevelGraphSpec {
    LevelSet levels;
    std::vector<LevelEdge> influence_edges;
    std::vector<LevelEdge> perception_edges;

    bool operator==(const LevelGraphSpec&) const = default;
};

/// Immutable validated level graph with precomputed neighborhoods.
///
/// Every neighborhood is reflexive: a level always influences and perceives
/// itself, so intra-level edges are never stored.
class ValidatedLevelGraph {
public:
    const LevelGraphSpec& spec() const { return spec_; }
    const LevelSet& levels() const { return spec_.levels; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    bool contains(const LevelId& l) const { return spec_.levels.count(l) != 0; }
    bool has_influence_edge(const LevelId& from, const LevelId& to) const;
    bool has_perception_edge(const LevelId& from, const LevelId& to) const;

    /// N_I^+(l): levels the agents and environments of l may influence.
    const LevelSet& out_influence(const LevelId& l) const;
    /// N_I^-(l): levels allowed to influence l.
    const LevelSet& in_influence(const LevelId& l) const;
    /// N_P^+(l): levels whose dynamic state the agents of l may perceive.
    const LevelSet& out_perception(const LevelId& l) const;
    /// N_P^-(l): levels that may perceive l.
    const LevelSet& in_perception(const LevelId& l) const;

    /// Union of out_influence over a set of levels (multi-level producers).
    LevelSet out_influence(const LevelSet& ls) const;
    LevelSet out_perception(const LevelSet& ls) const;

    /// Equality ignores warnings: normalizing an already normal spec yields
    /// an equal graph.
    bool operator==(const ValidatedLevelGraph& other) const { return spec_ == other.spec_; }

private:
    friend ValidatedLevelGraph validate(LevelGraphSpec spec);

    const LevelSet& lookup(const std::map<LevelId, LevelSet>& table, const LevelId& l) const;

    LevelGraphSpec spec_;
    std::vector<std::string> warnings_;
    std::map<LevelId, LevelSet> out_influence_;
    std::map<LevelId, LevelSet> in_influence_;
    std::map<LevelId, LevelSet> out_perception_;
    std::map<LevelId, LevelSet> in_perception_;
};

/// Normalizes and validates a level graph spec.
/// Self-loops are dropped with a warning and duplicate edges removed;
/// edges are stored sorted. Throws Error(EmptyLevelSet) or
/// Error(UnknownLevelEndpoint).
ValidatedLevelGraph validate(LevelGraphSpec spec);

} // namespace irm
