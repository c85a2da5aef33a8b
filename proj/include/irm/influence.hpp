#pragma once

#include "irm/level_graph.hpp"

#include <json.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace irm {

/// Structured value used for payloads, properties and internal agent state.
using Value = nlohmann::json;

using Tick = std::uint64_t;

enum class ProducerKind { agent, environment, reaction };

/// Who produced an influence. Reaction producers are levels that re-persist
/// or synthesize influences for the next step.
struct ProducerRef {
    ProducerKind kind = ProducerKind::agent;
    std::string id;

    static ProducerRef agent(std::string id) { return {ProducerKind::agent, std::move(id)}; }
    static ProducerRef environment(std::string id) { return {ProducerKind::environment, std::move(id)}; }
    static ProducerRef reaction(std::string level) { return {ProducerKind::reaction, std::move(level)}; }

    std::string key() const;
    static ProducerRef parse(const std::string& key);

    auto operator<=>(const ProducerRef&) const = default;
};

/// Producer-scoped identity: (producer, tick of production, sequence number
/// within that producer's output for the tick).
struct InfluenceId {
    std::string producer;
    Tick tick = 0;
    std::uint32_t seq = 0;

    std::string str() const;
    auto operator<=>(const InfluenceId&) const = default;
};

enum class InfluenceClass { ordinary, emergence, constraint };

std::string_view to_string(InfluenceClass c);

struct Influence {
    InfluenceId id;
    std::string kind;
    LevelId target;
    ProducerRef producer;
    Value payload;
    InfluenceClass cls = InfluenceClass::ordinary;

    bool operator==(const Influence&) const = default;
};

Value to_json(const Influence& i);

/// Set of influences keyed by id. Inserting an id already present keeps the
/// first occurrence.
class InfluenceSet {
public:
    using Map = std::map<InfluenceId, Influence>;
    using const_iterator = Map::const_iterator;

    InfluenceSet() = default;
    InfluenceSet(std::initializer_list<Influence> items);

    bool insert(Influence i);
    void insert(const InfluenceSet& other);
    bool erase(const InfluenceId& id) { return items_.erase(id) != 0; }
    bool contains(const InfluenceId& id) const { return items_.count(id) != 0; }
    const Influence* find(const InfluenceId& id) const;

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const_iterator begin() const { return items_.begin(); }
    const_iterator end() const { return items_.end(); }

    bool operator==(const InfluenceSet&) const = default;

private:
    Map items_;
};

/// Union with id-based deduplication (gamma'(t) as the union of the
/// carried-over set and every producer's output).
InfluenceSet merge_influences(std::span<const InfluenceSet> sets);

/// Splits a set by target level.
std::map<LevelId, InfluenceSet> partition_by_level(const InfluenceSet& set);

} // namespace irm
