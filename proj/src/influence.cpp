#include "irm/influence.hpp"

#include "irm/error.hpp"

namespace irm {

std::string ProducerRef::key() const
{
    switch (kind) {
    case ProducerKind::agent: return "agent:" + id;
    case ProducerKind::environment: return "env:" + id;
    case ProducerKind::reaction: return "reaction:" + id;
    }
    return id;
}

ProducerRef ProducerRef::parse(const std::string& key)
{
    auto colon = key.find(':');
    if (colon == std::string::npos) {
        throw Error(ErrorCode::ParseError, "producer reference '" + key + "' lacks a kind prefix");
    }
    auto prefix = key.substr(0, colon);
    auto id = key.substr(colon + 1);
    if (prefix == "agent") return agent(id);
    if (prefix == "env") return environment(id);
    if (prefix == "reaction") return reaction(id);
    throw Error(ErrorCode::ParseError, "unknown producer kind '" + prefix + "'");
}

std::string InfluenceId::str() const
{
    return producer + "@" + std::to_string(tick) + "#" + std::to_string(seq);
}

std::string_view to_string(InfluenceClass c)
{
    switch (c) {
    case InfluenceClass::ordinary: return "ordinary";
    case InfluenceClass::emergence: return "emergence";
    case InfluenceClass::constraint: return "constraint";
    }
    return "ordinary";
}

Value to_json(const Influence& i)
{
    return Value{{"id", i.id.str()},
                 {"kind", i.kind},
                 {"target", i.target.name},
                 {"producer", i.producer.key()},
                 {"class", std::string(to_string(i.cls))},
                 {"payload", i.payload}};
}

InfluenceSet::InfluenceSet(std::initializer_list<Influence> items)
{
    for (const auto& i : items) {
        insert(i);
    }
}

bool InfluenceSet::insert(Influence i)
{
    auto id = i.id;
    return items_.emplace(std::move(id), std::move(i)).second;
}

void InfluenceSet::insert(const InfluenceSet& other)
{
    for (const auto& [id, i] : other) {
        items_.emplace(id, i);
    }
}

const Influence* InfluenceSet::find(const InfluenceId& id) const
{
    auto it = items_.find(id);
    return it == items_.end() ? nullptr : &it->second;
}

InfluenceSet merge_influences(std::span<const InfluenceSet> sets)
{
    InfluenceSet out;
    for (const auto& s : sets) {
        out.insert(s);
    }
    return out;
}

std::map<LevelId, InfluenceSet> partition_by_level(const InfluenceSet& set)
{
    std::map<LevelId, InfluenceSet> out;
    for (const auto& [id, i] : set) {
        out[i.target].insert(i);
    }
    return out;
}

} // namespace irm
