#include "irm/state.hpp"

#include "irm/error.hpp"

namespace irm {

namespace {

constexpr std::string_view body_prefix = "body/";

} // namespace

const LevelState& SystemState::level(const LevelId& l) const
{
    auto it = per_level.find(l);
    if (it == per_level.end()) {
        throw Error(ErrorCode::UnknownLevel, "level '" + l.name + "' is not part of the state");
    }
    return it->second;
}

const AgentRecord& SystemState::agent(const AgentId& a) const
{
    auto it = agents.find(a);
    if (it == agents.end()) {
        throw Error(ErrorCode::UnknownAgent, "agent '" + a.name + "' does not exist");
    }
    return it->second;
}

SystemState make_initial_state(const ValidatedLevelGraph& graph)
{
    SystemState s;
    for (const auto& l : graph.levels()) {
        s.per_level.emplace(l, LevelState{l, {}, {}});
    }
    return s;
}

std::string body_key(const AgentId& a) { return std::string(body_prefix) + a.name; }

std::optional<AgentId> body_owner(const std::string& property_key)
{
    if (property_key.size() > body_prefix.size() && property_key.compare(0, body_prefix.size(), body_prefix) == 0) {
        return AgentId(property_key.substr(body_prefix.size()));
    }
    return std::nullopt;
}

Value body_entry(const AgentId& a, const std::string& type, const Value& attributes)
{
    return Value{{"agent", a.name}, {"type", type}, {"attributes", attributes}};
}

LevelSet member_levels(const SystemState& state, const AgentId& a)
{
    const auto& agent = state.agent(a);
    LevelSet out;
    const auto key = body_key(a);
    for (const auto& [l, body] : agent.bodies) {
        auto it = state.per_level.find(l);
        if (it != state.per_level.end() && it->second.properties.count(key) != 0) {
            out.insert(l);
        }
    }
    return out;
}

SystemState add_agent(const SystemState& state, AgentRecord agent)
{
    if (state.agents.count(agent.id) != 0) {
        throw Error(ErrorCode::InvalidModel, "agent '" + agent.id.name + "' already exists");
    }
    auto bodies = std::move(agent.bodies);
    agent.bodies.clear();
    auto id = agent.id;
    SystemState next = state;
    next.agents.emplace(id, std::move(agent));
    for (auto& [l, body] : bodies) {
        next = register_body(next, id, l, std::move(body));
    }
    return next;
}

SystemState register_body(const SystemState& state, const AgentId& a, const LevelId& l, Body body)
{
    auto lvl = state.per_level.find(l);
    if (lvl == state.per_level.end()) {
        throw Error(ErrorCode::UnknownLevel, "cannot register a body in unknown level '" + l.name + "'");
    }
    const auto& agent = state.agent(a);
    const auto key = body_key(a);
    if (agent.bodies.count(l) != 0 || lvl->second.properties.count(key) != 0) {
        throw Error(ErrorCode::DuplicateBody, "agent '" + a.name + "' already has a body in '" + l.name + "'");
    }
    SystemState next = state;
    body.level = l;
    next.per_level[l].properties[key] = body_entry(a, agent.type, body.attributes);
    next.agents[a].bodies.emplace(l, std::move(body));
    return next;
}

SystemState remove_body(const SystemState& state, const AgentId& a, const LevelId& l)
{
    if (state.per_level.count(l) == 0) {
        throw Error(ErrorCode::UnknownLevel, "cannot remove a body from unknown level '" + l.name + "'");
    }
    const auto& agent = state.agent(a);
    if (agent.bodies.count(l) == 0) {
        throw Error(ErrorCode::MissingBody, "agent '" + a.name + "' has no body in '" + l.name + "'");
    }
    SystemState next = state;
    next.per_level[l].properties.erase(body_key(a));
    next.agents[a].bodies.erase(l);
    return next;
}

SystemState reconcile_agents(SystemState state, const std::map<AgentId, AgentRecord>& previous)
{
    std::map<AgentId, AgentRecord> agents;
    for (const auto& [id, rec] : previous) {
        AgentRecord copy = rec;
        copy.bodies.clear();
        agents.emplace(id, std::move(copy));
    }
    for (const auto& [l, ls] : state.per_level) {
        for (const auto& [key, entry] : ls.properties) {
            auto owner = body_owner(key);
            if (!owner) {
                continue;
            }
            auto it = agents.find(*owner);
            if (it == agents.end()) {
                AgentRecord fresh;
                fresh.id = *owner;
                fresh.type = entry.value("type", std::string());
                fresh.internal_state = entry.contains("init") ? entry.at("init") : Value();
                it = agents.emplace(*owner, std::move(fresh)).first;
            }
            it->second.bodies[l] = Body{l, entry.value("attributes", Value::object())};
        }
    }
    for (auto it = agents.begin(); it != agents.end();) {
        auto prev = previous.find(it->first);
        bool had_bodies = prev != previous.end() && !prev->second.bodies.empty();
        if (had_bodies && it->second.bodies.empty()) {
            it = agents.erase(it);
        }
        else {
            ++it;
        }
    }
    state.agents = std::move(agents);
    return state;
}

const LevelState& Percept::level(const LevelId& l) const
{
    if (!can_observe(l)) {
        throw ContractViolation(ErrorCode::IllegalPerception,
                                "perception of level '" + l.name + "' is outside N_P^+ of the observer");
    }
    return snapshot_->level(l);
}

} // namespace irm
