#include "irm/hierarchy.hpp"

#include <algorithm>
#include <numeric>

namespace irm {

namespace {

bool in_kinds(const KindTable& kinds, const LevelId& l, const std::string& kind)
{
    auto it = kinds.find(l);
    return it != kinds.end() && it->second.count(kind) != 0;
}

const ProducerDecl* find_producer(const std::vector<ProducerDecl>& producers, const std::string& name)
{
    for (const auto& p : producers) {
        if (p.name == name) {
            return &p;
        }
    }
    return nullptr;
}

bool reaches(const ValidatedLevelGraph& graph, const LevelSet& from, const LevelId& target)
{
    for (const auto& l : from) {
        if (graph.contains(l) && graph.out_influence(l).count(target) != 0) {
            return true;
        }
    }
    return false;
}

std::vector<const HierarchicalCoupling*> couplings_with_micro(const HierarchySpec& spec, const LevelId& micro)
{
    std::vector<const HierarchicalCoupling*> out;
    for (const auto& c : spec.couplings) {
        if (c.micro == micro) {
            out.push_back(&c);
        }
    }
    return out;
}

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

} // namespace

bool InfluenceSelector::matches(const Influence& i) const
{
    if (i.cls != InfluenceClass::ordinary || i.kind != match_kind) {
        return false;
    }
    if (match_producer && i.producer != *match_producer) {
        return false;
    }
    for (const auto& [field, expected] : match_payload.items()) {
        if (!i.payload.is_object() || !i.payload.contains(field) || i.payload.at(field) != expected) {
            return false;
        }
    }
    return true;
}

Value InfluenceSelector::to_json() const
{
    Value v{{"kind", match_kind}, {"payload", match_payload}};
    if (match_producer) {
        v["producer"] = match_producer->key();
    }
    return v;
}

std::optional<InfluenceSelector> InfluenceSelector::from_json(const Value& v)
{
    if (!v.is_object() || !v.contains("kind") || !v.at("kind").is_string()) {
        return std::nullopt;
    }
    InfluenceSelector s;
    s.match_kind = v.at("kind").get<std::string>();
    if (v.contains("producer")) {
        if (!v.at("producer").is_string()) {
            return std::nullopt;
        }
        try {
            s.match_producer = ProducerRef::parse(v.at("producer").get<std::string>());
        }
        catch (const Error&) {
            return std::nullopt;
        }
    }
    if (v.contains("payload")) {
        if (!v.at("payload").is_object()) {
            return std::nullopt;
        }
        s.match_payload = v.at("payload");
    }
    return s;
}

Value constraint_payload(const InfluenceSelector& selector, Value extra)
{
    if (!extra.is_object()) {
        extra = Value::object();
    }
    extra["selector"] = selector.to_json();
    return extra;
}

const EmergenceKindDecl* HierarchySpec::emergence(const std::string& kind) const
{
    for (const auto& d : emergences) {
        if (d.kind == kind) return &d;
    }
    return nullptr;
}

const ConstraintKindDecl* HierarchySpec::constraint(const std::string& kind) const
{
    for (const auto& d : constraints) {
        if (d.kind == kind) return &d;
    }
    return nullptr;
}

const HierarchicalCoupling* HierarchySpec::coupling(const LevelId& micro, const LevelId& macro) const
{
    for (const auto& c : couplings) {
        if (c.micro == micro && c.macro == macro) return &c;
    }
    return nullptr;
}

std::vector<HierarchyViolation> check_hierarchy(const ValidatedLevelGraph& graph, const KindTable& kinds,
                                                const HierarchySpec& spec,
                                                const std::vector<ProducerDecl>& producers)
{
    std::vector<HierarchyViolation> out;
    auto report = [&](ErrorCode code, std::string msg) { out.push_back({code, std::move(msg)}); };

    for (const auto& c : spec.couplings) {
        if (!graph.contains(c.micro) || !graph.contains(c.macro)) {
            report(ErrorCode::UnknownLevel, "coupling " + c.micro.name + "/" + c.macro.name + " names an unknown level");
            continue;
        }
        if (c.micro == c.macro) {
            report(ErrorCode::UnknownCoupling, "coupling of level '" + c.micro.name + "' with itself");
            continue;
        }
        if (!graph.has_influence_edge(c.micro, c.macro) || !graph.has_influence_edge(c.macro, c.micro)) {
            report(ErrorCode::UnknownCoupling, "coupling " + c.micro.name + "/" + c.macro.name +
                                                   " requires influence edges in both directions");
        }
    }

    for (const auto& d : spec.emergences) {
        if (!graph.contains(d.macro)) {
            report(ErrorCode::UnknownLevel, "emergence kind '" + d.kind + "' names unknown level '" + d.macro.name + "'");
            continue;
        }
        if (spec.constraint(d.kind) != nullptr) {
            report(ErrorCode::KindDiscipline, "kind '" + d.kind + "' is declared both as emergence and constraint");
        }
        if (!in_kinds(kinds, d.macro, d.kind)) {
            report(ErrorCode::KindDiscipline,
                   "emergence kind '" + d.kind + "' must belong to the macro level '" + d.macro.name + "'");
        }
        bool coupled = false;
        for (const auto& c : spec.couplings) {
            if (c.macro != d.macro) continue;
            coupled = true;
            if (in_kinds(kinds, c.micro, d.kind)) {
                report(ErrorCode::KindDiscipline, "emergence kind '" + d.kind + "' must not belong to the micro level '" +
                                                      c.micro.name + "'");
            }
        }
        if (!coupled) {
            report(ErrorCode::UnknownCoupling,
                   "emergence kind '" + d.kind + "' targets '" + d.macro.name + "', which is no coupling's macro level");
        }
        const auto* det = find_producer(producers, d.detector);
        if (det == nullptr) {
            report(ErrorCode::InvalidModel, "emergence detector '" + d.detector + "' is not a declared producer");
        }
        else if (det->levels.count(d.macro) != 0) {
            report(ErrorCode::ForbiddenEmergenceProducer, "emergence kind '" + d.kind + "' would be produced by '" +
                                                              d.detector + "', which belongs to the macro level");
        }
        else if (!reaches(graph, det->levels, d.macro)) {
            report(ErrorCode::ForbiddenEmergenceProducer,
                   "detector '" + d.detector + "' cannot influence level '" + d.macro.name + "'");
        }
    }

    for (const auto& d : spec.constraints) {
        if (!graph.contains(d.micro)) {
            report(ErrorCode::UnknownLevel, "constraint kind '" + d.kind + "' names unknown level '" + d.micro.name + "'");
            continue;
        }
        if (spec.constraint(d.inhibits) != nullptr) {
            report(ErrorCode::ConstraintOverConstraint,
                   "constraint kind '" + d.kind + "' inhibits constraint kind '" + d.inhibits + "'");
        }
        if (spec.emergence(d.inhibits) != nullptr) {
            report(ErrorCode::KindDiscipline, "constraint kind '" + d.kind + "' targets emergence kind '" + d.inhibits + "'");
        }
        if (!in_kinds(kinds, d.micro, d.kind) || !in_kinds(kinds, d.micro, d.inhibits)) {
            report(ErrorCode::KindDiscipline, "constraint '" + d.kind + "' and inhibited kind '" + d.inhibits +
                                                  "' must both belong to the micro level '" + d.micro.name + "'");
        }
        auto cs = couplings_with_micro(spec, d.micro);
        if (cs.empty()) {
            report(ErrorCode::UnknownCoupling, "constraint kind '" + d.kind + "' lives in '" + d.micro.name +
                                                   "', which is no coupling's micro level");
        }
        for (const auto* c : cs) {
            if (in_kinds(kinds, c->macro, d.kind) && in_kinds(kinds, c->macro, d.inhibits)) {
                report(ErrorCode::KindDiscipline, "constraint '" + d.kind + "' and '" + d.inhibits +
                                                      "' must not both belong to the macro level '" + c->macro.name + "'");
            }
        }
        if (d.producers.empty()) {
            report(ErrorCode::ForbiddenConstraintProducer, "constraint kind '" + d.kind + "' has no permitted producer");
        }
        for (const auto& name : d.producers) {
            const auto* p = find_producer(producers, name);
            if (p == nullptr) {
                report(ErrorCode::InvalidModel, "constraint producer '" + name + "' is not a declared producer");
            }
            else if (p->levels.count(d.micro) != 0) {
                report(ErrorCode::ForbiddenConstraintProducer,
                       "constraint kind '" + d.kind + "' would be produced by '" + name + "', which belongs to the micro level");
            }
            else if (!reaches(graph, p->levels, d.micro)) {
                report(ErrorCode::ForbiddenConstraintProducer,
                       "constraint producer '" + name + "' cannot influence level '" + d.micro.name + "'");
            }
        }
    }
    return out;
}

std::optional<HierarchyViolation> check_emergence_legality(const KindTable& kinds, const HierarchySpec& spec,
                                                           const HierarchicalCoupling& coupling,
                                                           const Influence& influence,
                                                           const ProducerDecl& producer)
{
    const auto* decl = spec.emergence(influence.kind);
    if (influence.cls != InfluenceClass::emergence || decl == nullptr) {
        return HierarchyViolation{ErrorCode::KindDiscipline, "'" + influence.kind + "' is not a declared emergence kind"};
    }
    if (influence.target != coupling.macro || decl->macro != coupling.macro) {
        return HierarchyViolation{ErrorCode::IllegalInfluenceTarget,
                                  "emergence '" + influence.kind + "' must target macro level '" + coupling.macro.name + "'"};
    }
    if (!in_kinds(kinds, coupling.macro, influence.kind)) {
        return HierarchyViolation{ErrorCode::KindDiscipline,
                                  "emergence '" + influence.kind + "' is not producible in '" + coupling.macro.name + "'"};
    }
    if (in_kinds(kinds, coupling.micro, influence.kind)) {
        return HierarchyViolation{ErrorCode::KindDiscipline,
                                  "emergence '" + influence.kind + "' is also producible in '" + coupling.micro.name + "'"};
    }
    if (producer.name != decl->detector || producer.levels.count(coupling.macro) != 0) {
        return HierarchyViolation{ErrorCode::ForbiddenEmergenceProducer,
                                  "emergence '" + influence.kind + "' produced by '" + producer.name +
                                      "', permitted detector is '" + decl->detector + "'"};
    }
    return std::nullopt;
}

std::optional<HierarchyViolation> check_constraint_legality(const KindTable& kinds, const HierarchySpec& spec,
                                                            const Influence& influence,
                                                            const ProducerDecl& producer)
{
    const auto* decl = spec.constraint(influence.kind);
    if (influence.cls != InfluenceClass::constraint || decl == nullptr) {
        return HierarchyViolation{ErrorCode::KindDiscipline, "'" + influence.kind + "' is not a declared constraint kind"};
    }
    if (influence.target != decl->micro || !in_kinds(kinds, decl->micro, influence.kind)) {
        return HierarchyViolation{ErrorCode::IllegalInfluenceTarget,
                                  "constraint '" + influence.kind + "' must target micro level '" + decl->micro.name + "'"};
    }
    auto selector = influence.payload.is_object() && influence.payload.contains("selector")
                        ? InfluenceSelector::from_json(influence.payload.at("selector"))
                        : std::nullopt;
    if (!selector) {
        return HierarchyViolation{ErrorCode::MalformedConstraint,
                                  "constraint '" + influence.kind + "' carries no valid selector"};
    }
    if (selector->match_kind != decl->inhibits) {
        return HierarchyViolation{ErrorCode::MalformedConstraint, "constraint '" + influence.kind + "' may only inhibit '" +
                                                                      decl->inhibits + "', not '" + selector->match_kind + "'"};
    }
    bool permitted = std::find(decl->producers.begin(), decl->producers.end(), producer.name) != decl->producers.end();
    if (!permitted || producer.levels.count(decl->micro) != 0) {
        return HierarchyViolation{ErrorCode::ForbiddenConstraintProducer,
                                  "constraint '" + influence.kind + "' produced by '" + producer.name + "'"};
    }
    return std::nullopt;
}

ConstraintOutcome apply_constraints(const InfluenceSet& produced)
{
    ConstraintOutcome out;
    std::set<InfluenceId> inhibited;
    std::map<std::string, std::vector<const Influence*>> ordinary_by_kind;
    for (const auto& [id, i] : produced) {
        if (i.cls == InfluenceClass::ordinary) {
            ordinary_by_kind[i.kind].push_back(&i);
        }
    }
    for (const auto& [cid, c] : produced) {
        if (c.cls != InfluenceClass::constraint) {
            continue;
        }
        InhibitionRecord rec{cid, {}};
        auto selector = c.payload.is_object() && c.payload.contains("selector")
                            ? InfluenceSelector::from_json(c.payload.at("selector"))
                            : std::nullopt;
        auto candidates = selector ? ordinary_by_kind.find(selector->match_kind) : ordinary_by_kind.end();
        if (candidates != ordinary_by_kind.end()) {
            for (const auto* i : candidates->second) {
                if (selector->matches(*i)) {
                    rec.inhibited.push_back(i->id);
                    inhibited.insert(i->id);
                }
            }
        }
        out.log.push_back(std::move(rec));
    }
    for (const auto& [id, i] : produced) {
        if (i.cls != InfluenceClass::constraint && inhibited.count(id) == 0) {
            out.filtered.insert(i);
        }
    }
    return out;
}

std::set<std::string> trapped_members(const Value& payload)
{
    std::set<std::string> out;
    if (payload.is_object() && payload.contains("trapped") && payload.at("trapped").is_array()) {
        for (const auto& m : payload.at("trapped")) {
            if (m.is_string()) {
                out.insert(m.get<std::string>());
            }
        }
    }
    return out;
}

Value macro_body_attributes(const Influence& emergence)
{
    auto members = trapped_members(emergence.payload);
    Value attrs{{"trapped", Value(members)}, {"emergence", emergence.id.str()}, {"since", emergence.id.tick}};
    return attrs;
}

PropertyMap spawn_macro_agent(PropertyMap macro_properties, const AgentId& id, const std::string& type,
                              const Influence& emergence)
{
    macro_properties[body_key(id)] = body_entry(id, type, macro_body_attributes(emergence));
    return macro_properties;
}

PropertyMap dissolve_macro_agent(PropertyMap macro_properties, const AgentId& id)
{
    macro_properties.erase(body_key(id));
    return macro_properties;
}

namespace {

void require_coupling(const ValidatedLevelGraph& graph, const HierarchicalCoupling& c)
{
    if (!graph.contains(c.micro) || !graph.contains(c.macro) || c.micro == c.macro ||
        !graph.has_influence_edge(c.micro, c.macro) || !graph.has_influence_edge(c.macro, c.micro)) {
        throw Error(ErrorCode::UnknownCoupling, "no coupling " + c.micro.name + "/" + c.macro.name + " in the level graph");
    }
}

} // namespace

SystemState spawn_macro_agent(const SystemState& state, const ValidatedLevelGraph& graph,
                              const HierarchicalCoupling& coupling, const Influence& emergence, const AgentId& id,
                              const std::string& type)
{
    require_coupling(graph, coupling);
    AgentRecord rec;
    rec.id = id;
    rec.type = type;
    auto next = add_agent(state, std::move(rec));
    return register_body(next, id, coupling.macro, Body{coupling.macro, macro_body_attributes(emergence)});
}

SystemState dissolve_macro_agent(const SystemState& state, const ValidatedLevelGraph& graph,
                                 const HierarchicalCoupling& coupling, const AgentId& id)
{
    require_coupling(graph, coupling);
    auto next = remove_body(state, id, coupling.macro);
    next.agents.erase(id);
    return next;
}

std::vector<TrappedGroup> group_trapped_sets(const std::map<AgentId, std::set<std::string>>& existing,
                                             const std::vector<std::set<std::string>>& emergent)
{
    std::vector<AgentId> macro_ids;
    std::vector<const std::set<std::string>*> sets;
    for (const auto& [id, members] : existing) {
        macro_ids.push_back(id);
        sets.push_back(&members);
    }
    for (const auto& e : emergent) {
        sets.push_back(&e);
    }
    UnionFind uf(sets.size());
    std::map<std::string, std::size_t> first_owner;
    for (std::size_t n = 0; n < sets.size(); ++n) {
        for (const auto& m : *sets[n]) {
            auto [it, fresh] = first_owner.emplace(m, n);
            if (!fresh) {
                uf.unite(it->second, n);
            }
        }
    }
    std::map<std::size_t, TrappedGroup> by_root;
    for (std::size_t n = 0; n < sets.size(); ++n) {
        auto& g = by_root[uf.find(n)];
        g.members.insert(sets[n]->begin(), sets[n]->end());
        if (n < macro_ids.size()) {
            if (!g.keeper) {
                g.keeper = macro_ids[n];
            }
            else {
                g.absorbed.push_back(macro_ids[n]);
            }
        }
        else {
            g.emergences.push_back(n - macro_ids.size());
        }
    }
    std::vector<TrappedGroup> out;
    for (auto& [root, g] : by_root) {
        if (!g.members.empty() || g.keeper) {
            out.push_back(std::move(g));
        }
    }
    std::sort(out.begin(), out.end(), [](const TrappedGroup& a, const TrappedGroup& b) {
        return a.members < b.members;
    });
    return out;
}

} // namespace irm
