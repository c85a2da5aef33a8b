#include "irm/engine.hpp"

#include "irm/error.hpp"
#include "irm/rng.hpp"

#include <algorithm>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace irm {

ReactionResult identity_reaction(const ReactionInput& in) { return ReactionResult{in.properties, {}}; }

std::vector<ProducerDecl> Model::producer_decls() const
{
    std::vector<ProducerDecl> out;
    for (const auto& [name, t] : agent_types) {
        out.push_back({name, t.home_levels});
    }
    for (const auto& e : environments) {
        out.push_back({e.record.id, e.record.member_levels});
    }
    return out;
}

std::vector<HierarchyViolation> validate_model(const Model& model)
{
    std::vector<HierarchyViolation> out;
    auto report = [&](ErrorCode code, std::string msg) { out.push_back({code, std::move(msg)}); };
    const auto& g = model.graph;
    for (const auto& l : g.levels()) {
        auto it = model.reactions.find(l);
        if (it == model.reactions.end() || !it->second) {
            report(ErrorCode::InvalidModel, "level '" + l.name + "' has no reaction");
        }
    }
    for (const auto& [l, r] : model.reactions) {
        if (!g.contains(l)) report(ErrorCode::UnknownLevel, "reaction for unknown level '" + l.name + "'");
    }
    for (const auto& [l, kinds] : model.producible_kinds) {
        if (!g.contains(l)) report(ErrorCode::UnknownLevel, "kind set for unknown level '" + l.name + "'");
    }
    for (const auto& [name, t] : model.agent_types) {
        for (const auto& l : t.home_levels) {
            if (!g.contains(l)) report(ErrorCode::UnknownLevel, "agent type '" + name + "' lives in unknown level '" + l.name + "'");
        }
        if (!t.behavior.perception || !t.behavior.memorization || !t.behavior.decision) {
            report(ErrorCode::InvalidModel, "agent type '" + name + "' has an incomplete behavior");
        }
    }
    std::set<std::string> env_ids;
    for (const auto& e : model.environments) {
        if (!env_ids.insert(e.record.id).second) {
            report(ErrorCode::InvalidModel, "duplicate environment id '" + e.record.id + "'");
        }
        if (e.record.member_levels.empty()) {
            report(ErrorCode::InvalidModel, "environment '" + e.record.id + "' belongs to no level");
        }
        for (const auto& l : e.record.member_levels) {
            if (!g.contains(l)) report(ErrorCode::UnknownLevel, "environment '" + e.record.id + "' in unknown level '" + l.name + "'");
        }
        if (!e.natural) {
            report(ErrorCode::InvalidModel, "environment '" + e.record.id + "' has no natural rule");
        }
        if (model.agent_types.count(e.record.id) != 0) {
            report(ErrorCode::InvalidModel, "environment id '" + e.record.id + "' collides with an agent type");
        }
    }
    auto h = check_hierarchy(g, model.producible_kinds, model.hierarchy, model.producer_decls());
    out.insert(out.end(), h.begin(), h.end());
    return out;
}

namespace {

struct ProducerOutput {
    InfluenceSet influences;
    std::optional<Value> internal_state;
    std::exception_ptr error;
};

InfluenceClass classify(const Model& model, const std::string& kind)
{
    if (model.hierarchy.emergence(kind) != nullptr) return InfluenceClass::emergence;
    if (model.hierarchy.constraint(kind) != nullptr) return InfluenceClass::constraint;
    return InfluenceClass::ordinary;
}

void throw_violation(const HierarchyViolation& v, const Influence& i)
{
    throw ContractViolation(v.code, v.message + " [producer " + i.producer.key() + ", kind " + i.kind + ", level " +
                                        i.target.name + "]");
}

/// Stamps identity and class onto drafts and enforces the routing and
/// hierarchy contracts for one producer.
InfluenceSet admit(const Model& model, const ProducerRef& producer, const ProducerDecl& decl, Tick tick,
                   std::vector<InfluenceDraft> drafts)
{
    const auto allowed = model.graph.out_influence(decl.levels);
    InfluenceSet out;
    std::uint32_t seq = 0;
    for (auto& d : drafts) {
        Influence i{InfluenceId{producer.key(), tick, seq++}, std::move(d.kind), std::move(d.target), producer,
                    std::move(d.payload), InfluenceClass::ordinary};
        if (allowed.count(i.target) == 0) {
            throw ContractViolation(ErrorCode::IllegalInfluenceTarget,
                                    "producer " + producer.key() + " emitted '" + i.kind + "' into level '" +
                                        i.target.name + "' outside its N_I^+");
        }
        auto kinds = model.producible_kinds.find(i.target);
        if (kinds == model.producible_kinds.end() || kinds->second.count(i.kind) == 0) {
            throw ContractViolation(ErrorCode::UndeclaredInfluenceKind,
                                    "producer " + producer.key() + " emitted '" + i.kind + "', which is not producible in '" +
                                        i.target.name + "'");
        }
        i.cls = classify(model, i.kind);
        if (i.cls == InfluenceClass::emergence) {
            const HierarchicalCoupling* coupling = nullptr;
            for (const auto& c : model.hierarchy.couplings) {
                if (c.macro == i.target && decl.levels.count(c.micro) != 0) {
                    coupling = &c;
                    break;
                }
            }
            if (coupling == nullptr) {
                throw_violation({ErrorCode::ForbiddenEmergenceProducer, "emergence produced outside any micro level"}, i);
            }
            if (auto v = check_emergence_legality(model.producible_kinds, model.hierarchy, *coupling, i, decl)) {
                throw_violation(*v, i);
            }
        }
        else if (i.cls == InfluenceClass::constraint) {
            if (auto v = check_constraint_legality(model.producible_kinds, model.hierarchy, i, decl)) {
                throw_violation(*v, i);
            }
        }
        out.insert(std::move(i));
    }
    return out;
}

ProducerOutput run_agent(const Model& model, const SystemState& snapshot, const AgentRecord& agent)
{
    ProducerOutput out;
    try {
        auto type = model.agent_types.find(agent.type);
        if (type == model.agent_types.end()) {
            throw Error(ErrorCode::InvalidModel, "agent '" + agent.id.name + "' has unknown type '" + agent.type + "'");
        }
        const auto& behavior = type->second.behavior;
        LevelSet levels = member_levels(snapshot, agent.id);
        auto producer = ProducerRef::agent(agent.id.name);
        AgentContext ctx{agent.id, agent.type, snapshot.time, levels, derive_stream(model.seed, producer.key(), snapshot.time)};
        Percept percept(snapshot, model.graph.out_perception(levels));
        Value p = behavior.perception(percept, ctx);
        Value s = behavior.memorization(p, agent.internal_state, ctx);
        auto drafts = behavior.decision(s, ctx);
        out.influences = admit(model, producer, ProducerDecl{agent.type, levels}, snapshot.time, std::move(drafts));
        out.internal_state = std::move(s);
    }
    catch (...) {
        out.error = std::current_exception();
    }
    return out;
}

ProducerOutput run_environment(const Model& model, const SystemState& snapshot, const Environment& env)
{
    ProducerOutput out;
    try {
        auto producer = ProducerRef::environment(env.record.id);
        EnvironmentContext ctx{env.record.id, snapshot.time, env.record.member_levels,
                               derive_stream(model.seed, producer.key(), snapshot.time)};
        Percept percept(snapshot, model.graph.out_perception(env.record.member_levels));
        auto drafts = env.natural(percept, ctx);
        out.influences = admit(model, producer, ProducerDecl{env.record.id, env.record.member_levels}, snapshot.time,
                               std::move(drafts));
    }
    catch (...) {
        out.error = std::current_exception();
    }
    return out;
}

std::vector<const AgentRecord*> agent_sequence(const SystemState& snapshot, const StepOptions& options)
{
    std::vector<const AgentRecord*> seq;
    if (options.agent_order) {
        for (const auto& id : *options.agent_order) {
            seq.push_back(&snapshot.agent(id));
        }
        if (seq.size() != snapshot.agents.size()) {
            throw Error(ErrorCode::InvalidModel, "agent order must list every agent exactly once");
        }
    }
    else {
        for (const auto& [id, a] : snapshot.agents) {
            seq.push_back(&a);
        }
    }
    return seq;
}

/// Rethrows the failure of the smallest producer key so the reported error
/// does not depend on evaluation order.
void rethrow_first(const std::vector<std::pair<std::string, std::exception_ptr>>& failures)
{
    const std::pair<std::string, std::exception_ptr>* first = nullptr;
    for (const auto& f : failures) {
        if (f.second && (first == nullptr || f.first < first->first)) {
            first = &f;
        }
    }
    if (first != nullptr) {
        std::rethrow_exception(first->second);
    }
}

} // namespace

Production produce_influences(const Model& model, const SystemState& snapshot, const StepOptions& options)
{
    auto agents = agent_sequence(snapshot, options);
    const auto n_agents = static_cast<std::ptrdiff_t>(agents.size());
    const auto n_envs = static_cast<std::ptrdiff_t>(model.environments.size());
    const auto total = n_agents + n_envs;
    std::vector<ProducerOutput> outputs(static_cast<std::size_t>(total));

    auto evaluate = [&](std::ptrdiff_t k) {
        auto idx = static_cast<std::size_t>(k);
        outputs[idx] = k < n_agents ? run_agent(model, snapshot, *agents[idx])
                                    : run_environment(model, snapshot, model.environments[idx - agents.size()]);
    };

    if (options.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < total; ++k) {
            evaluate(k);
        }
    }
    else {
        for (std::ptrdiff_t k = 0; k < total; ++k) {
            evaluate(k);
        }
    }

    std::vector<std::pair<std::string, std::exception_ptr>> failures;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        if (outputs[k].error) {
            auto key = k < agents.size() ? ProducerRef::agent(agents[k]->id.name).key()
                                         : ProducerRef::environment(model.environments[k - agents.size()].record.id).key();
            failures.emplace_back(std::move(key), outputs[k].error);
        }
    }
    rethrow_first(failures);

    Production prod;
    for (const auto& [l, ls] : snapshot.per_level) {
        prod.per_level[l] = ls.influences;
    }
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        for (const auto& [id, i] : outputs[k].influences) {
            prod.per_level[i.target].insert(i);
        }
        if (k < agents.size() && outputs[k].internal_state) {
            prod.internal_states[agents[k]->id] = std::move(*outputs[k].internal_state);
        }
    }
    return prod;
}

StepResult react(const Model& model, const SystemState& snapshot, const Production& produced, const StepOptions& options)
{
    std::vector<LevelId> order;
    if (options.level_order) {
        order = *options.level_order;
        if (order.size() != snapshot.per_level.size()) {
            throw Error(ErrorCode::InvalidModel, "level order must list every level exactly once");
        }
    }
    else {
        for (const auto& [l, ls] : snapshot.per_level) {
            order.push_back(l);
        }
    }

    struct LevelOutput {
        LevelState state;
        std::vector<InhibitionRecord> log;
        std::exception_ptr error;
    };
    std::vector<LevelOutput> outputs(order.size());
    static const InfluenceSet empty_set;

    auto evaluate = [&](std::size_t k) {
        const auto& l = order[k];
        auto& out = outputs[k];
        try {
            const auto& current = snapshot.level(l);
            auto rule = model.reactions.find(l);
            if (rule == model.reactions.end()) {
                throw Error(ErrorCode::ReactionFault, "level '" + l.name + "' has no reaction");
            }
            auto pit = produced.per_level.find(l);
            auto filtered = apply_constraints(pit == produced.per_level.end() ? empty_set : pit->second);
            ReactionResult result;
            try {
                result = rule->second(ReactionInput{l, snapshot.time, current.properties, filtered.filtered, filtered.log});
            }
            catch (const std::exception& e) {
                throw Error(ErrorCode::ReactionFault, "reaction of level '" + l.name + "' failed: " + e.what());
            }
            for (const auto& [id, i] : result.persisted) {
                if (i.target != l) {
                    throw Error(ErrorCode::ReactionFault, "reaction of level '" + l.name + "' persisted influence " +
                                                              id.str() + " targeting '" + i.target.name + "'");
                }
            }
            out.state = LevelState{l, std::move(result.properties), std::move(result.persisted)};
            out.log = std::move(filtered.log);
        }
        catch (...) {
            out.error = std::current_exception();
        }
    };

    const auto n = static_cast<std::ptrdiff_t>(order.size());
    if (options.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            evaluate(static_cast<std::size_t>(k));
        }
    }
    else {
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            evaluate(static_cast<std::size_t>(k));
        }
    }

    std::vector<std::pair<std::string, std::exception_ptr>> failures;
    for (std::size_t k = 0; k < order.size(); ++k) {
        failures.emplace_back(order[k].name, outputs[k].error);
    }
    rethrow_first(failures);

    StepResult result;
    result.report.tick = snapshot.time;
    result.report.produced = produced.per_level;
    SystemState next;
    next.time = snapshot.time + 1;
    for (std::size_t k = 0; k < order.size(); ++k) {
        result.report.inhibitions[order[k]] = std::move(outputs[k].log);
        next.per_level.emplace(order[k], std::move(outputs[k].state));
    }
    next = reconcile_agents(std::move(next), snapshot.agents);
    for (auto& [id, agent] : next.agents) {
        auto s = produced.internal_states.find(id);
        if (s != produced.internal_states.end()) {
            agent.internal_state = s->second;
        }
    }
    result.state = std::move(next);
    return result;
}

StepResult step_with_report(const Model& model, const SystemState& state, const StepOptions& options)
{
    auto produced = produce_influences(model, state, options);
    return react(model, state, produced, options);
}

RunResult run(const Model& model, const SystemState& initial, Tick ticks, const RunOptions& options)
{
    if (ticks < 1) {
        throw Error(ErrorCode::InvalidModel, "run needs a positive tick budget");
    }
    RunResult result;
    result.final_state = initial;
    result.stop_reason = "tick-budget";
    for (Tick t = 0; t < ticks; ++t) {
        auto stepped = step_with_report(model, result.final_state, options.step);
        result.final_state = std::move(stepped.state);
        ++result.ticks_run;
        TickView view{result.final_state, stepped.report};
        for (const auto& obs : options.observers) {
            if (auto values = obs.hook(view)) {
                result.records.push_back(MetricRecord{result.final_state.time, obs.name, std::move(*values)});
            }
        }
        bool stop = false;
        for (const auto& term : options.termination) {
            if (term.fires(result.final_state)) {
                result.stop_reason = term.name;
                stop = true;
                break;
            }
        }
        if (stop) {
            break;
        }
    }
    return result;
}

} // namespace irm
