#include "irm/level_graph.hpp"

#include "irm/error.hpp"

#include <algorithm>

namespace irm {

namespace {

void normalize_edges(const LevelSet& levels, std::vector<LevelEdge>& edges, const char* relation,
                     std::vector<std::string>& warnings)
{
    std::vector<LevelEdge> kept;
    kept.reserve(edges.size());
    for (auto& e : edges) {
        for (const auto* end : {&e.first, &e.second}) {
            if (levels.count(*end) == 0) {
                throw Error(ErrorCode::UnknownLevelEndpoint,
                            std::string(relation) + " edge (" + e.first.name + ", " + e.second.name +
                                ") references unknown level '" + end->name + "'");
            }
        }
        if (e.first == e.second) {
            warnings.push_back(std::string("dropped ") + relation + " self-loop on level '" + e.first.name +
                               "' (intra-level relations are implicit)");
            continue;
        }
        kept.push_back(std::move(e));
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    edges = std::move(kept);
}

void fill_tables(const LevelSet& levels, const std::vector<LevelEdge>& edges, std::map<LevelId, LevelSet>& out,
                 std::map<LevelId, LevelSet>& in)
{
    for (const auto& l : levels) {
        out[l] = {l};
        in[l] = {l};
    }
    for (const auto& [from, to] : edges) {
        out[from].insert(to);
        in[to].insert(from);
    }
}

} // namespace

ValidatedLevelGraph validate(LevelGraphSpec spec)
{
    if (spec.levels.empty()) {
        throw Error(ErrorCode::EmptyLevelSet, "a level graph needs at least one level");
    }
    for (const auto& l : spec.levels) {
        if (l.name.empty()) {
            throw Error(ErrorCode::UnknownLevel, "level names must be non-empty");
        }
    }
    ValidatedLevelGraph g;
    normalize_edges(spec.levels, spec.influence_edges, "influence", g.warnings_);
    normalize_edges(spec.levels, spec.perception_edges, "perception", g.warnings_);
    g.spec_ = std::move(spec);
    fill_tables(g.spec_.levels, g.spec_.influence_edges, g.out_influence_, g.in_influence_);
    fill_tables(g.spec_.levels, g.spec_.perception_edges, g.out_perception_, g.in_perception_);
    return g;
}

const LevelSet& ValidatedLevelGraph::lookup(const std::map<LevelId, LevelSet>& table, const LevelId& l) const
{
    auto it = table.find(l);
    if (it == table.end()) {
        throw Error(ErrorCode::UnknownLevel, "level '" + l.name + "' is not part of the graph");
    }
    return it->second;
}

bool ValidatedLevelGraph::has_influence_edge(const LevelId& from, const LevelId& to) const
{
    return std::binary_search(spec_.influence_edges.begin(), spec_.influence_edges.end(), LevelEdge{from, to});
}

bool ValidatedLevelGraph::has_perception_edge(const LevelId& from, const LevelId& to) const
{
    return std::binary_search(spec_.perception_edges.begin(), spec_.perception_edges.end(), LevelEdge{from, to});
}

const LevelSet& ValidatedLevelGraph::out_influence(const LevelId& l) const { return lookup(out_influence_, l); }
const LevelSet& ValidatedLevelGraph::in_influence(const LevelId& l) const { return lookup(in_influence_, l); }
const LevelSet& ValidatedLevelGraph::out_perception(const LevelId& l) const { return lookup(out_perception_, l); }
const LevelSet& ValidatedLevelGraph::in_perception(const LevelId& l) const { return lookup(in_perception_, l); }

LevelSet ValidatedLevelGraph::out_influence(const LevelSet& ls) const
{
    LevelSet result;
    for (const auto& l : ls) {
        const auto& n = out_influence(l);
        result.insert(n.begin(), n.end());
    }
    return result;
}

LevelSet ValidatedLevelGraph::out_perception(const LevelSet& ls) const
{
    LevelSet result;
    for (const auto& l : ls) {
        const auto& n = out_perception(l);
        result.insert(n.begin(), n.end());
    }
    return result;
}

} // namespace irm
