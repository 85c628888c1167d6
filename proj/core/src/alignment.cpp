#include "xfid/alignment.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_set>

#include "xfid/errors.hpp"

#include <nlohmann/json.hpp>

namespace xfid {

namespace {

// Sorted-vector set intersection size with early exit on first overlap when
// only existence is needed.
int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
    int count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

MatchResult match_effects(const std::vector<std::vector<int>>& model_effects,
                          const std::vector<std::vector<int>>& explainer_effects) {
    const int m = static_cast<int>(model_effects.size());
    const int mh = static_cast<int>(explainer_effects.size());

    // Feature-indexed buckets keep the edge scan O(m * mh * d) worst case but
    // near-linear for sparse overlap.
    std::vector<std::vector<int>> sorted_model(model_effects);
    std::vector<std::vector<int>> sorted_expl(explainer_effects);
    for (auto& v : sorted_model) std::sort(v.begin(), v.end());
    for (auto& v : sorted_expl) std::sort(v.begin(), v.end());

    MatchResult result;
    UnionFind uf(static_cast<std::size_t>(m + mh));
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < mh; ++k)
            if (intersection_size(sorted_model[static_cast<std::size_t>(j)],
                                  sorted_expl[static_cast<std::size_t>(k)]) > 0) {
                result.edges.emplace_back(j, k);
                uf.unite(j, m + k);
            }

    // Connected components (isolated vertices included).
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> components;
    for (int j = 0; j < m; ++j) components[uf.find(j)].first.push_back(j);
    for (int k = 0; k < mh; ++k) components[uf.find(m + k)].second.push_back(k);

    std::vector<std::pair<int, int>> final_edges;
    for (auto& [root, comp] : components) {
        auto& [mside, eside] = comp;

        // Exact-pair splitting: all-or-nothing per component.
        auto has_exact_partner = [&](const std::vector<int>& set, bool model_side) {
            const auto& other = model_side ? sorted_expl : sorted_model;
            const auto& idxs = model_side ? eside : mside;
            for (int idx : idxs)
                if (other[static_cast<std::size_t>(idx)] == set) return true;
            return false;
        };
        bool all_exact = !mside.empty() && !eside.empty();
        for (int j : mside)
            if (all_exact) all_exact = has_exact_partner(sorted_model[static_cast<std::size_t>(j)], true);
        for (int k : eside)
            if (all_exact) all_exact = has_exact_partner(sorted_expl[static_cast<std::size_t>(k)], false);

        if (all_exact) {
            std::map<std::vector<int>, MatchGroup> by_set;
            for (int j : mside) by_set[sorted_model[static_cast<std::size_t>(j)]].model_side.push_back(j);
            for (int k : eside) by_set[sorted_expl[static_cast<std::size_t>(k)]].explainer_side.push_back(k);
            for (auto& [set, group] : by_set) {
                for (int j : group.model_side)
                    for (int k : group.explainer_side) final_edges.emplace_back(j, k);
                result.groups.push_back(std::move(group));
            }
        } else {
            for (const auto& [j, k] : result.edges)
                if (uf.find(j) == root) final_edges.emplace_back(j, k);
            MatchGroup group;
            group.model_side = mside;
            group.explainer_side = eside;
            result.groups.push_back(std::move(group));
        }
    }
    result.edges = std::move(final_edges);
    result.maiou = maiou(result, model_effects, explainer_effects);
    return result;
}

double maiou(const MatchResult& result,
             const std::vector<std::vector<int>>& model_effects,
             const std::vector<std::vector<int>>& explainer_effects) {
    if (result.groups.empty()) return 0.0;

    std::vector<int> model_group(model_effects.size(), -1);
    for (std::size_t g = 0; g < result.groups.size(); ++g)
        for (int j : result.groups[g].model_side)
            model_group[static_cast<std::size_t>(j)] = static_cast<int>(g);

    std::vector<double> iou_sum(result.groups.size(), 0.0);
    std::vector<int> edge_count(result.groups.size(), 0);
    for (const auto& [j, k] : result.edges) {
        std::vector<int> a = model_effects[static_cast<std::size_t>(j)];
        std::vector<int> b = explainer_effects[static_cast<std::size_t>(k)];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const int inter = intersection_size(a, b);
        const int uni = static_cast<int>(a.size() + b.size()) - inter;
        const auto g = static_cast<std::size_t>(model_group[static_cast<std::size_t>(j)]);
        iou_sum[g] += static_cast<double>(inter) / static_cast<double>(uni);
        ++edge_count[g];
    }

    double total = 0.0;
    for (std::size_t g = 0; g < result.groups.size(); ++g)
        if (edge_count[g] > 0) total += iou_sum[g] / edge_count[g];
    return total / static_cast<double>(result.groups.size());
}

std::string match_to_json(const MatchResult& result) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const MatchGroup& g : result.groups)
        groups.push_back({{"model", g.model_side}, {"explainer", g.explainer_side}});
    j["groups"] = std::move(groups);
    j["maiou"] = result.maiou;
    return j.dump();
}

MatchResult match_from_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const std::exception& ex) {
        throw ConfigInvalid(std::string("match JSON parse error: ") + ex.what());
    }
    MatchResult r;
    for (const auto& jg : j.at("groups")) {
        MatchGroup g;
        g.model_side = jg.at("model").get<std::vector<int>>();
        g.explainer_side = jg.at("explainer").get<std::vector<int>>();
        r.groups.push_back(std::move(g));
    }
    r.maiou = j.at("maiou").get<double>();
    return r;
}

}  // namespace xfid
