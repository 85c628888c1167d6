#pragma once

#include <string>
#include <utility>
#include <vector>

namespace xfid {

/// One comparable group of effects. A side may be empty: that represents an
/// unmatched effect (e.g. a model effect the explainer never mentions).
struct MatchGroup {
    std::vector<int> model_side;      // indices into the model effect list
    std::vector<int> explainer_side;  // indices into the explainer effect list
};

struct MatchResult {
    std::vector<MatchGroup> groups;
    std::vector<std::pair<int, int>> edges;  // (model idx, explainer idx)
    double maiou = 0.0;
};

/// Bipartite alignment of effect sets: an edge whenever the feature subsets
/// intersect, groups are connected components. A component in which every
/// vertex participates in an exact pair (equal feature sets) is split into
/// those exact-pair groups. Isolated vertices form one-sided groups.
MatchResult match_effects(const std::vector<std::vector<int>>& model_effects,
                          const std::vector<std::vector<int>>& explainer_effects);

/// Mean-average-IoU of a matching: per-group average edge IoU, then the mean
/// over groups. Groups with no edges contribute 0.
double maiou(const MatchResult& result,
             const std::vector<std::vector<int>>& model_effects,
             const std::vector<std::vector<int>>& explainer_effects);

/// JSON {groups: [{model: [int], explainer: [int]}], maiou: float}.
std::string match_to_json(const MatchResult& result);
MatchResult match_from_json(const std::string& text);

}  // namespace xfid
