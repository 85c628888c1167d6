#include <string>

#include "xfid/errors.hpp"
#include "xfid/explainers.hpp"

#include <nlohmann/json.hpp>

namespace xfid {

namespace {
using json = nlohmann::ordered_json;
}

const char* payload_kind_name(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::SurrogateCoefficients: return "surrogate-coefficients";
        case PayloadKind::ShapleyAttributions: return "shapley-attributions";
        case PayloadKind::PdValues: return "pd-values";
    }
    return "unknown";
}

PayloadKind payload_kind_from_name(const std::string& name) {
    if (name == "surrogate-coefficients") return PayloadKind::SurrogateCoefficients;
    if (name == "shapley-attributions") return PayloadKind::ShapleyAttributions;
    if (name == "pd-values") return PayloadKind::PdValues;
    throw ConfigInvalid("unknown explanation kind '" + name + "'");
}

std::string explanation_to_json(const Explanation& e) {
    json j;
    j["kind"] = payload_kind_name(e.kind);
    j["effects"] = e.effects;
    j["samples"] = e.samples;
    json payload = json::array();
    for (std::size_t t = 0; t < e.samples.size(); ++t) {
        json col = json::array();
        for (std::size_t k = 0; k < e.effects.size(); ++k)
            col.push_back(e.payload.at(k, t));
        payload.push_back(std::move(col));
    }
    j["payload"] = std::move(payload);
    if (!e.intercepts.empty()) {
        if (e.kind == PayloadKind::ShapleyAttributions)
            j["base_value"] = e.intercepts;
        else
            j["intercept"] = e.intercepts;
    }
    if (!e.mu.empty()) j["mu"] = e.mu;
    if (!e.sigma.empty()) j["sigma"] = e.sigma;
    if (!e.pd_mean.empty()) j["pd_mean"] = e.pd_mean;
    j["diagnostics"] = {{"dropped_evals", e.dropped_evals}, {"coalitions", e.coalitions}};
    return j.dump();
}

Explanation explanation_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& ex) {
        throw ConfigInvalid(std::string("explanation JSON parse error: ") + ex.what());
    }
    Explanation e;
    if (!j.contains("kind")) throw ConfigInvalid("explanation JSON: missing 'kind'");
    e.kind = payload_kind_from_name(j["kind"].get<std::string>());
    e.effects = j.at("effects").get<std::vector<std::vector<int>>>();
    e.samples = j.at("samples").get<std::vector<std::size_t>>();
    const json& payload = j.at("payload");
    e.payload = Matrix(e.effects.size(), e.samples.size());
    for (std::size_t t = 0; t < e.samples.size(); ++t)
        for (std::size_t k = 0; k < e.effects.size(); ++k)
            e.payload.at(k, t) = payload.at(t).at(k).get<double>();
    if (j.contains("base_value")) e.intercepts = j["base_value"].get<std::vector<double>>();
    if (j.contains("intercept")) e.intercepts = j["intercept"].get<std::vector<double>>();
    if (j.contains("mu")) e.mu = j["mu"].get<std::vector<double>>();
    if (j.contains("sigma")) e.sigma = j["sigma"].get<std::vector<double>>();
    if (j.contains("pd_mean")) e.pd_mean = j["pd_mean"].get<std::vector<double>>();
    if (j.contains("diagnostics")) {
        e.dropped_evals = j["diagnostics"].value("dropped_evals", 0L);
        e.coalitions = j["diagnostics"].value("coalitions", 0L);
    }
    return e;
}

}  // namespace xfid
