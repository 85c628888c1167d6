#include "xfid/model_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "xfid/errors.hpp"
#include "xfid/rng.hpp"

namespace xfid {

namespace {

// Per-phase stream ids; adding a phase never perturbs earlier ones.
enum Stream : std::uint64_t {
    kFeatureShuffle = 0,
    kNonlinearMain = 1,
    kInteractionPick = 2,
    kNonlinearInteract = 3,
    kLinearInteract = 4,
    kProbe = 5,
};

std::vector<OpCode> class_ops(bool want_unary, bool want_binary, bool nonlinear,
                              std::vector<double>& weights_out) {
    std::vector<OpCode> ops;
    weights_out.clear();
    for (const Operator& op : operator_table()) {
        if (op.nonlinear != nonlinear || op.weight <= 0.0) continue;
        if ((op.arity == 1 && want_unary) || (op.arity == 2 && want_binary)) {
            ops.push_back(op.code);
            weights_out.push_back(op.weight);
        }
    }
    return ops;
}

double comb_capped(int n, int k, double cap) {
    if (k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > cap) return cap;
    }
    return c;
}

// One generation attempt; no domain validation.
AdditiveModel build_candidate(const GenParams& p, std::uint64_t round_seed) {
    const int n_used = p.d - p.n_dummy;
    Rng root(round_seed);

    // Used features: first d - n_dummy indices of a seeded shuffle.
    std::vector<int> order(static_cast<std::size_t>(p.d));
    for (int i = 0; i < p.d; ++i) order[static_cast<std::size_t>(i)] = i;
    {
        Rng shuf = root.split(kFeatureShuffle);
        shuf.shuffle(order);
    }
    std::vector<int> used(order.begin(), order.begin() + n_used);

    AdditiveModel model;
    model.d = p.d;
    {
        std::vector<int> dummies(order.begin() + n_used, order.end());
        std::sort(dummies.begin(), dummies.end());
        model.dummy_features = std::move(dummies);
    }

    std::vector<double> w_unary_nl;
    const std::vector<OpCode> unary_nl = class_ops(true, false, true, w_unary_nl);
    std::vector<double> w_all_nl;
    const std::vector<OpCode> all_nl = class_ops(true, true, true, w_all_nl);
    std::vector<double> w_lin_bin;
    const std::vector<OpCode> lin_bin = class_ops(false, true, false, w_lin_bin);

    // Phase 1: nonlinear main effects. pct_nonlinear * n_used operators are
    // binned as uniformly as possible over the first bins.size() used
    // features; residual operators stack as compositions.
    const int total_nl_main = static_cast<int>(std::lround(p.pct_nonlinear * n_used));
    const int n_nl_main = std::min(total_nl_main, n_used);
    const std::vector<int> main_bins = uniform_bins(total_nl_main, n_nl_main);
    {
        Rng rng = root.split(kNonlinearMain);
        for (int i = 0; i < n_nl_main; ++i) {
            ExprPtr e = leaf(used[static_cast<std::size_t>(i)]);
            for (int t = 0; t < main_bins[static_cast<std::size_t>(i)]; ++t)
                e = apply(unary_nl[rng.weighted(w_unary_nl)], e);
            model.effects.push_back(make_effect(std::move(e)));
        }
    }

    // Phase 2: linear main effects for the remaining used features.
    for (int i = n_nl_main; i < n_used; ++i)
        model.effects.push_back(make_effect(leaf(used[static_cast<std::size_t>(i)])));

    // Phases 3-4: interaction effects.
    const bool interactions = p.order_interact > 1 && p.pct_interact > 0.0;
    if (interactions) {
        const int order_i = p.order_interact;
        const double max_combos =
            comb_capped(n_used, order_i, 1e18);
        int n_inter = static_cast<int>(std::lround(p.pct_interact * n_used));
        n_inter = std::min<long long>(n_inter, static_cast<long long>(max_combos));

        // Distinct feature combinations, drawn without replacement.
        std::vector<std::vector<int>> combos;
        {
            Rng rng = root.split(kInteractionPick);
            std::set<std::vector<int>> seen;
            while (static_cast<int>(combos.size()) < n_inter) {
                std::vector<int> pool = used;
                rng.shuffle(pool);
                std::vector<int> combo(pool.begin(), pool.begin() + order_i);
                std::vector<int> key = combo;
                std::sort(key.begin(), key.end());
                if (seen.insert(key).second) combos.push_back(std::move(combo));
            }
        }

        const int total_nl_inter =
            static_cast<int>(std::lround(p.pct_nonlinear * n_inter));
        const int n_nl_inter = std::min(total_nl_inter, n_inter);
        const std::vector<int> inter_bins = uniform_bins(total_nl_inter, n_nl_inter);

        // Phase 3: nonlinear interactions. Each needs order-1 binary bridges;
        // nonlinear draws come from the combined unary+binary nonlinear class,
        // binary draws beyond the bridge budget fall back to unary. Missing
        // bridges are filled with linear binary operators.
        {
            Rng rng = root.split(kNonlinearInteract);
            for (int k = 0; k < n_nl_inter; ++k) {
                const std::vector<int>& feats = combos[static_cast<std::size_t>(k)];
                const int bridges_needed = order_i - 1;
                std::vector<OpCode> bridges;
                std::vector<OpCode> wraps;
                for (int t = 0; t < inter_bins[static_cast<std::size_t>(k)]; ++t) {
                    OpCode op;
                    if (static_cast<int>(bridges.size()) < bridges_needed)
                        op = all_nl[rng.weighted(w_all_nl)];
                    else
                        op = unary_nl[rng.weighted(w_unary_nl)];
                    if (operator_info(op).arity == 2)
                        bridges.push_back(op);
                    else
                        wraps.push_back(op);
                }
                while (static_cast<int>(bridges.size()) < bridges_needed)
                    bridges.push_back(lin_bin[rng.weighted(w_lin_bin)]);
                ExprPtr e = leaf(feats[0]);
                for (int t = 1; t < order_i; ++t)
                    e = apply(bridges[static_cast<std::size_t>(t - 1)], e,
                              leaf(feats[static_cast<std::size_t>(t)]));
                for (OpCode op : wraps) e = apply(op, e);
                model.effects.push_back(make_effect(std::move(e)));
            }
        }

        // Phase 4: linear interactions bridged by linear binary operators.
        {
            Rng rng = root.split(kLinearInteract);
            for (int k = n_nl_inter; k < n_inter; ++k) {
                const std::vector<int>& feats = combos[static_cast<std::size_t>(k)];
                ExprPtr e = leaf(feats[0]);
                for (int t = 1; t < order_i; ++t)
                    e = apply(lin_bin[rng.weighted(w_lin_bin)], e,
                              leaf(feats[static_cast<std::size_t>(t)]));
                model.effects.push_back(make_effect(std::move(e)));
            }
        }
    }
    return model;
}

AdditiveModel generate_with(const GenParams& params, const Matrix* extra_samples,
                            int max_rounds) {
    validate_params(params);
    for (int round = 0; round < max_rounds; ++round) {
        const std::uint64_t round_seed = seed_combine(params.seed, static_cast<std::uint64_t>(round));
        AdditiveModel model = build_candidate(params, round_seed);
        const Matrix probe = probe_grid(params.d, seed_combine(round_seed, kProbe));
        if (!validate_domain(model, probe)) continue;
        if (extra_samples != nullptr && !validate_domain(model, *extra_samples)) continue;
        return model;
    }
    throw GenerationFailed("generate_model: domain validation failed for " +
                           std::to_string(max_rounds) + " rounds at " + param_tag(params));
}

}  // namespace

void validate_params(const GenParams& p) {
    if (p.d < 1) throw ConfigInvalid("GenParams: d must be >= 1");
    if (p.n_dummy < 0 || p.n_dummy >= p.d)
        throw ConfigInvalid("GenParams: n_dummy must satisfy 0 <= n_dummy < d");
    if (p.pct_nonlinear < 0.0) throw ConfigInvalid("GenParams: pct_nonlinear must be >= 0");
    if (p.pct_interact < 0.0 || p.pct_interact > 0.5)
        throw ConfigInvalid("GenParams: pct_interact must be in [0, 0.5]");
    if (p.order_interact < 1) throw ConfigInvalid("GenParams: order_interact must be >= 1");
}

std::string param_tag(const GenParams& p) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "d%d_nd%d_nl%g_pi%g_oi%d", p.d, p.n_dummy,
                  p.pct_nonlinear,
                  p.order_interact == 1 ? 0.0 : p.pct_interact,
                  p.pct_interact == 0.0 ? 1 : p.order_interact);
    return buf;
}

std::vector<int> uniform_bins(int total, int bins) {
    std::vector<int> out(static_cast<std::size_t>(std::max(bins, 0)));
    if (bins <= 0) return out;
    const int base = total / bins;
    const int rem = total % bins;
    for (int i = 0; i < bins; ++i) out[static_cast<std::size_t>(i)] = base + (i < rem ? 1 : 0);
    return out;
}

Matrix probe_grid(int d, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(10 * d);
    const auto dd = static_cast<std::size_t>(d);
    Rng rng(seed);
    Matrix m(n, dd);
    std::vector<std::size_t> strata(n);
    for (std::size_t i = 0; i < n; ++i) strata[i] = i;
    const double width = 2.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < dd; ++c) {
        rng.shuffle(strata);
        for (std::size_t r = 0; r < n; ++r) {
            const double lo = -1.0 + width * static_cast<double>(strata[r]);
            m.at(r, c) = lo + width * rng.uniform();
        }
    }
    return m;
}

AdditiveModel generate_model(const GenParams& params, int max_rounds) {
    return generate_with(params, nullptr, max_rounds);
}

AdditiveModel generate_model_validated(const GenParams& params, const Matrix& samples,
                                       int max_rounds) {
    return generate_with(params, &samples, max_rounds);
}

std::vector<GenParams> parameter_grid() {
    const int ds[] = {2, 4, 7, 16, 32, 64, 127, 256, 512, 1024};
    const double dummy_fracs[] = {0.0, 0.2375, 0.475, 0.7125, 0.95};
    const double pct_nls[] = {0.0, 0.375, 0.75, 1.125, 1.5};
    const double pct_is[] = {0.167, 0.333, 0.5};
    const int orders[] = {2, 3};

    std::vector<GenParams> grid;
    for (int d : ds)
        for (double df : dummy_fracs)
            for (double nl : pct_nls) {
                GenParams base;
                base.d = d;
                base.n_dummy = static_cast<int>(std::floor(df * d));
                base.pct_nonlinear = nl;
                // order = 1 is implied by pct_interact = 0 (and vice versa):
                // one coupled row plus the 3 x 2 interaction combinations.
                base.pct_interact = 0.0;
                base.order_interact = 1;
                grid.push_back(base);
                for (double pi : pct_is)
                    for (int oi : orders) {
                        GenParams g = base;
                        g.pct_interact = pi;
                        g.order_interact = oi;
                        grid.push_back(g);
                    }
            }
    return grid;
}

}  // namespace xfid
