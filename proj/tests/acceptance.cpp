// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria mix exact property suites (additivity, oracle equality,
// metric tables) with qualitative trend reproduction on a reduced sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xfid/equivalence.hpp"
#include "xfid/errors.hpp"
#include "xfid/explainers.hpp"
#include "xfid/ground_truth.hpp"
#include "xfid/harness.hpp"
#include "xfid/metrics.hpp"
#include "xfid/model_gen.hpp"
#include "xfid/rng.hpp"

using namespace xfid;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail = "") {
    std::printf("criterion %d: %s — %s%s%s\n", criterion, pass ? "PASS" : "FAIL",
                what.c_str(), detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- criterion 1: bitwise additivity over generated models ---------------

void criterion_additivity() {
    const auto start = std::chrono::steady_clock::now();
    int models = 0;
    double max_gap = 0.0;
    Rng seeder(1001);
    const int ds[] = {2, 4, 7, 16};
    while (models < 200) {
        GenParams p;
        p.d = ds[models % 4];
        p.n_dummy = static_cast<int>(seeder.index(static_cast<std::size_t>(p.d)));
        const double nls[] = {0.0, 0.375, 0.75, 1.125, 1.5};
        p.pct_nonlinear = nls[seeder.index(5)];
        if (seeder.uniform() < 0.5) {
            p.pct_interact = 0.5;
            p.order_interact = 2 + static_cast<int>(seeder.index(2));
        }
        p.seed = seeder.next_u64();
        const Dataset data = sample_dataset(p.d, seeder.next_u64());
        AdditiveModel model;
        try {
            model = generate_model_validated(p, data.X, 200);
        } catch (const GenerationFailed&) {
            continue;  // aggressive cells may reject every round; draw again
        }
        const GroundTruthExplanation gt = explain_ground_truth(model, data);
        for (std::size_t s = 0; s < data.n(); ++s) {
            double total = 0.0;
            for (std::size_t j = 0; j < model.effects.size(); ++j)
                total += gt.contributions.at(j, s);
            max_gap = std::max(max_gap,
                               std::fabs(total - eval_model(model, data.X.row(s))));
        }
        ++models;
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "max |sum C_j - F| = %g over %d models, %.1fs",
                  max_gap, models, elapsed_s(start));
    report(1, max_gap == 0.0 && elapsed_s(start) < 60.0,
           "ground-truth additivity is bitwise exact", detail);
}

// ---- criterion 2: exact KernelSHAP vs permutation oracle ------------------

AdditiveModel random_linear_model(int d, Rng& rng, std::vector<double>& coeffs) {
    AdditiveModel m;
    m.d = d;
    coeffs.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double a = rng.uniform(-3.0, 3.0);
        coeffs[static_cast<std::size_t>(i)] = a;
        m.effects.push_back(make_effect(apply(OpCode::Mul, constant(a), leaf(i))));
    }
    return m;
}

void criterion_shap_exact() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(2002);
    double max_oracle_gap = 0.0, max_cosine = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng.index(5));  // 2..6
        std::vector<double> coeffs;
        const AdditiveModel model = random_linear_model(d, rng, coeffs);
        const Dataset data = sample_dataset(d, rng.next_u64());
        const GroundTruthExplanation gt = explain_ground_truth(model, data);
        const BlackBox box = [&model](std::span<const double> x) {
            return eval_model(model, x);
        };
        // background = the dataset itself, so the marginal expectation equals
        // the empirical E[C_j] used by the correction
        const Matrix& bg = data.X;
        const std::vector<std::size_t> samples = sample_subset(data.n(), 3, rng.next_u64());

        Explanation expl;
        expl.kind = PayloadKind::ShapleyAttributions;
        for (int i = 0; i < d; ++i) expl.effects.push_back({i});
        expl.samples = samples;
        expl.payload = Matrix(static_cast<std::size_t>(d), samples.size());
        expl.intercepts.resize(samples.size());
        for (std::size_t t = 0; t < samples.size(); ++t) {
            const auto x = data.X.row(samples[t]);
            const ShapFit fit = kernelshap_fit(box, x, bg, rng.next_u64());
            const std::vector<double> oracle = shapley_permutation_oracle(box, x, bg);
            for (int i = 0; i < d; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                max_oracle_gap = std::max(max_oracle_gap,
                                          std::fabs(fit.phi[ui] - oracle[ui]));
                expl.payload.at(ui, t) = fit.phi[ui];
            }
            expl.intercepts[t] = fit.base;
        }

        const AdjustedExplanation adj = adjust_explanation(expl, data);
        const MatchResult match = match_effects(gt.effects, adj.effects);
        for (std::size_t t = 0; t < samples.size(); ++t) {
            const auto [v, vhat] = build_comparison_vectors(match, gt, adj, samples[t], t);
            max_cosine = std::max(max_cosine, cosine_distance(v, vhat));
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "max |phi - oracle| = %.3g, max corrected cosine = %.3g, %.1fs",
                  max_oracle_gap, max_cosine, elapsed_s(start));
    report(2, max_oracle_gap <= 1e-8 && max_cosine <= 1e-6 && elapsed_s(start) < 60.0,
           "exact Shapley recovery on linear models", detail);
}

// ---- criterion 3: LIME linear recovery ------------------------------------

void criterion_lime_linear() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(3003);
    double cosine_sum = 0.0;
    int count = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng.index(7));  // 2..8
        std::vector<double> coeffs;
        const AdditiveModel model = random_linear_model(d, rng, coeffs);
        const Dataset data = sample_dataset(d, rng.next_u64());
        const GroundTruthExplanation gt = explain_ground_truth(model, data);
        const BlackBox box = [&model](std::span<const double> x) {
            return eval_model(model, x);
        };
        LimeOptions opts;
        opts.ridge = 1e-6;
        opts.num_samples = 5000;
        const std::vector<std::size_t> samples = sample_subset(data.n(), 5, rng.next_u64());
        const Explanation expl = explain_lime(box, data, samples, rng.next_u64(), opts);
        const AdjustedExplanation adj = adjust_explanation(expl, data);
        const MatchResult match = match_effects(gt.effects, adj.effects);
        for (std::size_t t = 0; t < samples.size(); ++t) {
            const auto [v, vhat] = build_comparison_vectors(match, gt, adj, samples[t], t);
            cosine_sum += cosine_distance(v, vhat);
            ++count;
        }
    }
    const double mean_cosine = cosine_sum / count;
    char detail[96];
    std::snprintf(detail, sizeof detail, "mean cosine = %.3g over %d explanations, %.1fs",
                  mean_cosine, count, elapsed_s(start));
    report(3, mean_cosine <= 1e-3 && elapsed_s(start) < 120.0,
           "surrogate linear recovery after unnormalization", detail);
}

// ---- criterion 4: PDP main-effect recovery ---------------------------------

// Random main-effects-only nonlinear model over the operators that stay
// bounded on [-1, 1]. Pole operators (csc, cot) are excluded: their 1/x
// divergence inside the sampling domain is not representable by any
// fixed-resolution interpolated grid, so they would test the grid, not the
// recovery pipeline.
AdditiveModel random_smooth_model(int d, Rng& rng) {
    static const OpCode smooth[] = {
        OpCode::Cos,  OpCode::Cosh, OpCode::Sin,  OpCode::Sinh, OpCode::Asinh,
        OpCode::Tan,  OpCode::Tanh, OpCode::Atan, OpCode::Sech, OpCode::Sinc,
        OpCode::Abs,  OpCode::Square, OpCode::Cube, OpCode::Exp,
    };
    AdditiveModel m;
    m.d = d;
    for (int i = 0; i < d; ++i) {
        const OpCode op = smooth[rng.index(std::size(smooth))];
        const double a = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
        m.effects.push_back(
            make_effect(apply(OpCode::Mul, constant(a), apply(op, leaf(i)))));
    }
    return m;
}

void criterion_pdp_recovery() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(4004);
    double worst_nrmse = 0.0;
    int models = 0;
    while (models < 20) {
        const int d = 2 + static_cast<int>(rng.index(7));  // 2..8
        const AdditiveModel model = random_smooth_model(d, rng);
        const Dataset data = sample_dataset(d, rng.next_u64());
        const GroundTruthExplanation gt = explain_ground_truth(model, data);
        const BlackBox box = [&model](std::span<const double> x) {
            return eval_model(model, x);
        };
        const std::vector<std::size_t> samples =
            sample_subset(data.n(), 100, rng.next_u64());
        Explanation expl;
        try {
            expl = explain_pdp(box, data, samples);
        } catch (const DegeneratePD&) {
            continue;
        }
        const AdjustedExplanation adj = adjust_explanation(expl, data);
        const MatchResult match = match_effects(gt.effects, adj.effects);
        std::vector<double> outputs(samples.size());
        for (std::size_t t = 0; t < samples.size(); ++t)
            outputs[t] = eval_model(model, data.X.row(samples[t]));
        const EvaluationScores scores = evaluate_explanation({gt, adj, samples, outputs});
        if (std::isfinite(scores.mean_nrmse))
            worst_nrmse = std::max(worst_nrmse, scores.mean_nrmse);
        ++models;
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "worst per-model mean NRMSE = %.4f, %.1fs",
                  worst_nrmse, elapsed_s(start));
    report(4, worst_nrmse <= 0.05 && elapsed_s(start) < 120.0,
           "partial-dependence recovery of main effects", detail);
}

// ---- criterion 5: MatchEffects oracle --------------------------------------

using Sets = std::vector<std::vector<int>>;

bool sets_intersect(const std::vector<int>& a, const std::vector<int>& b) {
    for (int x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    return false;
}

using GroupKey = std::pair<std::vector<int>, std::vector<int>>;

std::vector<GroupKey> oracle_groups(const Sets& m, const Sets& e) {
    const int n = static_cast<int>(m.size() + e.size());
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
        return v;
    };
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t k = 0; k < e.size(); ++k)
            if (sets_intersect(m[i], e[k]))
                parent[static_cast<std::size_t>(find(static_cast<int>(i)))] =
                    find(static_cast<int>(m.size() + k));

    std::map<int, GroupKey> comps;
    for (std::size_t i = 0; i < m.size(); ++i)
        comps[find(static_cast<int>(i))].first.push_back(static_cast<int>(i));
    for (std::size_t k = 0; k < e.size(); ++k)
        comps[find(static_cast<int>(m.size() + k))].second.push_back(static_cast<int>(k));

    auto sorted = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    std::vector<GroupKey> out;
    for (auto& [root, comp] : comps) {
        auto& [mside, eside] = comp;
        bool all_exact = !mside.empty() && !eside.empty();
        for (int j : mside) {
            bool found = false;
            for (int k : eside)
                found = found || sorted(m[static_cast<std::size_t>(j)]) ==
                                     sorted(e[static_cast<std::size_t>(k)]);
            all_exact = all_exact && found;
        }
        for (int k : eside) {
            bool found = false;
            for (int j : mside)
                found = found || sorted(m[static_cast<std::size_t>(j)]) ==
                                     sorted(e[static_cast<std::size_t>(k)]);
            all_exact = all_exact && found;
        }
        if (all_exact) {
            std::map<std::vector<int>, GroupKey> by_set;
            for (int j : mside) by_set[sorted(m[static_cast<std::size_t>(j)])].first.push_back(j);
            for (int k : eside) by_set[sorted(e[static_cast<std::size_t>(k)])].second.push_back(k);
            for (auto& [set, g] : by_set) out.push_back(std::move(g));
        } else {
            out.push_back({std::move(mside), std::move(eside)});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double oracle_maiou(const MatchResult& r, const Sets& m, const Sets& e) {
    double total = 0.0;
    for (const MatchGroup& g : r.groups) {
        double sum = 0.0;
        int edges = 0;
        for (const auto& [mi, ei] : r.edges) {
            if (std::find(g.model_side.begin(), g.model_side.end(), mi) ==
                g.model_side.end())
                continue;
            if (std::find(g.explainer_side.begin(), g.explainer_side.end(), ei) ==
                g.explainer_side.end())
                continue;
            std::set<int> uni(m[static_cast<std::size_t>(mi)].begin(),
                              m[static_cast<std::size_t>(mi)].end());
            std::set<int> inter;
            for (int x : e[static_cast<std::size_t>(ei)]) {
                if (uni.count(x)) inter.insert(x);
                uni.insert(x);
            }
            sum += static_cast<double>(inter.size()) / static_cast<double>(uni.size());
            ++edges;
        }
        if (edges > 0) total += sum / edges;
    }
    return total / static_cast<double>(r.groups.size());
}

void criterion_match_oracle() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(5005);
    bool groups_ok = true, maiou_ok = true, exploit_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + static_cast<int>(rng.index(7));  // 2..8
        auto random_sets = [&](int count) {
            Sets s(static_cast<std::size_t>(count));
            for (auto& set : s) {
                const int size =
                    1 + static_cast<int>(rng.index(static_cast<std::size_t>(std::min(3, d))));
                std::set<int> feats;
                while (static_cast<int>(feats.size()) < size)
                    feats.insert(static_cast<int>(rng.index(static_cast<std::size_t>(d))));
                set.assign(feats.begin(), feats.end());
            }
            return s;
        };
        const Sets m = random_sets(1 + static_cast<int>(rng.index(6)));
        const Sets e = random_sets(1 + static_cast<int>(rng.index(6)));
        const MatchResult r = match_effects(m, e);

        std::vector<GroupKey> produced;
        for (const MatchGroup& g : r.groups) {
            GroupKey key{g.model_side, g.explainer_side};
            std::sort(key.first.begin(), key.first.end());
            std::sort(key.second.begin(), key.second.end());
            produced.push_back(std::move(key));
        }
        std::sort(produced.begin(), produced.end());
        if (produced != oracle_groups(m, e)) groups_ok = false;
        if (std::fabs(r.maiou - oracle_maiou(r, m, e)) > 1e-12) maiou_ok = false;
    }
    for (int d : {2, 4, 8}) {
        Sets model(static_cast<std::size_t>(d));
        std::vector<int> all(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            model[static_cast<std::size_t>(i)] = {i};
            all[static_cast<std::size_t>(i)] = i;
        }
        if (std::fabs(match_effects(model, {all}).maiou - 1.0 / d) > 1e-15)
            exploit_ok = false;
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "groups %s, maiou %s, exploit %s, %.1fs",
                  groups_ok ? "exact" : "MISMATCH", maiou_ok ? "exact" : "MISMATCH",
                  exploit_ok ? "1/d" : "WRONG", elapsed_s(start));
    report(5, groups_ok && maiou_ok && exploit_ok && elapsed_s(start) < 30.0,
           "effect-matching equals the brute-force oracle", detail);
}

// ---- criteria 6-8: reduced sweep, trend, ranking, determinism --------------

// Trend sweep over d x interaction order. Main effects are kept linear:
// nonlinear draws can hit pole operators (csc, cot) whose unbounded-variance
// contributions are uncorrelated with interaction order and swamp the trend
// signal at 10 models per cell. Interaction cells remain nonlinear through
// their mul/div bridges.
ExperimentConfig sweep_config() {
    ExperimentConfig cfg;
    cfg.d = {4, 16};
    cfg.n_dummy_frac = {0.0};
    cfg.pct_nonlinear = {0.0};
    cfg.pct_interact = {0.5};
    cfg.order_interact = {1, 2, 3};
    cfg.models_per_cell = 10;
    cfg.samples_per_model = 50;
    cfg.max_gen_rounds = 200;
    cfg.seed = 1;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criteria_sweep() {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = sweep_config();
    const fs::path base = fs::temp_directory_path() / "xfid_acceptance";
    fs::remove_all(base);
    const std::vector<MetricsRecord> records = run_sweep(cfg, base / "run1");

    // criterion 6: per explainer and d, mean cosine non-decreasing in order
    // and strictly larger at order 3 than at order 1
    std::map<std::pair<std::string, std::pair<int, int>>, std::pair<double, int>> cells;
    for (const MetricsRecord& r : records) {
        if (r.status != "ok") continue;
        auto& [sum, n] = cells[{r.explainer_id, {r.d, r.order_interact}}];
        sum += r.mean_cosine;
        ++n;
    }
    bool trend_ok = true;
    std::string trend_detail;
    for (const std::string& ex : cfg.explainers)
        for (int d : cfg.d) {
            double means[3];
            for (int o = 1; o <= 3; ++o) {
                const auto it = cells.find({ex, {d, o}});
                if (it == cells.end() || it->second.second == 0) {
                    trend_ok = false;
                    means[o - 1] = -1.0;
                    continue;
                }
                means[o - 1] = it->second.first / it->second.second;
            }
            const bool ok = means[0] <= means[1] + 1e-12 && means[1] <= means[2] + 1e-12 &&
                            means[2] > means[0];
            trend_ok = trend_ok && ok;
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s d=%d: %.3f/%.3f/%.3f%s ", ex.c_str(), d,
                          means[0], means[1], means[2], ok ? "" : " (!)");
            trend_detail += buf;
        }
    const double sweep_time = elapsed_s(start);
    report(6, trend_ok && sweep_time < 1800.0,
           "infidelity grows with interaction order", trend_detail);

    // criterion 7: KernelSHAP grand-mean cosine strictly lowest
    std::map<std::string, std::pair<double, int>> grand;
    for (const MetricsRecord& r : records) {
        if (r.status != "ok") continue;
        auto& [sum, n] = grand[r.explainer_id];
        sum += r.mean_cosine;
        ++n;
    }
    double shap_mean = 1e9, best_other = 1e9;
    std::string rank_detail;
    for (const auto& [ex, acc] : grand) {
        const double mean = acc.first / acc.second;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s=%.4f(n=%d) ", ex.c_str(), mean, acc.second);
        rank_detail += buf;
        if (ex == "shap")
            shap_mean = mean;
        else
            best_other = std::min(best_other, mean);
    }
    report(7, shap_mean < best_other, "Shapley explainer ranks most faithful",
           rank_detail);

    // criterion 8: same master seed, fresh directory, byte-identical CSV
    run_sweep(cfg, base / "run2");
    const std::string a = slurp(base / "run1" / "results.csv");
    const std::string b = slurp(base / "run2" / "results.csv");
    char det[96];
    std::snprintf(det, sizeof det, "%zu bytes, total sweep time %.0fs", a.size(),
                  elapsed_s(start));
    report(8, !a.empty() && a == b && elapsed_s(start) < 1800.0,
           "sweeps are byte-identical for a fixed seed", det);
    fs::remove_all(base);
}

// ---- criterion 9: metric oracles -------------------------------------------

void criterion_metric_oracles() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;

    // spearman against the closed form on every permutation of k <= 5
    for (int k = 2; k <= 5 && ok; ++k) {
        std::vector<double> u(static_cast<std::size_t>(k));
        std::iota(u.begin(), u.end(), 1.0);
        std::vector<double> w = u;
        do {
            double sumd2 = 0.0;
            for (int i = 0; i < k; ++i) {
                const double gap = u[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i)];
                sumd2 += gap * gap;
            }
            const double expected =
                1.0 - 6.0 * sumd2 / (k * (static_cast<double>(k) * k - 1));
            if (std::fabs(spearman_rho(u, w) - expected) > 1e-12) ok = false;
        } while (std::next_permutation(w.begin(), w.end()));
    }

    // distance example tables
    const std::vector<double> v{1.0, 2.0, -1.0};
    std::vector<double> neg = v;
    for (double& x : neg) x = -x;
    ok = ok && cosine_distance(v, v) < 1e-15;
    ok = ok && std::fabs(cosine_distance(v, neg) - 2.0) < 1e-15;
    ok = ok && cosine_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0;
    ok = ok && cosine_distance(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0;
    ok = ok && cosine_distance(std::vector<double>{0, 0}, v) == 1.0;
    ok = ok && euclidean_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == 5.0;
    ok = ok && std::fabs(euclidean_distance(std::vector<double>{1, 1},
                                            std::vector<double>{2, 2}) -
                         std::sqrt(2.0)) < 1e-15;

    const std::vector<double> a{0, 1, 2, 3, 4};
    std::vector<double> b = a;
    for (double& x : b) x += 2.0;
    ok = ok && std::fabs(nrmse(a, b) - 1.0) < 1e-15;
    ok = ok && nrmse(a, a) == 0.0;
    bool threw = false;
    try {
        nrmse(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 1, 1, 1});
    } catch (const DegenerateIQR&) {
        threw = true;
    }
    ok = ok && threw;

    char detail[64];
    std::snprintf(detail, sizeof detail, "%.2fs", elapsed_s(start));
    report(9, ok && elapsed_s(start) < 5.0, "metric example tables and rank oracle",
           detail);
}

}  // namespace

int main() {
    criterion_additivity();
    criterion_shap_exact();
    criterion_lime_linear();
    criterion_pdp_recovery();
    criterion_match_oracle();
    criteria_sweep();
    criterion_metric_oracles();
    std::printf("%s (%d criterion failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILED",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
