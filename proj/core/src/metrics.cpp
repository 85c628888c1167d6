#include "xfid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>
#include <map>
#include <numeric>
#include <sstream>

#include "xfid/dataset.hpp"
#include "xfid/errors.hpp"

namespace xfid {

std::pair<std::vector<double>, std::vector<double>> build_comparison_vectors(
    const MatchResult& match, const GroundTruthExplanation& gt,
    const AdjustedExplanation& adjusted, std::size_t sample_index,
    std::size_t explained_column) {
    const std::size_t g = match.groups.size();
    std::vector<double> v(g, 0.0);
    std::vector<double> raw(g, 0.0);
    for (std::size_t c = 0; c < g; ++c) {
        for (int j : match.groups[c].model_side)
            v[c] += gt.contributions.at(static_cast<std::size_t>(j), sample_index);
        for (int k : match.groups[c].explainer_side)
            raw[c] += adjusted.contributions.at(static_cast<std::size_t>(k), explained_column);
    }
    if (adjusted.add_expectation) raw = shap_add_expectation(raw, match, gt);
    return {std::move(v), std::move(raw)};
}

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// sqrt(sum of squared differences), rescaled to survive entries near the
// double overflow threshold (valid model values can reach ~1e304).
double scaled_diff_norm(std::span<const double> v, std::span<const double> vhat) {
    double ss = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - vhat[i];
        ss += d * d;
    }
    if (std::isfinite(ss)) return std::sqrt(ss);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s = std::max(s, std::fabs(v[i] - vhat[i]));
    if (!std::isfinite(s)) return s;
    double scaled = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = (v[i] - vhat[i]) / s;
        scaled += d * d;
    }
    return std::sqrt(scaled) * s;
}

}  // namespace

double cosine_distance(std::span<const double> v, std::span<const double> vhat) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        dot += v[i] * vhat[i];
        na += v[i] * v[i];
        nb += vhat[i] * vhat[i];
    }
    if (!std::isfinite(dot) || !std::isfinite(na) || !std::isfinite(nb)) {
        // rescale by the per-vector max magnitude; cosine is scale-invariant,
        // so this is exact and only the overflow artifact changes
        const double sa = max_abs(v);
        const double sb = max_abs(vhat);
        if (std::isfinite(sa) && std::isfinite(sb) && sa > 0.0 && sb > 0.0) {
            dot = na = nb = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double a = v[i] / sa;
                const double b = vhat[i] / sb;
                dot += a * b;
                na += a * a;
                nb += b * b;
            }
        }
    }
    const bool az = na == 0.0;
    const bool bz = nb == 0.0;
    if (az && bz) return 0.0;
    if (az || bz) return 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

double euclidean_distance(std::span<const double> v, std::span<const double> vhat) {
    return scaled_diff_norm(v, vhat);
}

double nrmse(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    std::vector<double> sorted(a.begin(), a.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    if (!(q3 > q1)) throw DegenerateIQR("nrmse: Q3(a) == Q1(a)");
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    const double rms = std::isfinite(ss)
                           ? std::sqrt(ss / static_cast<double>(n))
                           : scaled_diff_norm(a, b) / std::sqrt(static_cast<double>(n));
    return rms / (q3 - q1);
}

namespace {

std::vector<double> ranks_with_ties(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rho(std::span<const double> u, std::span<const double> w) {
    const std::size_t n = u.size();
    if (n < 2) throw ConfigInvalid("spearman_rho: need at least two points");
    const std::vector<double> ru = ranks_with_ties(u);
    const std::vector<double> rw = ranks_with_ties(w);
    double mu = 0.0, mw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mu += ru[i];
        mw += rw[i];
    }
    mu /= static_cast<double>(n);
    mw /= static_cast<double>(n);
    double cov = 0.0, vu = 0.0, vw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (ru[i] - mu) * (rw[i] - mw);
        vu += (ru[i] - mu) * (ru[i] - mu);
        vw += (rw[i] - mw) * (rw[i] - mw);
    }
    if (vu == 0.0 || vw == 0.0) throw ZeroVariance("spearman_rho: constant rank vector");
    return cov / std::sqrt(vu * vw);
}

EvaluationScores evaluate_explanation(const EvaluationInput& in) {
    EvaluationScores out;
    out.match = match_effects(in.gt.effects, in.adjusted.effects);
    out.maiou = out.match.maiou;

    const std::size_t nexp = in.samples.size();
    const std::size_t g = out.match.groups.size();
    Matrix v_series(g, nexp);
    Matrix vhat_series(g, nexp);
    double cos_sum = 0.0, euc_sum = 0.0, pred_ss = 0.0;
    std::vector<double> pred_err(nexp, 0.0);
    for (std::size_t t = 0; t < nexp; ++t) {
        auto [v, vhat] =
            build_comparison_vectors(out.match, in.gt, in.adjusted, in.samples[t], t);
        cos_sum += cosine_distance(v, vhat);
        euc_sum += euclidean_distance(v, vhat);
        double pred = 0.0;
        for (std::size_t c = 0; c < g; ++c) {
            v_series.at(c, t) = v[c];
            vhat_series.at(c, t) = vhat[c];
            pred += vhat[c];
        }
        if (!in.adjusted.add_expectation && !in.adjusted.intercepts.empty())
            pred += in.adjusted.intercepts[t];
        const double err = pred - in.model_outputs[t];
        pred_err[t] = err;
        pred_ss += err * err;
    }
    out.mean_cosine = cos_sum / static_cast<double>(nexp);
    out.mean_euclidean = euc_sum / static_cast<double>(nexp);
    out.explainer_rmse =
        std::isfinite(pred_ss)
            ? std::sqrt(pred_ss / static_cast<double>(nexp))
            : scaled_diff_norm(pred_err, std::vector<double>(nexp, 0.0)) /
                  std::sqrt(static_cast<double>(nexp));

    double nrmse_sum = 0.0;
    std::size_t nrmse_count = 0;
    for (std::size_t c = 0; c < g; ++c) {
        try {
            nrmse_sum += nrmse(v_series.row(c), vhat_series.row(c));
            ++nrmse_count;
        } catch (const DegenerateIQR&) {
            // constant ground-truth group over the explained samples; skipped
        }
    }
    out.mean_nrmse = nrmse_count > 0
                         ? nrmse_sum / static_cast<double>(nrmse_count)
                         : std::numeric_limits<double>::quiet_NaN();
    return out;
}

namespace {

std::string cell_of(const MetricsRecord& r) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "d%d_nd%d_nl%g_pi%g_oi%d", r.d, r.n_dummy,
                  r.pct_nonlinear, r.pct_interact, r.order_interact);
    return buf;
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records) {
    std::map<std::pair<std::string, std::string>, SummaryRow> rows;
    for (const MetricsRecord& r : records) {
        SummaryRow& row = rows[{cell_of(r), r.explainer_id}];
        row.cell = cell_of(r);
        row.explainer_id = r.explainer_id;
        if (r.status != "ok") {
            ++row.failures;
            continue;
        }
        ++row.records;
        row.mean_maiou += r.maiou;
        row.mean_cosine += r.mean_cosine;
        row.mean_euclidean += r.mean_euclidean;
        if (std::isfinite(r.mean_nrmse)) row.mean_nrmse += r.mean_nrmse;
        row.mean_explainer_rmse += r.explainer_rmse;
    }
    for (auto& [key, row] : rows) {
        if (row.records == 0) continue;
        const double n = row.records;
        row.mean_maiou /= n;
        row.mean_cosine /= n;
        row.mean_euclidean /= n;
        row.mean_nrmse /= n;
        row.mean_explainer_rmse /= n;
    }

    // rho_perf across explainers within each cell: fidelity (mean cosine
    // similarity) against accuracy (negative explainer-as-predictor RMSE).
    std::map<std::string, std::vector<const SummaryRow*>> by_cell;
    for (auto& [key, row] : rows) by_cell[row.cell].push_back(&row);
    std::vector<SummaryRow> out;
    for (auto& [cell, cell_rows] : by_cell) {
        std::vector<double> fidelity, accuracy;
        for (const SummaryRow* r : cell_rows)
            if (r->records > 0) {
                fidelity.push_back(1.0 - r->mean_cosine);
                accuracy.push_back(-r->mean_explainer_rmse);
            }
        std::optional<double> rho;
        if (fidelity.size() >= 2) {
            try {
                rho = spearman_rho(fidelity, accuracy);
            } catch (const ZeroVariance&) {
            }
        }
        for (const SummaryRow* r : cell_rows) {
            SummaryRow copy = *r;
            copy.rho_perf = rho;
            out.push_back(std::move(copy));
        }
    }
    std::sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
        return std::tie(a.cell, a.explainer_id) < std::tie(b.cell, b.explainer_id);
    });
    return out;
}

std::string metrics_csv_header() {
    return "model_id,explainer,d,n_dummy,pct_nonlinear,pct_interact,order_interact,"
           "maiou,mean_cosine,mean_euclidean,mean_nrmse,explainer_rmse,dropped_evals,"
           "wall_ms,status\n";
}

std::string metrics_record_to_csv(const MetricsRecord& r) {
    std::ostringstream out;
    out << r.model_id << ',' << r.explainer_id << ',' << r.d << ',' << r.n_dummy << ','
        << format_double(r.pct_nonlinear) << ',' << format_double(r.pct_interact) << ','
        << r.order_interact << ',' << format_double(r.maiou) << ','
        << format_double(r.mean_cosine) << ',' << format_double(r.mean_euclidean) << ','
        << format_double(r.mean_nrmse) << ',' << format_double(r.explainer_rmse) << ','
        << r.dropped_evals << ',' << r.wall_ms << ',' << r.status << '\n';
    return out.str();
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string out =
        "cell,explainer,records,failures,mean_maiou,mean_cosine,mean_euclidean,"
        "mean_nrmse,mean_explainer_rmse,rho_perf\n";
    for (const SummaryRow& r : rows) {
        std::ostringstream line;
        line << r.cell << ',' << r.explainer_id << ',' << r.records << ',' << r.failures
             << ',' << format_double(r.mean_maiou) << ',' << format_double(r.mean_cosine)
             << ',' << format_double(r.mean_euclidean) << ','
             << format_double(r.mean_nrmse) << ','
             << format_double(r.mean_explainer_rmse) << ','
             << (r.rho_perf ? format_double(*r.rho_perf) : std::string()) << '\n';
        out += line.str();
    }
    return out;
}

}  // namespace xfid
