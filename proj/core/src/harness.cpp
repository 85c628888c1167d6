#include "xfid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "xfid/equivalence.hpp"
#include "xfid/errors.hpp"
#include "xfid/ground_truth.hpp"
#include "xfid/rng.hpp"

#include <nlohmann/json.hpp>

namespace xfid {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigInvalid("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigInvalid("cannot write file: " + p.string());
    out << content;
}

template <typename T>
void read_vec(const json& j, const char* key, std::vector<T>& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw ConfigInvalid(std::string("config: '") + key + "' must be an array");
    out = j[key].get<std::vector<T>>();
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("config JSON parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    read_vec(j, "d", cfg.d);
    read_vec(j, "n_dummy_frac", cfg.n_dummy_frac);
    read_vec(j, "pct_nonlinear", cfg.pct_nonlinear);
    read_vec(j, "pct_interact", cfg.pct_interact);
    read_vec(j, "order_interact", cfg.order_interact);
    read_vec(j, "explainers", cfg.explainers);
    if (j.contains("lime")) {
        cfg.lime.num_samples = j["lime"].value("num_samples", cfg.lime.num_samples);
        cfg.lime.ridge = j["lime"].value("ridge", cfg.lime.ridge);
        cfg.lime.kernel_width_factor =
            j["lime"].value("kernel_width_factor", cfg.lime.kernel_width_factor);
    }
    if (j.contains("shap")) {
        cfg.shap.exact_max_d = j["shap"].value("exact_max_d", cfg.shap.exact_max_d);
        cfg.shap.nsamples = j["shap"].value("nsamples", cfg.shap.nsamples);
        cfg.background_k = j["shap"].value("background_k", cfg.background_k);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
    cfg.models_per_cell = j.value("models_per_cell", cfg.models_per_cell);
    cfg.samples_per_model = j.value("samples_per_model", cfg.samples_per_model);
    cfg.max_gen_rounds = j.value("max_gen_rounds", cfg.max_gen_rounds);
    for (const std::string& e : cfg.explainers)
        if (e != "pdp" && e != "lime" && e != "shap")
            throw ConfigInvalid("config: unknown explainer '" + e + "'");
    if (cfg.models_per_cell < 0 || cfg.samples_per_model < 1)
        throw ConfigInvalid("config: models_per_cell/samples_per_model out of range");
    for (int dv : cfg.d)
        if (dv < 1) throw ConfigInvalid("config: d values must be >= 1");
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["d"] = cfg.d;
    j["n_dummy_frac"] = cfg.n_dummy_frac;
    j["pct_nonlinear"] = cfg.pct_nonlinear;
    j["pct_interact"] = cfg.pct_interact;
    j["order_interact"] = cfg.order_interact;
    j["explainers"] = cfg.explainers;
    j["lime"] = {{"num_samples", cfg.lime.num_samples},
                 {"ridge", cfg.lime.ridge},
                 {"kernel_width_factor", cfg.lime.kernel_width_factor}};
    j["shap"] = {{"exact_max_d", cfg.shap.exact_max_d},
                 {"nsamples", cfg.shap.nsamples},
                 {"background_k", cfg.background_k}};
    j["seed"] = cfg.seed;
    j["timeout_s"] = cfg.timeout_s;
    j["models_per_cell"] = cfg.models_per_cell;
    j["samples_per_model"] = cfg.samples_per_model;
    j["max_gen_rounds"] = cfg.max_gen_rounds;
    return j.dump(2) + "\n";
}

std::vector<GenParams> config_grid(const ExperimentConfig& cfg) {
    // pct_interact/order coupling: order 1 and pct 0 imply each other.
    std::vector<std::pair<double, int>> interactions;
    for (double pi : cfg.pct_interact)
        for (int oi : cfg.order_interact) {
            std::pair<double, int> row =
                (pi == 0.0 || oi == 1) ? std::pair<double, int>{0.0, 1}
                                       : std::pair<double, int>{pi, oi};
            if (std::find(interactions.begin(), interactions.end(), row) ==
                interactions.end())
                interactions.push_back(row);
        }

    std::vector<GenParams> grid;
    for (int d : cfg.d)
        for (double df : cfg.n_dummy_frac)
            for (double nl : cfg.pct_nonlinear)
                for (const auto& [pi, oi] : interactions) {
                    GenParams g;
                    g.d = d;
                    g.n_dummy = static_cast<int>(std::floor(df * d));
                    g.pct_nonlinear = nl;
                    g.pct_interact = pi;
                    g.order_interact = oi;
                    grid.push_back(g);
                }
    return grid;
}

std::uint64_t model_task_seed(std::uint64_t master, const GenParams& cell,
                              int model_index) {
    return seed_combine(seed_combine(master, fnv1a(param_tag(cell))),
                        static_cast<std::uint64_t>(model_index));
}

std::uint64_t explainer_task_seed(std::uint64_t master, const GenParams& cell,
                                  int model_index, const std::string& explainer) {
    return seed_combine(model_task_seed(master, cell, model_index), fnv1a(explainer));
}

std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
    k = std::min(k, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

// Streams derived from the model task seed.
enum ModelStream : std::uint64_t { kDataStream = 1, kGenStream = 2, kSubsetStream = 3,
                                   kBackgroundStream = 4 };

struct TaskContext {
    const ExperimentConfig& cfg;
    const AdditiveModel& model;
    const Dataset& data;
    const GroundTruthExplanation& gt;
    const std::vector<std::size_t>& subset;
    const Matrix& background;
};

Explanation run_explainer_with_deadline(const TaskContext& ctx,
                                        const std::string& explainer,
                                        std::uint64_t seed, Clock::time_point deadline) {
    const BlackBox box = [&model = ctx.model](std::span<const double> x) {
        return eval_model(model, x);
    };
    auto check = [&] {
        if (Clock::now() >= deadline) throw std::runtime_error("__timeout__");
    };
    check();
    if (explainer == "pdp") {
        Explanation e = explain_pdp(box, ctx.data, ctx.subset);
        check();
        return e;
    }
    // lime/shap explain sample-by-sample so the deadline is honored between
    // samples.
    Explanation merged;
    for (std::size_t t = 0; t < ctx.subset.size(); ++t) {
        check();
        const std::span<const std::size_t> one(&ctx.subset[t], 1);
        Explanation part =
            explainer == "lime"
                ? explain_lime(box, ctx.data, one, seed, ctx.cfg.lime)
                : explain_kernelshap(box, ctx.data, one, ctx.background, seed,
                                     ctx.cfg.shap);
        if (t == 0) {
            merged = part;
            merged.payload = Matrix(part.effects.size(), ctx.subset.size());
            merged.intercepts.assign(ctx.subset.size(), 0.0);
            merged.samples.assign(ctx.subset.begin(), ctx.subset.end());
            merged.dropped_evals = 0;
            merged.coalitions = 0;
        }
        for (std::size_t k = 0; k < part.effects.size(); ++k)
            merged.payload.at(k, t) = part.payload.at(k, 0);
        merged.intercepts[t] = part.intercepts[0];
        merged.dropped_evals += part.dropped_evals;
        merged.coalitions += part.coalitions;
    }
    return merged;
}

MetricsRecord score_task(const TaskContext& ctx, const GenParams& cell,
                         const std::string& model_id, const std::string& explainer,
                         std::uint64_t seed, const fs::path& model_dir, long& wall_ms) {
    MetricsRecord rec;
    rec.model_id = model_id;
    rec.explainer_id = explainer;
    rec.d = cell.d;
    rec.n_dummy = cell.n_dummy;
    rec.pct_nonlinear = cell.pct_nonlinear;
    rec.pct_interact = cell.pct_interact;
    rec.order_interact = cell.order_interact;

    const auto start = Clock::now();
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(ctx.cfg.timeout_s));
    try {
        const Explanation expl = run_explainer_with_deadline(ctx, explainer, seed, deadline);
        const AdjustedExplanation adj = adjust_explanation(expl, ctx.data);
        std::vector<double> outputs(ctx.subset.size());
        for (std::size_t t = 0; t < ctx.subset.size(); ++t)
            outputs[t] = eval_model(ctx.model, ctx.data.X.row(ctx.subset[t]));
        const EvaluationScores scores =
            evaluate_explanation({ctx.gt, adj, ctx.subset, outputs});
        rec.maiou = scores.maiou;
        rec.mean_cosine = scores.mean_cosine;
        rec.mean_euclidean = scores.mean_euclidean;
        rec.mean_nrmse = scores.mean_nrmse;
        rec.explainer_rmse = scores.explainer_rmse;
        rec.dropped_evals = expl.dropped_evals;
        write_file(model_dir / (explainer + ".expl.json"), explanation_to_json(expl));
        write_file(model_dir / (explainer + ".match.json"), match_to_json(scores.match));
    } catch (const std::runtime_error& e) {
        rec.status = std::string(e.what()) == "__timeout__" ? "timeout" : "explain_failed";
    }
    wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
                  .count();
    return rec;
}

json record_to_json(const MetricsRecord& r) {
    json j;
    j["model_id"] = r.model_id;
    j["explainer"] = r.explainer_id;
    j["d"] = r.d;
    j["n_dummy"] = r.n_dummy;
    j["pct_nonlinear"] = r.pct_nonlinear;
    j["pct_interact"] = r.pct_interact;
    j["order_interact"] = r.order_interact;
    j["maiou"] = r.maiou;
    j["mean_cosine"] = r.mean_cosine;
    j["mean_euclidean"] = r.mean_euclidean;
    j["mean_nrmse"] = r.mean_nrmse;
    j["explainer_rmse"] = r.explainer_rmse;
    j["dropped_evals"] = r.dropped_evals;
    j["status"] = r.status;
    return j;
}

MetricsRecord record_from_json(const json& j) {
    MetricsRecord r;
    r.model_id = j.at("model_id").get<std::string>();
    r.explainer_id = j.at("explainer").get<std::string>();
    r.d = j.at("d").get<int>();
    r.n_dummy = j.at("n_dummy").get<int>();
    r.pct_nonlinear = j.at("pct_nonlinear").get<double>();
    r.pct_interact = j.at("pct_interact").get<double>();
    r.order_interact = j.at("order_interact").get<int>();
    r.maiou = j.at("maiou").get<double>();
    r.mean_cosine = j.at("mean_cosine").get<double>();
    r.mean_euclidean = j.at("mean_euclidean").get<double>();
    r.mean_nrmse = j.at("mean_nrmse").get<double>();
    r.explainer_rmse = j.at("explainer_rmse").get<double>();
    r.dropped_evals = j.at("dropped_evals").get<long>();
    r.status = j.at("status").get<std::string>();
    return r;
}

std::string checksum_of(const fs::path& p) {
    return std::to_string(fnv1a(read_file(p)));
}

// True if a previous run left a checksum-valid row for this task.
bool try_resume(const fs::path& model_dir, const std::string& explainer,
                MetricsRecord& rec) {
    const fs::path row_path = model_dir / (explainer + ".row.json");
    if (!fs::exists(row_path)) return false;
    try {
        const json j = json::parse(read_file(row_path));
        MetricsRecord r = record_from_json(j.at("record"));
        if (r.status == "ok") {
            for (const auto& [name, sum] : j.at("checksums").items()) {
                const fs::path artifact = model_dir / name;
                if (!fs::exists(artifact) || checksum_of(artifact) != sum.get<std::string>())
                    return false;
            }
        }
        rec = std::move(r);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

void persist_row(const fs::path& model_dir, const std::string& explainer,
                 const MetricsRecord& rec) {
    json j;
    j["record"] = record_to_json(rec);
    json sums = json::object();
    if (rec.status == "ok") {
        for (const std::string suffix : {".expl.json", ".match.json"}) {
            const std::string name = explainer + suffix;
            sums[name] = checksum_of(model_dir / name);
        }
    }
    j["checksums"] = std::move(sums);
    write_file(model_dir / (explainer + ".row.json"), j.dump());
}

struct ModelUnit {
    GenParams cell;
    int model_index;
    std::string model_id;
    fs::path dir;
};

// Records + timings for one (cell, model) unit, all explainers.
void run_model_unit(const ExperimentConfig& cfg, const ModelUnit& unit,
                    std::vector<MetricsRecord>& records,
                    std::vector<std::pair<std::string, long>>& timings) {
    fs::create_directories(unit.dir);
    const std::uint64_t mseed = model_task_seed(cfg.seed, unit.cell, unit.model_index);

    auto fail_all = [&](const std::string& status) {
        for (const std::string& explainer : cfg.explainers) {
            MetricsRecord rec;
            rec.model_id = unit.model_id;
            rec.explainer_id = explainer;
            rec.d = unit.cell.d;
            rec.n_dummy = unit.cell.n_dummy;
            rec.pct_nonlinear = unit.cell.pct_nonlinear;
            rec.pct_interact = unit.cell.pct_interact;
            rec.order_interact = unit.cell.order_interact;
            rec.status = status;
            records.push_back(std::move(rec));
            timings.emplace_back(unit.model_id + "," + explainer, 0);
        }
    };

    Dataset data = sample_dataset(unit.cell.d, seed_combine(mseed, kDataStream));
    AdditiveModel model;
    try {
        GenParams params = unit.cell;
        params.seed = seed_combine(mseed, kGenStream);
        model = generate_model_validated(params, data.X, cfg.max_gen_rounds);
    } catch (const GenerationFailed&) {
        fail_all("generation_failed");
        return;
    }

    const fs::path model_path = unit.dir / "model.json";
    if (!fs::exists(model_path)) write_file(model_path, model_to_json(model));
    const fs::path data_path = unit.dir / "data.csv";
    if (!fs::exists(data_path)) write_file(data_path, matrix_to_csv(data.X));

    const GroundTruthExplanation gt = explain_ground_truth(model, data);
    if (!fs::exists(unit.dir / "gt.json"))
        write_file(unit.dir / "gt.json", ground_truth_to_json(gt));

    const std::vector<std::size_t> subset =
        sample_subset(data.n(), static_cast<std::size_t>(cfg.samples_per_model),
                      seed_combine(mseed, kSubsetStream));
    Matrix background;
    const bool wants_shap = std::find(cfg.explainers.begin(), cfg.explainers.end(),
                                      "shap") != cfg.explainers.end();
    if (wants_shap) {
        const int k = std::min<int>(cfg.background_k, static_cast<int>(data.n()));
        background = summarize_background(data.X, k, seed_combine(mseed, kBackgroundStream));
    }

    const TaskContext ctx{cfg, model, data, gt, subset, background};
    for (const std::string& explainer : cfg.explainers) {
        MetricsRecord rec;
        long wall_ms = 0;
        if (!try_resume(unit.dir, explainer, rec)) {
            rec = score_task(ctx, unit.cell, unit.model_id, explainer,
                             explainer_task_seed(cfg.seed, unit.cell, unit.model_index,
                                                 explainer),
                             unit.dir, wall_ms);
            persist_row(unit.dir, explainer, rec);
        }
        records.push_back(std::move(rec));
        timings.emplace_back(unit.model_id + "," + explainer, wall_ms);
    }
}

}  // namespace

std::vector<MetricsRecord> run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir,
                                     int jobs) {
    fs::create_directories(out_dir);
    std::vector<ModelUnit> units;
    for (const GenParams& cell : config_grid(cfg)) {
        const std::string tag = param_tag(cell);
        for (int mi = 0; mi < cfg.models_per_cell; ++mi) {
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, "m%03d", mi);
            ModelUnit u;
            u.cell = cell;
            u.model_index = mi;
            u.model_id = tag + "-" + suffix;
            u.dir = out_dir / tag / suffix;
            units.push_back(std::move(u));
        }
    }

    std::vector<MetricsRecord> records;
    std::vector<std::pair<std::string, long>> timings;
    std::mutex mtx;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= units.size()) break;
            std::vector<MetricsRecord> local_records;
            std::vector<std::pair<std::string, long>> local_timings;
            run_model_unit(cfg, units[i], local_records, local_timings);
            std::lock_guard<std::mutex> lock(mtx);
            for (auto& r : local_records) records.push_back(std::move(r));
            for (auto& t : local_timings) timings.push_back(std::move(t));
        }
    };
    const int nthreads = std::max(1, jobs);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Deterministic row order: sorted by task key, not arrival.
    std::sort(records.begin(), records.end(),
              [](const MetricsRecord& a, const MetricsRecord& b) {
                  return std::tie(a.model_id, a.explainer_id) <
                         std::tie(b.model_id, b.explainer_id);
              });
    std::sort(timings.begin(), timings.end());

    std::string csv = metrics_csv_header();
    for (const MetricsRecord& r : records) csv += metrics_record_to_csv(r);
    write_file(out_dir / "results.csv", csv);

    // Wall times are inherently non-reproducible, so they live in a sidecar;
    // the results.csv wall_ms column stays 0 to keep the file byte-stable
    // across reruns with the same seed.
    std::string tcsv = "model_id,explainer,wall_ms\n";
    for (const auto& [key, ms] : timings) tcsv += key + "," + std::to_string(ms) + "\n";
    write_file(out_dir / "timings.csv", tcsv);
    return records;
}

MetricsRecord run_single(const fs::path& model_path,
                         const std::optional<fs::path>& dataset_path,
                         const std::string& explainer, std::uint64_t seed,
                         const fs::path& out_dir, const ExperimentConfig& cfg) {
    if (explainer != "pdp" && explainer != "lime" && explainer != "shap")
        throw ConfigInvalid("unknown explainer '" + explainer + "'");
    const AdditiveModel model = model_from_json(read_file(model_path));
    Dataset data;
    if (dataset_path) {
        data.X = matrix_from_csv(read_file(*dataset_path));
        if (static_cast<int>(data.X.cols()) != model.d)
            throw ConfigInvalid("dataset column count does not match model 'd'");
        data.stats = compute_stats(data.X);
    } else {
        data = sample_dataset(model.d, seed_combine(seed, kDataStream));
    }
    if (!validate_domain(model, data.X))
        throw ConfigInvalid("model is non-finite on the provided dataset");

    fs::create_directories(out_dir);
    const GroundTruthExplanation gt = explain_ground_truth(model, data);
    const std::vector<std::size_t> subset =
        sample_subset(data.n(), static_cast<std::size_t>(cfg.samples_per_model),
                      seed_combine(seed, kSubsetStream));
    Matrix background;
    if (explainer == "shap") {
        const int k = std::min<int>(cfg.background_k, static_cast<int>(data.n()));
        background = summarize_background(data.X, k, seed_combine(seed, kBackgroundStream));
    }

    GenParams cell;  // grid metadata unknown for ad-hoc models
    cell.d = model.d;
    cell.n_dummy = static_cast<int>(model.dummy_features.size());
    const TaskContext ctx{cfg, model, data, gt, subset, background};
    long wall_ms = 0;
    MetricsRecord rec = score_task(ctx, cell, model_path.stem().string(), explainer, seed,
                                   out_dir, wall_ms);
    write_file(out_dir / "gt.json", ground_truth_to_json(gt));
    std::string csv = metrics_csv_header() + metrics_record_to_csv(rec);
    write_file(out_dir / (explainer + ".metrics.csv"), csv);
    return rec;
}

}  // namespace xfid
