// Command-line front end: model generation, single explanations, sweep
// orchestration, and results aggregation over the xfid core library.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xfid/dataset.hpp"
#include "xfid/errors.hpp"
#include "xfid/expr.hpp"
#include "xfid/ground_truth.hpp"
#include "xfid/harness.hpp"
#include "xfid/metrics.hpp"
#include "xfid/model_gen.hpp"
#include "xfid/rng.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw xfid::ConfigInvalid("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw xfid::ConfigInvalid("cannot write file: " + p.string());
    out << content;
}

xfid::ExperimentConfig load_config(const std::string& path) {
    return xfid::config_from_json(slurp(path));
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
    const xfid::ExperimentConfig cfg = load_config(config_path);
    fs::create_directories(out_dir);
    int written = 0, failed = 0;
    for (const xfid::GenParams& cell : xfid::config_grid(cfg)) {
        for (int mi = 0; mi < cfg.models_per_cell; ++mi) {
            xfid::GenParams params = cell;
            params.seed = xfid::seed_combine(
                xfid::model_task_seed(cfg.seed, cell, mi), 2 /* generation stream */);
            char name[128];
            std::snprintf(name, sizeof name, "%s-m%03d.json",
                          xfid::param_tag(cell).c_str(), mi);
            try {
                const xfid::AdditiveModel model =
                    xfid::generate_model(params, cfg.max_gen_rounds);
                spill(fs::path(out_dir) / name, xfid::model_to_json(model));
                ++written;
            } catch (const xfid::GenerationFailed&) {
                ++failed;
                std::cerr << "generation failed: " << name << '\n';
            }
        }
    }
    std::cout << "wrote " << written << " model(s) to " << out_dir;
    if (failed > 0) std::cout << " (" << failed << " cell(s) failed)";
    std::cout << '\n';
    return failed == 0 ? 0 : 1;
}

int cmd_explain(const std::string& model_path, const std::string& data_path,
                const std::string& explainer, std::uint64_t seed, bool exact_shap,
                const std::string& out_dir, double timeout_s, int samples) {
    xfid::ExperimentConfig cfg;
    cfg.timeout_s = timeout_s;
    cfg.samples_per_model = samples;
    cfg.shap.force_exact = exact_shap;
    std::optional<fs::path> data;
    if (!data_path.empty()) data = data_path;
    const xfid::MetricsRecord rec =
        xfid::run_single(model_path, data, explainer, seed, out_dir, cfg);
    std::cout << xfid::metrics_csv_header() << xfid::metrics_record_to_csv(rec);
    return rec.status == "ok" ? 0 : 1;
}

int cmd_eval(const std::string& model_path, const std::string& expl_path,
             const std::string& data_path, std::uint64_t seed) {
    const xfid::AdditiveModel model = xfid::model_from_json(slurp(model_path));
    xfid::Dataset data;
    if (!data_path.empty()) {
        data.X = xfid::matrix_from_csv(slurp(data_path));
        if (static_cast<int>(data.X.cols()) != model.d)
            throw xfid::ConfigInvalid("dataset column count does not match model 'd'");
        data.stats = xfid::compute_stats(data.X);
    } else {
        data = xfid::sample_dataset(model.d, seed);
    }
    const xfid::Explanation expl = xfid::explanation_from_json(slurp(expl_path));
    for (std::size_t s : expl.samples)
        if (s >= data.n())
            throw xfid::ConfigInvalid("explanation references a row outside the dataset");
    const xfid::GroundTruthExplanation gt = xfid::explain_ground_truth(model, data);
    const xfid::AdjustedExplanation adj = xfid::adjust_explanation(expl, data);
    std::vector<double> outputs(expl.samples.size());
    for (std::size_t t = 0; t < expl.samples.size(); ++t)
        outputs[t] = xfid::eval_model(model, data.X.row(expl.samples[t]));
    const xfid::EvaluationScores scores =
        xfid::evaluate_explanation({gt, adj, expl.samples, outputs});
    xfid::MetricsRecord rec;
    rec.model_id = fs::path(model_path).stem().string();
    rec.explainer_id = xfid::payload_kind_name(expl.kind);
    rec.d = model.d;
    rec.n_dummy = static_cast<int>(model.dummy_features.size());
    rec.maiou = scores.maiou;
    rec.mean_cosine = scores.mean_cosine;
    rec.mean_euclidean = scores.mean_euclidean;
    rec.mean_nrmse = scores.mean_nrmse;
    rec.explainer_rmse = scores.explainer_rmse;
    rec.dropped_evals = expl.dropped_evals;
    std::cout << xfid::metrics_csv_header() << xfid::metrics_record_to_csv(rec);
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs) {
    const xfid::ExperimentConfig cfg = load_config(config_path);
    const auto records = xfid::run_sweep(cfg, out_dir, jobs);
    int ok = 0;
    for (const auto& r : records) ok += r.status == "ok" ? 1 : 0;
    std::cout << records.size() << " task(s), " << ok << " ok; results at "
              << (fs::path(out_dir) / "results.csv").string() << '\n';
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_csv) {
    const fs::path results = fs::path(in_dir) / "results.csv";
    std::istringstream in(slurp(results));
    std::string line;
    std::getline(in, line);  // header
    if (line.empty() || line != xfid::metrics_csv_header().substr(0, line.size()))
        throw xfid::ConfigInvalid("unrecognized results.csv header in " + in_dir);
    std::vector<xfid::MetricsRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        xfid::MetricsRecord r;
        std::string field;
        auto next = [&] {
            if (!std::getline(row, field, ','))
                throw xfid::ConfigInvalid("short row in results.csv: " + line);
            return field;
        };
        r.model_id = next();
        r.explainer_id = next();
        r.d = std::stoi(next());
        r.n_dummy = std::stoi(next());
        r.pct_nonlinear = std::stod(next());
        r.pct_interact = std::stod(next());
        r.order_interact = std::stoi(next());
        r.maiou = std::stod(next());
        r.mean_cosine = std::stod(next());
        r.mean_euclidean = std::stod(next());
        r.mean_nrmse = std::stod(next());
        r.explainer_rmse = std::stod(next());
        r.dropped_evals = std::stol(next());
        r.wall_ms = std::stol(next());
        r.status = next();
        records.push_back(std::move(r));
    }
    spill(out_csv, xfid::summary_to_csv(xfid::aggregate(records)));
    std::cout << "wrote summary for " << records.size() << " row(s) to " << out_csv
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground-truth fidelity testbed for feature-additive explainers"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", model_path, data_path, expl_path;
    std::string explainer = "shap", in_dir, out_csv = "summary.csv";
    std::uint64_t seed = 0;
    bool exact_shap = false, show_defaults = false;
    int jobs = 1, samples = 100;
    double timeout_s = 120.0;

    auto* gen = app.add_subcommand("gen", "Generate one model JSON per grid point");
    gen->add_option("--config", config_path, "Experiment config JSON")->required();
    gen->add_option("--out", out_dir, "Output directory")->required();

    auto* explain = app.add_subcommand("explain", "Explain a model with one explainer");
    explain->add_option("--model", model_path, "Model JSON path")->required();
    explain->add_option("--explainer", explainer, "pdp|lime|shap")->required();
    explain->add_option("--seed", seed, "Master seed");
    explain->add_flag("--exact-shap", exact_shap, "Force exact coalition enumeration");
    explain->add_option("--data", data_path, "Dataset CSV (sampled fresh when omitted)");
    explain->add_option("--out", out_dir, "Artifact output directory");
    explain->add_option("--timeout", timeout_s, "Wall-clock timeout in seconds");
    explain->add_option("--samples", samples, "Explained samples (capped at n)");

    auto* eval = app.add_subcommand("eval", "Score a stored explanation against a model");
    eval->add_option("--model", model_path, "Model JSON path")->required();
    eval->add_option("--expl", expl_path, "Explanation JSON path")->required();
    eval->add_option("--data", data_path, "Dataset CSV (sampled fresh when omitted)");
    eval->add_option("--seed", seed, "Dataset seed when --data is omitted");

    auto* sweep = app.add_subcommand("sweep", "Run the full experiment sweep");
    sweep->add_option("--config", config_path, "Experiment config JSON")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--jobs", jobs, "Worker threads");

    auto* report = app.add_subcommand("report", "Aggregate a sweep's results.csv");
    report->add_option("--in", in_dir, "Sweep output directory")->required();
    report->add_option("--out", out_csv, "Summary CSV path")->required();

    auto* config = app.add_subcommand("config", "Inspect configuration");
    config->add_flag("--defaults", show_defaults, "Print the default config JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(config_path, out_dir);
        if (explain->parsed())
            return cmd_explain(model_path, data_path, explainer, seed, exact_shap,
                               out_dir, timeout_s, samples);
        if (eval->parsed()) return cmd_eval(model_path, expl_path, data_path, seed);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, jobs);
        if (report->parsed()) return cmd_report(in_dir, out_csv);
        if (config->parsed()) {
            std::cout << xfid::config_to_json(xfid::ExperimentConfig{});
            return 0;
        }
    } catch (const xfid::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
