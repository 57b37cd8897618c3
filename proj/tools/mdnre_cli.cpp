// Experiment command line: dataset generation, model fitting, evaluation
// recipes and report conversion.
//
//   mdnre gen    --preset bfs --seed 1 --out data.csv
//   mdnre train  --dataset data.csv --source-domain human --out model.json
//   mdnre eval   --dataset data.csv --experiment transfer --out report.json
//   mdnre ablate --dataset data.csv --source-domain human --out ablation.json
//   mdnre report --in report.json --format md --out report.md
//
// Options can also come from a key=value config file via a leading
// --config flag (subcommand options live under a [subcommand] section);
// command-line flags win. Exit code 0 on success, 1 with a diagnostic on
// any error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <mdnre/mdnre.hpp>

using namespace mdnre;

namespace {

SynthSpec spec_for_preset(const std::string& preset, std::uint64_t seed, double noise,
                          double identity_sigma, double phi) {
    if (preset == "bfs") return bfs_spec(seed, noise, identity_sigma);
    if (preset == "bfsl") return bfsl_spec(seed, noise);
    if (preset == "toy-collinear") return toy_spec(ToyMode::collinear, phi, seed);
    if (preset == "toy-misaligned") return toy_spec(ToyMode::misaligned, phi, seed);
    throw ConfigError("unknown preset '" + preset + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-domain norm-referenced encoding experiment harness"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "key=value config file; [subcommand] sections, flags override");

    // ---- gen ----
    std::string gen_preset = "bfs", gen_out = "dataset.csv";
    std::uint64_t gen_seed = 1;
    double gen_noise = 0.0, gen_identity_sigma = 0.05, gen_phi = 3.14159265358979323846;
    auto* gen = app.add_subcommand("gen", "generate a synthetic landmark dataset");
    gen->add_option("--preset", gen_preset,
                    "bfs | bfsl | toy-collinear | toy-misaligned | corrupted-pool");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--noise", gen_noise, "coordinate noise std");
    gen->add_option("--identity-sigma", gen_identity_sigma, "identity perturbation std");
    gen->add_option("--phi", gen_phi, "tuning rotation for toy-misaligned (radians)");
    gen->add_option("--out", gen_out, "output CSV path");

    // ---- shared eval-ish options ----
    struct Common {
        std::string dataset;
        std::string source_domain;
        std::uint64_t seed = 0;
        double theta = -1.0;
        double theta_factor = 0.1;
    };

    // ---- train ----
    Common tr;
    std::string tr_out = "model.json", tr_mode = "first", tr_eval_dataset;
    auto* train_cmd = app.add_subcommand("train", "fit a model and write it as JSON");
    train_cmd->add_option("--dataset", tr.dataset, "training dataset CSV")->required();
    train_cmd->add_option("--source-domain", tr.source_domain,
                          "domain providing tuning exemplars (empty: any)");
    train_cmd->add_option("--theta", tr.theta, "neutral threshold override");
    train_cmd->add_option("--theta-factor", tr.theta_factor, "threshold as fraction of min calib");
    train_cmd->add_option("--mode", tr_mode, "first | optimized template selection");
    train_cmd->add_option("--eval-dataset", tr_eval_dataset,
                          "evaluation subset for optimized mode (default: training pool)");
    train_cmd->add_option("--out", tr_out, "output model path");

    // ---- eval ----
    Common ev;
    std::string ev_experiment = "transfer", ev_method = "mdnre", ev_out = "report.json";
    std::string ev_format = "json", ev_eval_dataset;
    int ev_mask_k = -1;
    auto* eval_cmd = app.add_subcommand("eval", "run an experiment recipe and emit a report");
    eval_cmd->add_option("--dataset", ev.dataset, "dataset CSV")->required();
    eval_cmd->add_option("--experiment", ev_experiment,
                         "transfer | strength | occlusion | optimize");
    eval_cmd->add_option("--method", ev_method, "mdnre | single-ref | linear | centroid");
    eval_cmd->add_option("--source-domain", ev.source_domain, "source domain");
    eval_cmd->add_option("--seed", ev.seed, "seed for randomized sweeps");
    eval_cmd->add_option("--theta", ev.theta, "neutral threshold override");
    eval_cmd->add_option("--theta-factor", ev.theta_factor, "threshold as fraction of min calib");
    eval_cmd->add_option("--mask-k", ev_mask_k, "occlusion: only this mask size");
    eval_cmd->add_option("--eval-dataset", ev_eval_dataset,
                         "optimize: evaluation subset (default: the dataset itself)");
    eval_cmd->add_option("--format", ev_format, "json | csv | md");
    eval_cmd->add_option("--out", ev_out, "output report path");

    // ---- ablate ----
    Common ab;
    std::string ab_out = "ablation.json", ab_format = "json";
    auto* ablate_cmd =
        app.add_subcommand("ablate", "occlusion sweep plus single-reference comparison");
    ablate_cmd->add_option("--dataset", ab.dataset, "dataset CSV")->required();
    ablate_cmd->add_option("--source-domain", ab.source_domain, "source domain");
    ablate_cmd->add_option("--seed", ab.seed, "seed for randomized masks");
    ablate_cmd->add_option("--theta", ab.theta, "neutral threshold override");
    ablate_cmd->add_option("--format", ab_format, "json | csv | md");
    ablate_cmd->add_option("--out", ab_out, "output report path");

    // ---- report ----
    std::string rp_in, rp_out = "report.md", rp_format = "md";
    auto* report_cmd = app.add_subcommand("report", "convert a JSON report to another format");
    report_cmd->add_option("--in", rp_in, "input JSON report")->required();
    report_cmd->add_option("--format", rp_format, "csv | md");
    report_cmd->add_option("--out", rp_out, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            Dataset data;
            if (gen_preset == "corrupted-pool")
                data = corrupted_pool_instance(gen_seed);
            else
                data = generate(
                    spec_for_preset(gen_preset, gen_seed, gen_noise, gen_identity_sigma, gen_phi));
            save_dataset(data, gen_out);
            std::printf("wrote %zu samples to %s\n", data.set.samples.size(), gen_out.c_str());
        } else if (train_cmd->parsed()) {
            Dataset data = load_dataset(tr.dataset);
            EvalConfig cfg;
            cfg.source_domain = tr.source_domain;
            cfg.theta_override = tr.theta;
            cfg.theta_factor = tr.theta_factor;
            cfg.seed = tr.seed;
            FittedModel model;
            if (tr_mode == "first") {
                model = detail::fit_from(data.set, cfg);
            } else if (tr_mode == "optimized") {
                Dataset eval_set =
                    tr_eval_dataset.empty() ? data : load_dataset(tr_eval_dataset);
                FitOptions opt;
                opt.source_domain = cfg.source_domain;
                opt.theta_factor = cfg.theta_factor;
                TrainingSet pool = detail::training_pool(data.set);
                auto frames = fit_references(detail::first_neutrals(pool), opt.anchor_indices);
                auto res = optimize_templates(pool, frames, eval_set.set, opt);
                model = res.model;
                std::printf("first accuracy %.4f, optimized accuracy %.4f\n", res.first_accuracy,
                            res.optimized_accuracy);
            } else {
                throw ConfigError("unknown mode '" + tr_mode + "'");
            }
            if (tr.theta >= 0.0) model.neutral_threshold = tr.theta;
            save_model(model, tr_out);
            std::printf("wrote model (%zu frames, %zu classes) to %s\n", model.frames.size(),
                        model.bank.class_count(), tr_out.c_str());
        } else if (eval_cmd->parsed()) {
            Dataset data = load_dataset(ev.dataset);
            EvalConfig cfg;
            cfg.experiment = ev_experiment;
            cfg.method = ev_method;
            cfg.source_domain = ev.source_domain;
            cfg.seed = ev.seed;
            cfg.theta_override = ev.theta;
            cfg.theta_factor = ev.theta_factor;
            cfg.mask_k = ev_mask_k;
            EvalReport rep;
            if (ev_experiment == "transfer")
                rep = run_transfer(data, cfg);
            else if (ev_experiment == "strength")
                rep = run_strength(data, cfg);
            else if (ev_experiment == "occlusion")
                rep = run_occlusion(data, cfg);
            else if (ev_experiment == "optimize")
                rep = ev_eval_dataset.empty()
                          ? run_optimize(data, cfg)
                          : run_optimize(data, load_dataset(ev_eval_dataset), cfg);
            else
                throw ConfigError("unknown experiment '" + ev_experiment + "'");
            save_report(rep, ev_out, ev_format);
            std::printf("overall accuracy %.4f; report written to %s\n", rep.overall_accuracy,
                        ev_out.c_str());
        } else if (ablate_cmd->parsed()) {
            Dataset data = load_dataset(ab.dataset);
            EvalConfig cfg;
            cfg.experiment = "occlusion";
            cfg.source_domain = ab.source_domain;
            cfg.seed = ab.seed;
            cfg.theta_override = ab.theta;
            EvalReport occ = run_occlusion(data, cfg);
            EvalConfig single = cfg;
            single.method = "single-ref";
            EvalReport sr = run_transfer(data, single);
            std::printf("full MD-NRE accuracy %.4f, single-reference accuracy %.4f\n",
                        occ.overall_accuracy, sr.overall_accuracy);
            save_report(occ, ab_out, ab_format);
            std::printf("occlusion sweep written to %s\n", ab_out.c_str());
        } else if (report_cmd->parsed()) {
            std::ifstream f(rp_in, std::ios::binary);
            if (!f) throw ConfigError("cannot open report '" + rp_in + "'");
            json j;
            f >> j;
            EvalReport rep;
            rep.overall_accuracy = j.at("overall_accuracy").get<double>();
            for (const auto& [k, v] : j.at("per_domain").items())
                rep.per_domain.emplace_back(k, v.get<double>());
            for (const auto& e : j.at("per_strength"))
                rep.per_strength.emplace_back(e.at("strength").get<double>(),
                                              e.at("accuracy").get<double>());
            rep.class_labels = j.at("class_labels").get<std::vector<std::string>>();
            rep.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
            if (j.contains("linearity"))
                for (const auto& [k, v] : j.at("linearity").items())
                    rep.linearity.emplace_back(
                        k, LinearityStat{v.at("slope").get<double>(),
                                         v.at("intercept").get<double>(), v.at("r2").get<double>(),
                                         v.at("count").get<std::size_t>()});
            if (j.contains("occlusion"))
                for (const auto& e : j.at("occlusion"))
                    rep.occlusion.emplace_back(e.at("masked").get<std::size_t>(),
                                               e.at("accuracy").get<double>());
            if (j.contains("first_accuracy")) {
                rep.first_accuracy = j.at("first_accuracy").get<double>();
                rep.optimized_accuracy = j.at("optimized_accuracy").get<double>();
            }
            rep.config = j.at("config");
            rep.config_hash = j.at("config_hash").get<std::string>();
            rep.timestamp = j.at("timestamp").get<std::string>();
            save_report(rep, rp_out, rp_format);
            std::printf("converted %s to %s (%s)\n", rp_in.c_str(), rp_out.c_str(),
                        rp_format.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
