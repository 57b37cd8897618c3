#pragma once

// Experiment harness: transfer, strength-linearity, occlusion sweep and
// template-optimization recipes, with JSON / CSV / Markdown report output.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mdnre/baselines.hpp"
#include "mdnre/core.hpp"
#include "mdnre/io.hpp"
#include "mdnre/rng.hpp"
#include "mdnre/synthgen.hpp"
#include "mdnre/training.hpp"

namespace mdnre {

struct EvalConfig {
    std::string experiment = "transfer";  // transfer|strength|occlusion|optimize
    std::string method = "mdnre";         // mdnre|single-ref|linear|centroid
    std::string source_domain;            // empty: exemplars from any domain
    std::vector<std::size_t> anchor_indices = {0, 1, 2};
    double theta_factor = 0.1;
    double theta_override = -1.0;  // >= 0 replaces the derived threshold
    double ridge = 1e-6;
    int mask_k = -1;               // occlusion: restrict sweep to one size
    std::size_t random_masks = 50;  // per size, when exhaustive is too large
    std::uint64_t seed = 0;

    json to_json() const {
        json j;
        j["experiment"] = experiment;
        j["method"] = method;
        j["source_domain"] = source_domain;
        j["anchor_indices"] = anchor_indices;
        j["theta_factor"] = theta_factor;
        j["theta_override"] = theta_override;
        j["ridge"] = ridge;
        j["mask_k"] = mask_k;
        j["random_masks"] = random_masks;
        j["seed"] = seed;
        return j;
    }
};

struct LinearityStat {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

struct EvalReport {
    double overall_accuracy = 0.0;
    std::vector<std::pair<std::string, double>> per_domain;
    std::vector<std::pair<double, double>> per_strength;  // (strength, accuracy)
    std::vector<std::string> class_labels;
    std::vector<std::vector<std::size_t>> confusion;  // row = true, col = predicted
    std::vector<std::pair<std::string, LinearityStat>> linearity;
    std::vector<std::pair<std::size_t, double>> occlusion;  // (mask size, mean accuracy)
    double first_accuracy = -1.0;
    double optimized_accuracy = -1.0;
    json config;
    std::string config_hash;
    std::string timestamp;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline LinearityStat ols(const std::vector<double>& x, const std::vector<double>& y) {
    LinearityStat st;
    st.count = x.size();
    if (x.size() < 2) return st;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return st;
    st.slope = sxy / sxx;
    st.intercept = my - st.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (st.intercept + st.slope * x[i]);
        ss_res += r * r;
    }
    st.r2 = (syy == 0.0) ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
    return st;
}

// Samples usable for few-shot fitting: neutrals plus full-strength exemplars.
inline TrainingSet training_pool(const TrainingSet& set) {
    TrainingSet pool = set;
    pool.samples.clear();
    for (const auto& s : set.samples)
        if (s.cls == set.neutral_label || s.strength == 1.0) pool.samples.push_back(s);
    return pool;
}

inline FittedModel fit_from(const TrainingSet& set, const EvalConfig& cfg) {
    FitOptions opt;
    opt.anchor_indices = cfg.anchor_indices;
    opt.source_domain = cfg.source_domain;
    opt.theta_factor = cfg.theta_factor;
    FittedModel model = fit(training_pool(set), opt);
    if (cfg.theta_override >= 0.0) model.neutral_threshold = cfg.theta_override;
    return model;
}

using Predictor = std::function<std::string(const Sample&)>;

inline void tabulate(EvalReport& rep, const TrainingSet& set, const Predictor& predict) {
    const std::size_t M = set.class_labels.size();
    rep.class_labels = set.class_labels;
    rep.confusion.assign(M, std::vector<std::size_t>(M, 0));

    std::map<std::string, std::pair<std::size_t, std::size_t>> dom_counts;
    std::map<double, std::pair<std::size_t, std::size_t>> str_counts;
    std::size_t hits = 0;
    for (const auto& s : set.samples) {
        const std::string pred = predict(s);
        const bool ok = (pred == s.cls);
        hits += ok;
        rep.confusion[set.class_index(s.cls)][set.class_index(pred)]++;
        auto& dc = dom_counts[s.domain];
        dc.first += ok;
        dc.second += 1;
        auto& sc = str_counts[s.strength];
        sc.first += ok;
        sc.second += 1;
    }
    rep.overall_accuracy =
        set.samples.empty() ? 0.0
                            : static_cast<double>(hits) / static_cast<double>(set.samples.size());
    for (const auto& d : set.domain_labels) {
        const auto& c = dom_counts[d];
        rep.per_domain.emplace_back(d, c.second ? static_cast<double>(c.first) / c.second : 0.0);
    }
    for (const auto& [strength, c] : str_counts)
        rep.per_strength.emplace_back(strength,
                                      c.second ? static_cast<double>(c.first) / c.second : 0.0);

    // accuracy must equal trace / total
    std::size_t trace = 0, total = 0;
    for (std::size_t m = 0; m < M; ++m) {
        trace += rep.confusion[m][m];
        for (std::size_t k = 0; k < M; ++k) total += rep.confusion[m][k];
    }
    if (total != set.samples.size() || trace != hits)
        throw NumericalError("confusion matrix inconsistent with accuracy");
}

inline Predictor make_predictor(const TrainingSet& set, const EvalConfig& cfg,
                                FittedModel* model_out = nullptr) {
    if (cfg.method == "mdnre" || cfg.method == "single-ref") {
        FittedModel model = fit_from(set, cfg);
        if (cfg.method == "single-ref") {
            std::string src = cfg.source_domain.empty() ? set.domain_labels.front()
                                                        : cfg.source_domain;
            model = single_reference_model(model, src);
        }
        if (model_out) *model_out = model;
        return [model](const Sample& s) { return model.predict_label(s.landmarks); };
    }
    if (cfg.method == "linear" || cfg.method == "centroid") {
        TrainingSet source = set;
        if (!cfg.source_domain.empty()) {
            source.samples.clear();
            for (const auto& s : set.samples)
                if (s.domain == cfg.source_domain) source.samples.push_back(s);
        }
        if (cfg.method == "linear") {
            LinearModel lin = fit_linear(source, cfg.ridge);
            return [lin](const Sample& s) { return predict_linear_label(lin, s.landmarks); };
        }
        return [source](const Sample& s) {
            return source.class_labels[fit_predict_centroid(source, s.landmarks)];
        };
    }
    throw ConfigError("unknown method '" + cfg.method + "'");
}

inline void stamp(EvalReport& rep, const EvalConfig& cfg) {
    rep.config = cfg.to_json();
    rep.config_hash = fnv1a_hex(rep.config.dump());
    rep.timestamp = iso_timestamp();
}

}  // namespace detail

inline EvalReport run_transfer(const Dataset& data, const EvalConfig& cfg) {
    EvalReport rep;
    detail::stamp(rep, cfg);
    detail::tabulate(rep, data.set, detail::make_predictor(data.set, cfg));
    return rep;
}

// Evaluates all strength levels and regresses the analogue readout
// lambda_hat against the true blend level, per class.
inline EvalReport run_strength(const Dataset& data, const EvalConfig& cfg) {
    EvalReport rep;
    detail::stamp(rep, cfg);
    FittedModel model;
    detail::Predictor predict = detail::make_predictor(data.set, cfg, &model);
    detail::tabulate(rep, data.set, predict);

    if (cfg.method == "mdnre" || cfg.method == "single-ref") {
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_class;
        for (const auto& s : data.set.samples) {
            if (s.cls == data.set.neutral_label) continue;
            std::size_t m = 0;
            for (std::size_t i = 0; i < model.bank.class_labels.size(); ++i)
                if (model.bank.class_labels[i] == s.cls) m = i;
            const Prediction p = model.predict(s.landmarks);
            per_class[s.cls].first.push_back(s.strength);
            per_class[s.cls].second.push_back(strength_readout(p.activities, model.bank, m) /
                                              p.scale_gain);
        }
        for (const auto& cls : data.set.class_labels) {
            auto it = per_class.find(cls);
            if (it == per_class.end()) continue;
            rep.linearity.emplace_back(cls, detail::ols(it->second.first, it->second.second));
        }
    }
    return rep;
}

namespace detail {
inline void enumerate_masks(const std::vector<std::size_t>& items, std::size_t k,
                            const std::function<void(const OcclusionMask&)>& visit) {
    std::vector<std::size_t> idx(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == k) {
            OcclusionMask m;
            for (std::size_t i : idx) m.masked.insert(i);
            visit(m);
            return;
        }
        for (std::size_t i = start; i + (k - depth) <= items.size(); ++i) {
            idx[depth] = items[i];
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}
}  // namespace detail

// Accuracy as a function of the number of occluded expressive landmarks.
// Exhaustive over all masks of a size when there are at most 252 of them,
// seeded random masks otherwise.
inline EvalReport run_occlusion(const Dataset& data, const EvalConfig& cfg) {
    EvalReport rep;
    detail::stamp(rep, cfg);
    FittedModel model;
    detail::Predictor predict = detail::make_predictor(data.set, cfg, &model);
    detail::tabulate(rep, data.set, predict);

    const std::size_t L = data.set.samples.front().landmarks.size();
    std::vector<std::size_t> expressive;
    for (std::size_t l = 0; l < L; ++l)
        if (std::find(cfg.anchor_indices.begin(), cfg.anchor_indices.end(), l) ==
            cfg.anchor_indices.end())
            expressive.push_back(l);

    auto masked_accuracy = [&](const OcclusionMask& mask) {
        std::size_t hits = 0;
        for (const auto& s : data.set.samples)
            if (model.predict_label(s.landmarks, mask) == s.cls) ++hits;
        return static_cast<double>(hits) / static_cast<double>(data.set.samples.size());
    };

    for (std::size_t k = 0; k <= expressive.size(); ++k) {
        if (cfg.mask_k >= 0 && k != static_cast<std::size_t>(cfg.mask_k)) continue;
        double sum = 0.0;
        std::size_t count = 0;
        if (detail::binomial(expressive.size(), k) <= 252) {
            detail::enumerate_masks(expressive, k, [&](const OcclusionMask& m) {
                sum += masked_accuracy(m);
                ++count;
            });
        } else {
            SplitMix64 rng = substream(cfg.seed, 0x0cc10000ULL + k);
            for (std::size_t t = 0; t < cfg.random_masks; ++t) {
                std::vector<std::size_t> pool = expressive;
                OcclusionMask m;
                for (std::size_t d = 0; d < k; ++d) {
                    const std::size_t pick = rng.next_u64() % pool.size();
                    m.masked.insert(pool[pick]);
                    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
                }
                sum += masked_accuracy(m);
                ++count;
            }
        }
        rep.occlusion.emplace_back(k, sum / static_cast<double>(count));
    }
    return rep;
}

// First vs Optimized template selection, side by side on the same subset.
inline EvalReport run_optimize(const Dataset& pool, const Dataset& eval_set,
                               const EvalConfig& cfg) {
    EvalReport rep;
    detail::stamp(rep, cfg);
    FitOptions opt;
    opt.anchor_indices = cfg.anchor_indices;
    opt.source_domain = cfg.source_domain;
    opt.theta_factor = cfg.theta_factor;

    const TrainingSet fit_pool = detail::training_pool(pool.set);
    std::vector<ReferenceFrame> frames =
        fit_references(detail::first_neutrals(fit_pool), opt.anchor_indices);
    OptimizeResult res = optimize_templates(fit_pool, frames, eval_set.set, opt);
    rep.first_accuracy = res.first_accuracy;
    rep.optimized_accuracy = res.optimized_accuracy;
    detail::tabulate(rep, eval_set.set,
                     [&](const Sample& s) { return res.model.predict_label(s.landmarks); });
    return rep;
}

inline EvalReport run_optimize(const Dataset& pool, const EvalConfig& cfg) {
    return run_optimize(pool, pool, cfg);
}

// ---- Report rendering ------------------------------------------------

inline json report_to_json(const EvalReport& rep) {
    json j;
    j["overall_accuracy"] = rep.overall_accuracy;
    j["per_domain"] = json::object();
    for (const auto& [d, a] : rep.per_domain) j["per_domain"][d] = a;
    j["per_strength"] = json::array();
    for (const auto& [s, a] : rep.per_strength)
        j["per_strength"].push_back(json{{"strength", s}, {"accuracy", a}});
    j["class_labels"] = rep.class_labels;
    j["confusion"] = rep.confusion;
    if (!rep.linearity.empty()) {
        j["linearity"] = json::object();
        for (const auto& [cls, st] : rep.linearity)
            j["linearity"][cls] = json{{"slope", st.slope},
                                       {"intercept", st.intercept},
                                       {"r2", st.r2},
                                       {"count", st.count}};
    }
    if (!rep.occlusion.empty()) {
        j["occlusion"] = json::array();
        for (const auto& [k, a] : rep.occlusion)
            j["occlusion"].push_back(json{{"masked", k}, {"accuracy", a}});
    }
    if (rep.first_accuracy >= 0.0) {
        j["first_accuracy"] = rep.first_accuracy;
        j["optimized_accuracy"] = rep.optimized_accuracy;
    }
    j["config"] = rep.config;
    j["config_hash"] = rep.config_hash;
    j["timestamp"] = rep.timestamp;
    return j;
}

inline std::string report_to_csv(const EvalReport& rep) {
    std::string out = "section,key,value\n";
    auto row = [&](const std::string& sec, const std::string& key, double v) {
        out += sec + "," + key + "," + detail::format_double(v) + "\n";
    };
    row("summary", "overall_accuracy", rep.overall_accuracy);
    for (const auto& [d, a] : rep.per_domain) row("per_domain", d, a);
    for (const auto& [s, a] : rep.per_strength) row("per_strength", detail::format_double(s), a);
    for (const auto& [cls, st] : rep.linearity) {
        row("linearity_slope", cls, st.slope);
        row("linearity_intercept", cls, st.intercept);
        row("linearity_r2", cls, st.r2);
    }
    for (const auto& [k, a] : rep.occlusion) row("occlusion", std::to_string(k), a);
    if (rep.first_accuracy >= 0.0) {
        row("templates", "first", rep.first_accuracy);
        row("templates", "optimized", rep.optimized_accuracy);
    }
    for (std::size_t m = 0; m < rep.confusion.size(); ++m)
        for (std::size_t k = 0; k < rep.confusion[m].size(); ++k)
            row("confusion", rep.class_labels[m] + ":" + rep.class_labels[k],
                static_cast<double>(rep.confusion[m][k]));
    out += "meta,config_hash," + rep.config_hash + "\n";
    out += "meta,timestamp," + rep.timestamp + "\n";
    return out;
}

inline std::string report_to_markdown(const EvalReport& rep) {
    char buf[64];
    auto pct = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    std::string out = "# Evaluation report\n\n";
    out += "Overall accuracy: **" + pct(rep.overall_accuracy) + "**\n\n";
    if (!rep.per_domain.empty()) {
        out += "| domain | accuracy |\n|---|---|\n";
        for (const auto& [d, a] : rep.per_domain) out += "| " + d + " | " + pct(a) + " |\n";
        out += "\n";
    }
    if (!rep.per_strength.empty()) {
        out += "| strength | accuracy |\n|---|---|\n";
        for (const auto& [s, a] : rep.per_strength)
            out += "| " + pct(s) + " | " + pct(a) + " |\n";
        out += "\n";
    }
    if (!rep.linearity.empty()) {
        out += "| class | slope | intercept | R2 |\n|---|---|---|---|\n";
        for (const auto& [cls, st] : rep.linearity)
            out += "| " + cls + " | " + pct(st.slope) + " | " + pct(st.intercept) + " | " +
                   pct(st.r2) + " |\n";
        out += "\n";
    }
    if (!rep.occlusion.empty()) {
        out += "| masked | accuracy |\n|---|---|\n";
        for (const auto& [k, a] : rep.occlusion)
            out += "| " + std::to_string(k) + " | " + pct(a) + " |\n";
        out += "\n";
    }
    if (rep.first_accuracy >= 0.0) {
        out += "| templates | accuracy |\n|---|---|\n";
        out += "| first | " + pct(rep.first_accuracy) + " |\n";
        out += "| optimized | " + pct(rep.optimized_accuracy) + " |\n\n";
    }
    out += "Config hash: `" + rep.config_hash + "`  \nTimestamp: " + rep.timestamp + "\n";
    return out;
}

inline void save_report(const EvalReport& rep, const std::string& path,
                        const std::string& format) {
    if (format == "json")
        detail::write_atomic(path, report_to_json(rep).dump(2) + "\n");
    else if (format == "csv")
        detail::write_atomic(path, report_to_csv(rep));
    else if (format == "md" || format == "markdown")
        detail::write_atomic(path, report_to_markdown(rep));
    else
        throw ConfigError("unknown report format '" + format + "'");
}

}  // namespace mdnre
