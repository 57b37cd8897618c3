#pragma once

// Few-shot fitting: references from one neutral per domain, tuning vectors
// from one exemplar per class, and the greedy one-pass template search.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdnre/common.hpp"
#include "mdnre/core.hpp"
#include "mdnre/reference_frames.hpp"

namespace mdnre {

struct Sample {
    LandmarkVector landmarks;
    std::string domain;
    std::string cls;
    double strength = 1.0;
    std::string identity;
};

struct TrainingSet {
    std::vector<Sample> samples;
    std::vector<std::string> class_labels;
    std::vector<std::string> domain_labels;
    std::string neutral_label = "neutral";

    std::size_t class_index(const std::string& c) const {
        for (std::size_t i = 0; i < class_labels.size(); ++i)
            if (class_labels[i] == c) return i;
        throw ConfigError("unknown class label '" + c + "'");
    }
};

struct Prediction {
    std::size_t class_index = 0;
    std::size_t domain_index = 0;
    ActivityVector activities;
    // stimulus scale relative to the selected frame's native scale; raw
    // activities grow with it, so thresholding and strength readout must
    // divide it back out
    double scale_gain = 1.0;
};

// Complete trained state: per-domain frames, tuning bank, neutral threshold.
struct FittedModel {
    std::vector<ReferenceFrame> frames;
    TuningBank bank;
    double neutral_threshold = 0.0;

    Prediction predict(const LandmarkVector& s,
                       const OcclusionMask& mask = OcclusionMask::none()) const {
        DomainInference dom = infer_domain(s, frames);
        DifferenceField d = difference(s, dom.aligned_reference, frames[dom.frame_index].domain);
        const Pose native = estimate_pose(frames[dom.frame_index].landmarks,
                                          frames[dom.frame_index].anchor_indices);
        Prediction p;
        p.domain_index = dom.frame_index;
        p.scale_gain = dom.pose.scale / native.scale;
        p.activities = expression_activity(d, bank, mask);
        // the threshold is calibrated in the frame's native scale
        p.class_index =
            classify(p.activities, bank.neutral_index, neutral_threshold * p.scale_gain);
        return p;
    }

    const std::string& predict_label(const LandmarkVector& s,
                                     const OcclusionMask& mask = OcclusionMask::none()) const {
        return bank.class_labels[predict(s, mask).class_index];
    }
};

// One neutral sample per domain becomes that domain's frame, verbatim.
inline std::vector<ReferenceFrame> fit_references(
    const std::vector<std::pair<LandmarkVector, std::string>>& neutrals,
    const std::vector<std::size_t>& anchor_indices) {
    if (neutrals.empty()) throw ConfigError("no neutral samples supplied");
    std::vector<ReferenceFrame> frames;
    for (const auto& [landmarks, domain] : neutrals) {
        for (const auto& f : frames)
            if (f.domain == domain) throw ConfigError("duplicate neutral for domain '" + domain + "'");
        ReferenceFrame frame{domain, landmarks, anchor_indices};
        frame.validate();
        frames.push_back(std::move(frame));
    }
    return frames;
}

// A tuning exemplar: one sample of one non-neutral class, attributed to the
// domain whose frame its displacement is measured against.
struct Exemplar {
    LandmarkVector landmarks;
    std::string cls;
    std::string domain;
};

namespace detail {
inline const ReferenceFrame& frame_for(const std::vector<ReferenceFrame>& frames,
                                       const std::string& domain) {
    for (const auto& f : frames)
        if (f.domain == domain) return f;
    throw ConfigError("no reference frame for domain '" + domain + "'");
}
}  // namespace detail

// Build the tuning bank from one exemplar per non-neutral class. Each
// exemplar's displacement is taken against its domain reference aligned to
// the exemplar's own pose. Directions below 1e-9 displacement are stored as
// exact zero vectors.
inline TuningBank fit_tuning(const std::vector<Exemplar>& exemplars,
                             const std::vector<ReferenceFrame>& frames,
                             const std::vector<std::string>& class_labels,
                             const std::string& neutral_label) {
    if (frames.empty()) throw ConfigError("no reference frames");
    const std::size_t L = frames.front().landmarks.size();

    TuningBank bank;
    bank.class_labels = class_labels;
    bank.calib.assign(class_labels.size(), 0.0);
    bank.directions.assign(L, std::vector<Vec2>(class_labels.size(), Vec2{0.0, 0.0}));
    auto it = std::find(class_labels.begin(), class_labels.end(), neutral_label);
    if (it == class_labels.end()) throw ConfigError("neutral label not among classes");
    bank.neutral_index = static_cast<std::size_t>(it - class_labels.begin());

    std::vector<bool> fitted(class_labels.size(), false);
    fitted[bank.neutral_index] = true;  // neutral stays all-zero
    for (const auto& ex : exemplars) {
        std::size_t m = class_labels.size();
        for (std::size_t i = 0; i < class_labels.size(); ++i)
            if (class_labels[i] == ex.cls) m = i;
        if (m == class_labels.size()) throw ConfigError("exemplar class '" + ex.cls + "' unknown");
        if (m == bank.neutral_index)
            throw ConfigError("neutral class takes no tuning exemplar");
        if (fitted[m]) throw ConfigError("multiple exemplars for class '" + ex.cls + "'");
        const ReferenceFrame& frame = detail::frame_for(frames, ex.domain);
        if (ex.landmarks.size() != L) throw DimensionError("exemplar landmark count mismatch");

        const Pose pose = estimate_pose(ex.landmarks, frame.anchor_indices);
        const LandmarkVector aligned = align_reference(frame, pose);
        double calib = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const Vec2 d = ex.landmarks[l] - aligned[l];
            const double len = norm(d);
            if (len >= 1e-9) {
                bank.directions[l][m] = (1.0 / len) * d;
                calib += len;
            }
        }
        if (calib <= 0.0)
            throw CalibrationError("exemplar for class '" + ex.cls +
                                   "' has zero displacement from its reference");
        bank.calib[m] = calib;
        fitted[m] = true;
    }
    for (std::size_t m = 0; m < class_labels.size(); ++m)
        if (!fitted[m]) throw ConfigError("no exemplar for class '" + class_labels[m] + "'");
    return bank;
}

inline double default_threshold(const TuningBank& bank, double factor = 0.1) {
    return factor * bank.min_nonneutral_calib();
}

struct FitOptions {
    std::vector<std::size_t> anchor_indices = {0, 1, 2};
    // Empty means exemplars may come from any domain (the "-I" regime).
    std::string source_domain;
    double theta_factor = 0.1;
};

namespace detail {
inline std::vector<std::pair<LandmarkVector, std::string>> first_neutrals(const TrainingSet& train) {
    std::vector<std::pair<LandmarkVector, std::string>> neutrals;
    for (const auto& dom : train.domain_labels) {
        bool found = false;
        for (const auto& s : train.samples) {
            if (s.domain == dom && s.cls == train.neutral_label) {
                neutrals.emplace_back(s.landmarks, dom);
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("no neutral sample for domain '" + dom + "'");
    }
    return neutrals;
}

inline std::vector<Exemplar> first_exemplars(const TrainingSet& train, const FitOptions& opt) {
    std::vector<Exemplar> out;
    for (const auto& cls : train.class_labels) {
        if (cls == train.neutral_label) continue;
        bool found = false;
        for (const auto& s : train.samples) {
            if (s.cls != cls) continue;
            if (!opt.source_domain.empty() && s.domain != opt.source_domain) continue;
            out.push_back({s.landmarks, s.cls, s.domain});
            found = true;
            break;
        }
        if (!found) throw ConfigError("no exemplar candidate for class '" + cls + "'");
    }
    return out;
}
}  // namespace detail

// "First" fitting: first neutral per domain, first matching exemplar per
// class, threshold derived from the calibration activities.
inline FittedModel fit(const TrainingSet& train, const FitOptions& opt = {}) {
    FittedModel model;
    model.frames = fit_references(detail::first_neutrals(train), opt.anchor_indices);
    model.bank = fit_tuning(detail::first_exemplars(train, opt), model.frames,
                            train.class_labels, train.neutral_label);
    model.neutral_threshold = default_threshold(model.bank, opt.theta_factor);
    return model;
}

inline double accuracy(const FittedModel& model, const std::vector<Sample>& samples,
                       const OcclusionMask& mask = OcclusionMask::none()) {
    if (samples.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& s : samples)
        if (model.predict_label(s.landmarks, mask) == s.cls) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

struct OptimizeResult {
    std::vector<Exemplar> chosen;
    FittedModel model;
    double first_accuracy = 0.0;
    double optimized_accuracy = 0.0;
};

// One greedy pass over classes in label order. Each candidate is swapped in,
// the bank refit, and accuracy measured on the evaluation subset; a candidate
// is kept only when it strictly improves, so the result never scores below
// the First-template model. Ties keep the earlier candidate in pool order.
inline OptimizeResult optimize_templates(const TrainingSet& pool,
                                         const std::vector<ReferenceFrame>& frames,
                                         const TrainingSet& eval_subset,
                                         const FitOptions& opt = {}) {
    std::vector<Exemplar> current = detail::first_exemplars(pool, opt);
    auto refit = [&](const std::vector<Exemplar>& ex) {
        FittedModel m;
        m.frames = frames;
        m.bank = fit_tuning(ex, frames, pool.class_labels, pool.neutral_label);
        m.neutral_threshold = default_threshold(m.bank, opt.theta_factor);
        return m;
    };

    FittedModel model = refit(current);
    const double first_acc = accuracy(model, eval_subset.samples);
    double best_acc = first_acc;

    for (std::size_t ci = 0; ci < current.size(); ++ci) {
        const std::string& cls = current[ci].cls;
        for (const auto& s : pool.samples) {
            if (s.cls != cls) continue;
            if (!opt.source_domain.empty() && s.domain != opt.source_domain) continue;
            std::vector<Exemplar> trial = current;
            trial[ci] = {s.landmarks, s.cls, s.domain};
            FittedModel candidate = refit(trial);
            const double acc = accuracy(candidate, eval_subset.samples);
            if (acc > best_acc) {
                best_acc = acc;
                current = std::move(trial);
                model = std::move(candidate);
            }
        }
    }
    return {std::move(current), std::move(model), first_acc, best_acc};
}

}  // namespace mdnre
