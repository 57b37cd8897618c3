#pragma once

// Norm-referenced readout core: difference fields, tuning banks, rectified
// multi-landmark activities, classification and analogue strength readout.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "mdnre/common.hpp"

namespace mdnre {

// Per-landmark displacement of a stimulus from its aligned domain reference.
struct DifferenceField {
    std::vector<Vec2> diffs;
    std::string source_domain;
};

// Landmark indices that contribute nothing to the readout.
struct OcclusionMask {
    std::set<std::size_t> masked;

    static OcclusionMask none() { return {}; }
    bool contains(std::size_t l) const { return masked.count(l) != 0; }

    void validate(std::size_t landmark_count) const {
        for (std::size_t l : masked)
            if (l >= landmark_count)
                throw DimensionError("occlusion mask index " + std::to_string(l) +
                                     " out of range for L=" + std::to_string(landmark_count));
    }
};

// Unit tuning directions per (landmark, class) plus the calibration activity
// of each class's full-strength training exemplar. A direction may be stored
// as the exact zero vector when the training displacement was negligible;
// such entries contribute nothing.
struct TuningBank {
    // directions[l][m], L x M
    std::vector<std::vector<Vec2>> directions;
    std::vector<std::string> class_labels;
    std::vector<double> calib;
    std::size_t neutral_index = 0;

    std::size_t landmark_count() const { return directions.size(); }
    std::size_t class_count() const { return class_labels.size(); }

    void validate() const {
        if (class_labels.size() < 2)
            throw ConfigError("tuning bank needs at least 2 classes");
        if (neutral_index >= class_labels.size())
            throw ConfigError("neutral class index out of range");
        if (calib.size() != class_labels.size())
            throw ConfigError("calib size mismatch");
        for (const auto& row : directions) {
            if (row.size() != class_labels.size())
                throw DimensionError("tuning bank row width mismatch");
            for (const auto& n : row) {
                const double len = norm(n);
                if (len != 0.0 && std::abs(len - 1.0) > 1e-12)
                    throw NumericalError("tuning direction is neither zero nor unit");
            }
        }
        for (std::size_t m = 0; m < calib.size(); ++m) {
            if (calib[m] < 0.0) throw CalibrationError("negative calibration activity");
            if (m == neutral_index && calib[m] != 0.0)
                throw CalibrationError("neutral class must have zero calibration");
        }
    }

    // Smallest calibration activity over non-neutral classes.
    double min_nonneutral_calib() const {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < calib.size(); ++m)
            if (m != neutral_index) lo = std::min(lo, calib[m]);
        return lo;
    }
};

// Readout activities v_m, aligned with the bank's class labels.
struct ActivityVector {
    std::vector<double> values;
    std::vector<std::string> class_labels;
};

// d = s - r, componentwise.
inline DifferenceField difference(const LandmarkVector& s, const LandmarkVector& r,
                                  const std::string& domain) {
    if (s.size() != r.size())
        throw DimensionError("stimulus has " + std::to_string(s.size()) +
                             " landmarks, reference has " + std::to_string(r.size()));
    DifferenceField out;
    out.source_domain = domain;
    out.diffs.resize(s.size());
    for (std::size_t l = 0; l < s.size(); ++l) out.diffs[l] = s[l] - r[l];
    return out;
}

// Single-unit readout: projection of the difference onto the tuning
// direction, without rectification.
inline double unit_activity(Vec2 d, Vec2 n) { return dot(d, n); }

// v_m = sum over unmasked landmarks of [d_l . n_{l,m}]_+
inline ActivityVector expression_activity(const DifferenceField& field, const TuningBank& bank,
                                          const OcclusionMask& mask = OcclusionMask::none()) {
    if (field.diffs.size() != bank.landmark_count())
        throw DimensionError("difference field and tuning bank disagree on landmark count");
    mask.validate(field.diffs.size());

    ActivityVector out;
    out.class_labels = bank.class_labels;
    out.values.assign(bank.class_count(), 0.0);
    for (std::size_t l = 0; l < field.diffs.size(); ++l) {
        if (mask.contains(l)) continue;
        for (std::size_t m = 0; m < bank.class_count(); ++m)
            out.values[m] += std::max(0.0, dot(field.diffs[l], bank.directions[l][m]));
    }
    return out;
}

// Argmax over non-neutral classes, falling back to the neutral class when no
// activity reaches the threshold. Ties break to the lowest class index.
inline std::size_t classify(const ActivityVector& a, std::size_t neutral_index,
                            double neutral_threshold) {
    if (a.values.empty()) throw ConfigError("empty activity vector");
    if (neutral_threshold < 0.0) throw ConfigError("neutral threshold must be >= 0");
    std::size_t best = neutral_index;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < a.values.size(); ++m) {
        if (m == neutral_index) continue;
        if (a.values[m] > best_v) {
            best_v = a.values[m];
            best = m;
        }
    }
    if (best == neutral_index || best_v < neutral_threshold) return neutral_index;
    return best;
}

// Analogue strength readout: lambda_hat = v_m / v_m^cal. Equals the true
// blend coefficient under the noiseless generative model.
inline double strength_readout(const ActivityVector& a, const TuningBank& bank, std::size_t m) {
    if (m >= bank.class_count() || m == bank.neutral_index)
        throw ConfigError("strength readout requires a non-neutral class");
    if (bank.calib[m] <= 0.0)
        throw CalibrationError("class '" + bank.class_labels[m] +
                               "' was calibrated with zero displacement");
    return a.values[m] / bank.calib[m];
}

}  // namespace mdnre
