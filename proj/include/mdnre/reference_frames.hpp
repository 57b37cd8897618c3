#pragma once

// Reference-frame pathway: per-domain neutral configurations, pose
// estimation from anchor landmarks, similarity alignment (translation +
// isotropic scale, no rotation) and hard domain inference by anchor
// residual.

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mdnre/common.hpp"

namespace mdnre {

constexpr double kDegenerateScale = 1e-9;

// Face position and size summarized from the pose anchors.
struct Pose {
    Vec2 center;
    double scale = 1.0;  // RMS anchor distance from the center, > 0
};

// Per-domain neutral landmark configuration plus the indices of the
// expression-invariant anchors used for pose and domain inference.
struct ReferenceFrame {
    std::string domain;
    LandmarkVector landmarks;
    std::vector<std::size_t> anchor_indices;

    void validate() const {
        if (anchor_indices.size() < 2) throw ConfigError("need at least 2 anchor indices");
        std::vector<bool> seen(landmarks.size(), false);
        for (std::size_t a : anchor_indices) {
            if (a >= landmarks.size()) throw ConfigError("anchor index out of range");
            if (seen[a]) throw ConfigError("duplicate anchor index");
            seen[a] = true;
        }
        if (!all_finite(landmarks)) throw NumericalError("non-finite reference landmark");
    }
};

inline Pose estimate_pose(const LandmarkVector& s, const std::vector<std::size_t>& anchor_indices) {
    if (anchor_indices.size() < 2) throw ConfigError("need at least 2 anchors for pose");
    Vec2 center{0.0, 0.0};
    for (std::size_t a : anchor_indices) {
        if (a >= s.size()) throw ConfigError("anchor index out of range");
        center += s[a];
    }
    const double inv = 1.0 / static_cast<double>(anchor_indices.size());
    center = inv * center;
    double msd = 0.0;
    for (std::size_t a : anchor_indices) msd += squared_norm(s[a] - center);
    const double scale = std::sqrt(msd * inv);
    if (scale <= kDegenerateScale) throw PoseError("degenerate anchor configuration");
    return {center, scale};
}

// Map the reference landmarks onto the target pose:
// r'_l = (target.scale / sigma_r) * (r_l - c_r) + target.center
inline LandmarkVector align_reference(const ReferenceFrame& ref, const Pose& target) {
    const Pose own = estimate_pose(ref.landmarks, ref.anchor_indices);
    const double gain = target.scale / own.scale;
    LandmarkVector out(ref.landmarks.size());
    for (std::size_t l = 0; l < out.size(); ++l)
        out[l] = gain * (ref.landmarks[l] - own.center) + target.center;
    return out;
}

struct DomainInference {
    std::size_t frame_index = 0;
    LandmarkVector aligned_reference;
    double residual = 0.0;
    Pose pose;  // stimulus pose the frames were aligned to
};

// Hard domain assignment: align every frame to the stimulus pose and pick
// the one whose anchors land closest (summed squared distance). Ties go to
// the first frame in list order.
inline DomainInference infer_domain(const LandmarkVector& s,
                                    const std::vector<ReferenceFrame>& frames) {
    if (frames.empty()) throw ConfigError("no reference frames configured");
    const Pose pose = estimate_pose(s, frames.front().anchor_indices);
    DomainInference best;
    best.pose = pose;
    best.residual = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].landmarks.size() != s.size())
            throw DimensionError("frame landmark count does not match stimulus");
        LandmarkVector aligned = align_reference(frames[i], pose);
        double rho = 0.0;
        for (std::size_t a : frames[i].anchor_indices)
            rho += squared_norm(s[a] - aligned[a]);
        if (rho < best.residual) {
            best.residual = rho;
            best.frame_index = i;
            best.aligned_reference = std::move(aligned);
        }
    }
    return best;
}

}  // namespace mdnre
