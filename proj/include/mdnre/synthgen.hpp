#pragma once

// Deterministic synthetic face-space generator. Each sample is
//   B + t_N + g_N + eta_j + lambda * R(phi_N) * e_m + eps
// where B is the canonical landmark template, t_N a rigid domain
// translation, g_N a per-landmark domain shape perturbation, eta_j a
// per-identity perturbation (zero on anchors, identity 0 canonical),
// e_m the class displacement field, R(phi) a per-vector rotation and
// eps Gaussian coordinate noise. Bit-reproducible for a given seed.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mdnre/common.hpp"
#include "mdnre/rng.hpp"
#include "mdnre/training.hpp"

namespace mdnre {

struct DomainSpec {
    std::string id;
    Vec2 translation{0.0, 0.0};            // t_N, applied to every landmark
    std::vector<Vec2> shape_perturbation;  // g_N, length L (may be empty = zero)
    double tuning_rotation = 0.0;          // phi_N, rotates class displacements
};

struct ClassSpec {
    std::string id;
    std::vector<Vec2> displacement;  // e_m, length L, zero on anchors
};

struct SynthSpec {
    std::size_t landmark_count = 10;
    std::vector<std::size_t> anchor_indices = {0, 1, 2};
    std::vector<DomainSpec> domains;
    std::vector<ClassSpec> classes;  // exactly one with all-zero displacement = neutral
    std::string neutral_class = "neutral";
    std::vector<double> strengths = {1.0};
    double noise_sigma = 0.0;
    double identity_sigma = 0.0;
    std::size_t identities_per_domain = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (domains.empty()) throw ConfigError("spec has no domains");
        if (classes.size() < 2) throw ConfigError("spec needs at least 2 classes");
        if (identities_per_domain < 1) throw ConfigError("identities_per_domain must be >= 1");
        if (noise_sigma < 0.0 || identity_sigma < 0.0) throw ConfigError("negative sigma");
        bool has_neutral = false;
        for (const auto& c : classes) {
            if (c.displacement.size() != landmark_count)
                throw DimensionError("class displacement field length mismatch");
            for (std::size_t a : anchor_indices)
                if (norm(c.displacement[a]) != 0.0)
                    throw ConfigError("class displacement must vanish on anchors");
            if (c.id == neutral_class) {
                has_neutral = true;
                for (const auto& v : c.displacement)
                    if (norm(v) != 0.0) throw ConfigError("neutral class must have zero field");
            }
        }
        if (!has_neutral) throw ConfigError("no class named '" + neutral_class + "'");
        for (const auto& d : domains)
            if (!d.shape_perturbation.empty() && d.shape_perturbation.size() != landmark_count)
                throw DimensionError("domain shape perturbation length mismatch");
        for (double s : strengths)
            if (s < 0.0 || s > 1.0) throw ConfigError("strengths must lie in [0,1]");
    }
};

struct GroundTruthRow {
    std::string domain;
    std::string cls;
    double strength = 1.0;
    std::string identity;
};
using GroundTruth = std::vector<GroundTruthRow>;

struct Dataset {
    TrainingSet set;
    GroundTruth truth;
};

// Fixed canonical face layout: a stable anchor triangle followed by
// brow, eye and mouth points.
inline LandmarkVector canonical_template(std::size_t landmark_count) {
    static const LandmarkVector kTemplate = {
        {0.0, 0.0}, {4.0, 0.0}, {2.0, 3.0},                   // anchors
        {1.0, 2.2}, {3.0, 2.2},                               // brows
        {1.2, 1.8}, {2.8, 1.8},                               // eyes
        {1.4, 0.6}, {2.6, 0.6}, {2.0, 0.3},                   // mouth
    };
    if (landmark_count < 4 || landmark_count > kTemplate.size())
        throw ConfigError("canonical template supports 4..10 landmarks");
    return LandmarkVector(kTemplate.begin(), kTemplate.begin() + landmark_count);
}

namespace detail {

// Identity 0 is the canonical head; further identities get a fixed
// perturbation on the non-anchor landmarks, drawn once per (domain, identity).
inline std::vector<Vec2> identity_perturbation(const SynthSpec& spec, std::size_t domain_idx,
                                               std::size_t identity_idx) {
    std::vector<Vec2> eta(spec.landmark_count, Vec2{0.0, 0.0});
    if (identity_idx == 0 || spec.identity_sigma == 0.0) return eta;
    SplitMix64 rng = substream(spec.seed, 0x1d000000ULL + domain_idx * 4096 + identity_idx);
    for (std::size_t l = 0; l < spec.landmark_count; ++l) {
        bool anchor = false;
        for (std::size_t a : spec.anchor_indices) anchor = anchor || (a == l);
        if (anchor) continue;
        eta[l] = {spec.identity_sigma * rng.gaussian(), spec.identity_sigma * rng.gaussian()};
    }
    return eta;
}

}  // namespace detail

inline Dataset generate(const SynthSpec& spec) {
    spec.validate();
    const LandmarkVector base = canonical_template(spec.landmark_count);

    Dataset out;
    out.set.neutral_label = spec.neutral_class;
    for (const auto& d : spec.domains) out.set.domain_labels.push_back(d.id);
    for (const auto& c : spec.classes) out.set.class_labels.push_back(c.id);

    std::uint64_t sample_index = 0;
    for (std::size_t di = 0; di < spec.domains.size(); ++di) {
        const DomainSpec& dom = spec.domains[di];
        for (std::size_t ji = 0; ji < spec.identities_per_domain; ++ji) {
            const std::vector<Vec2> eta = detail::identity_perturbation(spec, di, ji);
            for (const auto& cls : spec.classes) {
                const bool neutral = (cls.id == spec.neutral_class);
                // The neutral face has no strength axis; emit it once.
                const std::vector<double> levels =
                    neutral ? std::vector<double>{0.0} : spec.strengths;
                for (double lambda : levels) {
                    SplitMix64 noise = substream(spec.seed, 0x0e000000ULL + sample_index);
                    LandmarkVector lm(spec.landmark_count);
                    for (std::size_t l = 0; l < spec.landmark_count; ++l) {
                        Vec2 p = base[l] + dom.translation + eta[l];
                        if (!dom.shape_perturbation.empty()) p += dom.shape_perturbation[l];
                        if (!neutral)
                            p += lambda * rotate(cls.displacement[l], dom.tuning_rotation);
                        if (spec.noise_sigma > 0.0)
                            p += Vec2{spec.noise_sigma * noise.gaussian(),
                                      spec.noise_sigma * noise.gaussian()};
                        lm[l] = p;
                    }
                    const std::string identity = "id" + std::to_string(ji);
                    out.set.samples.push_back({lm, dom.id, cls.id, lambda, identity});
                    out.truth.push_back({dom.id, cls.id, lambda, identity});
                    ++sample_index;
                }
            }
        }
    }
    return out;
}

// ---- Preset instances -------------------------------------------------

// BFS analogue: 3 head shapes x 5 identities x 7 expressions at full
// strength, 105 samples. Domains differ by a rigid translation plus a
// non-similarity anchor distortion so domain inference has signal.
inline SynthSpec bfs_spec(std::uint64_t seed = 1, double noise_sigma = 0.0,
                          double identity_sigma = 0.05) {
    SynthSpec spec;
    spec.landmark_count = 10;
    spec.seed = seed;
    spec.noise_sigma = noise_sigma;
    spec.identity_sigma = identity_sigma;
    spec.identities_per_domain = 5;

    auto zero_field = [] { return std::vector<Vec2>(10, Vec2{0.0, 0.0}); };

    DomainSpec human{"human", {0.0, 0.0}, {}, 0.0};
    DomainSpec monkey{"monkey", {12.0, 1.0}, zero_field(), 0.0};
    monkey.shape_perturbation[1] = {0.7, -0.2};   // wider jaw anchor
    monkey.shape_perturbation[2] = {-0.3, 0.5};   // taller brow anchor
    for (std::size_t l = 3; l < 10; ++l) monkey.shape_perturbation[l] = {0.4, -0.3};
    DomainSpec cartoon{"cartoon", {-10.0, 6.0}, zero_field(), 0.0};
    cartoon.shape_perturbation[0] = {-0.5, 0.3};
    cartoon.shape_perturbation[2] = {0.2, 0.9};
    for (std::size_t l = 3; l < 10; ++l) cartoon.shape_perturbation[l] = {-0.3, 0.5};
    spec.domains = {human, monkey, cartoon};

    // Six expressions: per-landmark directions fan out with the landmark
    // index; adjacent classes are 60 degrees apart everywhere.
    spec.classes.push_back({"neutral", zero_field()});
    static const char* kNames[6] = {"happy", "sad", "surprise", "anger", "fear", "disgust"};
    for (int m = 0; m < 6; ++m) {
        std::vector<Vec2> field = zero_field();
        for (std::size_t l = 3; l < 10; ++l) {
            const double angle = m * (6.283185307179586 / 6.0) + 0.2 * static_cast<double>(l);
            field[l] = rotate({1.0, 0.0}, angle);
        }
        spec.classes.push_back({kNames[m], field});
    }
    return spec;
}

// BFS-L analogue: one identity per domain, four strength levels, 75 samples.
inline SynthSpec bfsl_spec(std::uint64_t seed = 1, double noise_sigma = 0.0) {
    SynthSpec spec = bfs_spec(seed, noise_sigma, 0.0);
    spec.identities_per_domain = 1;
    spec.strengths = {0.25, 0.5, 0.75, 1.0};
    return spec;
}

enum class ToyMode { collinear, misaligned };

// Minimal two-domain, two-expression geometry. In collinear mode the class
// displacement fields carry over to the target head unchanged, so the
// norm-referenced classifier transfers perfectly while an absolute-space
// linear classifier trained on the source head misses both target
// expressions. In misaligned mode the target displacements are rotated
// by phi, breaking the shared-tuning assumption.
inline SynthSpec toy_spec(ToyMode mode, double phi = 3.14159265358979323846,
                           std::uint64_t seed = 1) {
    SynthSpec spec;
    spec.landmark_count = 5;
    spec.seed = seed;

    auto zero_field = [] { return std::vector<Vec2>(5, Vec2{0.0, 0.0}); };
    DomainSpec source{"source", {0.0, 0.0}, {}, 0.0};
    DomainSpec target{"target", {-3.0, -3.0}, zero_field(), 0.0};
    target.shape_perturbation[1] = {0.6, -0.3};  // anchor distortion: not a similarity
    target.shape_perturbation[2] = {-0.2, 0.5};
    target.shape_perturbation[3] = {-2.0, -2.0};
    target.shape_perturbation[4] = {-2.0, -2.0};
    if (mode == ToyMode::misaligned) target.tuning_rotation = phi;
    spec.domains = {source, target};

    std::vector<Vec2> e1 = zero_field(), e2 = zero_field();
    e1[3] = {1.0, 0.0};
    e1[4] = {1.0, 0.0};
    e2[3] = {0.0, 1.0};
    e2[4] = {0.0, 1.0};
    spec.classes = {{"neutral", zero_field()}, {"E1", e1}, {"E2", e2}};
    return spec;
}

inline Dataset toy_instance(ToyMode mode, double phi = 3.14159265358979323846,
                             std::uint64_t seed = 1) {
    return generate(toy_spec(mode, phi, seed));
}

// Template-selection stress instance: for every non-neutral class the pool
// holds a corrupted exemplar first (displacement field rotated in place) and
// the clean one second, so First picks the corrupted template.
inline Dataset corrupted_pool_instance(std::uint64_t seed = 1) {
    SynthSpec spec = bfs_spec(seed, 0.0, 0.0);
    spec.identities_per_domain = 1;
    Dataset clean = generate(spec);

    Dataset pool;
    pool.set.neutral_label = clean.set.neutral_label;
    pool.set.class_labels = clean.set.class_labels;
    pool.set.domain_labels = clean.set.domain_labels;

    const LandmarkVector base = canonical_template(spec.landmark_count);
    for (const auto& cls : spec.classes) {
        if (cls.id == spec.neutral_class) continue;
        LandmarkVector corrupted = base;
        for (std::size_t l = 0; l < spec.landmark_count; ++l)
            corrupted[l] += rotate(cls.displacement[l], 2.1);
        pool.set.samples.push_back({corrupted, "human", cls.id, 1.0, "corrupt"});
        pool.truth.push_back({"human", cls.id, 1.0, "corrupt"});
    }
    for (const auto& s : clean.set.samples) {
        pool.set.samples.push_back(s);
        pool.truth.push_back({s.domain, s.cls, s.strength, s.identity});
    }
    return pool;
}

}  // namespace mdnre
