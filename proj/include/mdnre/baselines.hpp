#pragma once

// Comparison methods operating in absolute landmark space, plus the
// single-reference ablation of the norm-referenced classifier.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdnre/common.hpp"
#include "mdnre/training.hpp"

namespace mdnre {

// Per-class affine score over flattened landmark coordinates.
struct LinearModel {
    // weights(m, j), j in [0, 2L] with the last column the bias
    Eigen::MatrixXd weights;
    std::vector<std::string> class_labels;
};

namespace detail {
inline Eigen::VectorXd flatten(const LandmarkVector& lm) {
    Eigen::VectorXd v(2 * lm.size() + 1);
    for (std::size_t l = 0; l < lm.size(); ++l) {
        v(2 * l) = lm[l].x;
        v(2 * l + 1) = lm[l].y;
    }
    v(2 * lm.size()) = 1.0;
    return v;
}
}  // namespace detail

// One-vs-rest regularized least squares with +-1 targets.
inline LinearModel fit_linear(const TrainingSet& train, double ridge = 1e-6) {
    if (train.samples.empty()) throw ConfigError("empty training set");
    if (ridge < 0.0) throw ConfigError("ridge must be >= 0");
    const std::size_t n = train.samples.size();
    const std::size_t L = train.samples.front().landmarks.size();
    const std::size_t dim = 2 * L + 1;
    const std::size_t M = train.class_labels.size();

    Eigen::MatrixXd X(n, dim);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(n, M, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        X.row(i) = detail::flatten(train.samples[i].landmarks).transpose();
        Y(i, train.class_index(train.samples[i].cls)) = 1.0;
    }

    Eigen::MatrixXd gram = X.transpose() * X;
    gram.diagonal().array() += ridge;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw NumericalError("normal equations are singular; raise the ridge parameter");
    LinearModel model;
    model.weights = (lu.solve(X.transpose() * Y)).transpose();
    model.class_labels = train.class_labels;
    return model;
}

inline std::size_t predict_linear(const LinearModel& model, const LandmarkVector& s) {
    const Eigen::VectorXd scores = model.weights * detail::flatten(s);
    std::size_t best = 0;
    for (Eigen::Index m = 1; m < scores.size(); ++m)
        if (scores(m) > scores(best)) best = static_cast<std::size_t>(m);
    return best;
}

inline const std::string& predict_linear_label(const LinearModel& model, const LandmarkVector& s) {
    return model.class_labels[predict_linear(model, s)];
}

// Nearest class centroid in flattened absolute space. Ties break to the
// lowest class index.
inline std::size_t fit_predict_centroid(const TrainingSet& train, const LandmarkVector& s) {
    if (train.samples.empty()) throw ConfigError("empty training set");
    const std::size_t M = train.class_labels.size();
    const std::size_t L = train.samples.front().landmarks.size();
    std::vector<LandmarkVector> centroid(M, LandmarkVector(L, Vec2{0.0, 0.0}));
    std::vector<std::size_t> count(M, 0);
    for (const auto& smp : train.samples) {
        const std::size_t m = train.class_index(smp.cls);
        for (std::size_t l = 0; l < L; ++l) centroid[m][l] += smp.landmarks[l];
        ++count[m];
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
        if (count[m] == 0) continue;
        double d = 0.0;
        for (std::size_t l = 0; l < L; ++l)
            d += squared_norm(s[l] - (1.0 / static_cast<double>(count[m])) * centroid[m][l]);
        if (d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return best;
}

// Ablation: the norm-referenced classifier restricted to a single reference
// frame (the source domain's neutral), pose-aligned per sample but applied
// to every test sample regardless of its true domain.
inline FittedModel single_reference_model(const FittedModel& full, const std::string& source_domain) {
    FittedModel ablated = full;
    ablated.frames = {detail::frame_for(full.frames, source_domain)};
    return ablated;
}

inline std::vector<std::string> single_reference_nre(const FittedModel& full,
                                                     const std::string& source_domain,
                                                     const std::vector<Sample>& test) {
    const FittedModel ablated = single_reference_model(full, source_domain);
    std::vector<std::string> out;
    out.reserve(test.size());
    for (const auto& s : test) out.push_back(ablated.predict_label(s.landmarks));
    return out;
}

}  // namespace mdnre
