#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mdnre/io.hpp>
#include <mdnre/mdnre.hpp>

using namespace mdnre;

namespace {
const std::vector<std::size_t> kAnchors = {0, 1, 2};

// Tiny hand-built world: one or two domains, base face plus per-class
// displacements on the two expressive landmarks.
LandmarkVector base_face() { return {{0, 0}, {4, 0}, {2, 3}, {1, 1}, {3, 1}}; }

LandmarkVector displaced(const LandmarkVector& b, Vec2 d3, Vec2 d4) {
    LandmarkVector out = b;
    out[3] += d3;
    out[4] += d4;
    return out;
}

TrainingSet tiny_set() {
    TrainingSet set;
    set.class_labels = {"neutral", "a", "b"};
    set.domain_labels = {"d1", "d2"};
    LandmarkVector b1 = base_face();
    LandmarkVector b2 = base_face();
    for (auto& p : b2) p += {7, 0};
    b2[2] += {0.3, 0.4};  // distinct anchor geometry
    set.samples = {
        {b1, "d1", "neutral", 0.0, "id0"},
        {b2, "d2", "neutral", 0.0, "id0"},
        {displaced(b1, {1, 0}, {1, 0}), "d1", "a", 1.0, "id0"},
        {displaced(b1, {0, 1}, {0, 1}), "d1", "b", 1.0, "id0"},
        {displaced(b2, {1, 0}, {1, 0}), "d2", "a", 1.0, "id0"},
        {displaced(b2, {0, 1}, {0, 1}), "d2", "b", 1.0, "id0"},
    };
    return set;
}
}  // namespace

TEST_CASE("fit_references: frames reproduce inputs verbatim") {
    LandmarkVector n1 = base_face(), n2 = base_face(), n3 = base_face();
    for (auto& p : n2) p += {5, 1};
    for (auto& p : n3) p += {-4, 2};
    auto frames = fit_references({{n1, "x"}, {n2, "y"}, {n3, "z"}}, kAnchors);
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].landmarks == n1);
    CHECK(frames[1].landmarks == n2);
    CHECK(frames[2].landmarks == n3);
}

TEST_CASE("fit_references: single domain degenerates to one frame") {
    auto frames = fit_references({{base_face(), "only"}}, kAnchors);
    CHECK(frames.size() == 1);
}

TEST_CASE("fit_references: duplicate domain throws") {
    CHECK_THROWS_AS(fit_references({{base_face(), "x"}, {base_face(), "x"}}, kAnchors),
                    ConfigError);
    CHECK_THROWS_AS(fit_references({}, kAnchors), ConfigError);
}

TEST_CASE("frames round-trip through model serialization bit-exactly") {
    TrainingSet set = tiny_set();
    FitOptions opt;
    opt.source_domain = "d1";
    FittedModel model = fit(set, opt);
    save_model(model, "/tmp/mdnre_model_test.json");
    FittedModel back = load_model("/tmp/mdnre_model_test.json");
    REQUIRE(back.frames.size() == model.frames.size());
    for (std::size_t f = 0; f < model.frames.size(); ++f) {
        CHECK(back.frames[f].domain == model.frames[f].domain);
        CHECK(back.frames[f].landmarks == model.frames[f].landmarks);
    }
    CHECK(back.bank.calib == model.bank.calib);
    CHECK(back.neutral_threshold == model.neutral_threshold);
    for (std::size_t l = 0; l < model.bank.directions.size(); ++l)
        for (std::size_t m = 0; m < model.bank.class_count(); ++m)
            CHECK(back.bank.directions[l][m] == model.bank.directions[l][m]);
}

TEST_CASE("fit_tuning: definition unrolled on a known displacement") {
    auto frames = fit_references({{base_face(), "d1"}}, kAnchors);
    LandmarkVector ex = displaced(base_face(), {3, 4}, {0, 2});
    auto bank = fit_tuning({{ex, "a", "d1"}}, frames, {"neutral", "a"}, "neutral");
    CHECK(bank.directions[3][1].x == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(bank.directions[3][1].y == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(bank.directions[4][1].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bank.directions[4][1].y == doctest::Approx(1.0).epsilon(1e-12));
    // untouched landmarks store the exact zero vector
    CHECK(bank.directions[0][1] == Vec2{0, 0});
    CHECK(bank.calib[1] == doctest::Approx(5.0 + 2.0).epsilon(1e-12));
    CHECK(bank.calib[bank.neutral_index] == 0.0);
    CHECK_NOTHROW(bank.validate());
}

TEST_CASE("fit_tuning: zero-displacement exemplar for a non-neutral class throws") {
    auto frames = fit_references({{base_face(), "d1"}}, kAnchors);
    CHECK_THROWS_AS(fit_tuning({{base_face(), "a", "d1"}}, frames, {"neutral", "a"}, "neutral"),
                    CalibrationError);
}

TEST_CASE("fit_tuning: unit or zero directions over random training sets") {
    SplitMix64 rng(15);
    for (int rep = 0; rep < 100; ++rep) {
        auto frames = fit_references({{base_face(), "d1"}}, kAnchors);
        LandmarkVector ex = base_face();
        for (std::size_t l = 3; l < ex.size(); ++l)
            if (rng.uniform01() < 0.7)
                ex[l] += {2 * (rng.uniform01() - 0.5), 2 * (rng.uniform01() - 0.5)};
        TuningBank bank;
        try {
            bank = fit_tuning({{ex, "a", "d1"}}, frames, {"neutral", "a"}, "neutral");
        } catch (const CalibrationError&) {
            continue;
        }
        for (const auto& row : bank.directions)
            for (const auto& n : row) {
                const double len = norm(n);
                CHECK((len == 0.0 || std::abs(len - 1.0) <= 1e-12));
            }
    }
}

TEST_CASE("BFS training budget: 3 neutrals + 6 exemplars = 9 images") {
    Dataset d = generate(bfs_spec(3, 0.0, 0.05));
    FitOptions opt;
    opt.source_domain = "human";
    FittedModel model = fit(d.set, opt);
    CHECK(model.frames.size() == 3);
    // 6 non-neutral tuning classes on top of the 3 reference images
    std::size_t tuned = 0;
    for (std::size_t m = 0; m < model.bank.class_count(); ++m)
        if (m != model.bank.neutral_index && model.bank.calib[m] > 0.0) ++tuned;
    CHECK(tuned == 6);
}

TEST_CASE("training-exemplar fidelity under a low threshold") {
    TrainingSet set = tiny_set();
    FitOptions opt;
    opt.source_domain = "d1";
    FittedModel model = fit(set, opt);
    CHECK(model.neutral_threshold < model.bank.min_nonneutral_calib());
    for (const auto& s : set.samples) CHECK(model.predict_label(s.landmarks) == s.cls);
}

TEST_CASE("missing neutral for a domain throws") {
    TrainingSet set = tiny_set();
    set.samples.erase(set.samples.begin() + 1);  // drop d2's neutral
    FitOptions opt;
    opt.source_domain = "d1";
    CHECK_THROWS_AS(fit(set, opt), ConfigError);
}

TEST_CASE("optimize_templates: forced choice and no-alternative pools") {
    TrainingSet set = tiny_set();
    FitOptions opt;
    opt.source_domain = "d1";
    auto frames = fit_references({{set.samples[0].landmarks, "d1"},
                                  {set.samples[1].landmarks, "d2"}},
                                 kAnchors);
    auto res = optimize_templates(set, frames, set, opt);
    // one candidate per class: chosen exemplars are the First ones
    CHECK(res.chosen.size() == 2);
    CHECK(res.first_accuracy == res.optimized_accuracy);
    CHECK(res.model.bank.calib == fit(set, opt).bank.calib);
}

TEST_CASE("optimize_templates: picks the clean exemplar over a corrupted first") {
    Dataset pool = corrupted_pool_instance(5);
    Dataset eval = generate(bfs_spec(5, 0.0, 0.0));
    FitOptions opt;
    opt.source_domain = "human";
    TrainingSet fit_pool = detail::training_pool(pool.set);
    auto frames = fit_references(detail::first_neutrals(fit_pool), kAnchors);
    auto res = optimize_templates(fit_pool, frames, eval.set, opt);
    CHECK(res.optimized_accuracy > res.first_accuracy);
    CHECK(res.optimized_accuracy == doctest::Approx(1.0));
    // every chosen exemplar classifies to its own class under the new model
    for (const auto& ex : res.chosen)
        CHECK(res.model.predict_label(ex.landmarks) == ex.cls);
}

TEST_CASE("optimize_templates never scores below First") {
    SplitMix64 rng(99);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Dataset d = generate(bfs_spec(seed, 0.15, 0.1));
        FitOptions opt;
        opt.source_domain = "human";
        TrainingSet fit_pool = detail::training_pool(d.set);
        auto frames = fit_references(detail::first_neutrals(fit_pool), kAnchors);
        auto res = optimize_templates(fit_pool, frames, d.set, opt);
        CHECK(res.optimized_accuracy >= res.first_accuracy);
    }
}
