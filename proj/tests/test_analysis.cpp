#include "harness_fixtures.hpp"
#include "tiny_model.hpp"

#include "gazecap/analysis.hpp"

#include <gtest/gtest.h>

using namespace gazecap;

TEST(Analysis, FullVisibilityEqualsUnmaskedAccuracy) {
    const auto set = oracle::harness_set(40, 1);
    const auto clf = oracle::harness_classifier(set);
    const Color fill = mean_color(set.images);
    const CurvePoint plain = unmasked_accuracy(set.images, set.labels, clf);
    EXPECT_GT(plain.accuracy, 0.0);
    EXPECT_LT(plain.accuracy, 1.0);
    for (const auto* maps : {&set.on_target, &set.off_target, &set.center}) {
        const auto curve = masked_accuracy_curve(set.images, *maps, set.labels, clf, {1.0}, fill);
        EXPECT_EQ(curve[0].accuracy, plain.accuracy);
        EXPECT_EQ(curve[0].n_images, plain.n_images);
    }
}

TEST(Analysis, OnTargetCurveDominatesOffTarget) {
    const auto set = oracle::harness_set(40, 2);
    const auto clf = oracle::harness_classifier(set);
    const Color fill = mean_color(set.images);
    const auto ratios = oracle::interior_ratios();
    const auto on = masked_accuracy_curve(set.images, set.on_target, set.labels, clf, ratios, fill);
    const auto off = masked_accuracy_curve(set.images, set.off_target, set.labels, clf, ratios, fill);
    bool strict = false;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        EXPECT_GE(on[k].accuracy, off[k].accuracy) << "ratio " << ratios[k];
        strict = strict || on[k].accuracy > off[k].accuracy;
    }
    EXPECT_TRUE(strict);
}

TEST(Analysis, InputIgnoringClassifierGivesFlatCurve) {
    const auto set = oracle::harness_set(20, 3);
    const ConstantClassifier clf(RowVector::Zero(3));
    const auto curve =
        masked_accuracy_curve(set.images, set.on_target, set.labels, clf, oracle::interior_ratios(), Color{0, 0, 0});
    for (const auto& p : curve) EXPECT_EQ(p.accuracy, curve.front().accuracy);
}

TEST(Analysis, SubsetsSkipAndErrors) {
    auto set = oracle::harness_set(6, 4);
    const auto clf = oracle::harness_classifier(set);
    set.labels["h0"].mentioned.clear();
    const auto c = masked_accuracy_curve(set.images, set.on_target, set.labels, clf, {0.5}, Color{0, 0, 0},
                                         LabelSubset::mentioned);
    EXPECT_EQ(c[0].n_images, 5);
    EXPECT_EQ(masked_accuracy_curve(set.images, set.on_target, set.labels, clf, {0.5}, Color{0, 0, 0},
                                    LabelSubset::ignored)[0].n_images, 0);
    auto maps = set.on_target;
    maps.erase("h1");
    EXPECT_THROW(masked_accuracy_curve(set.images, maps, set.labels, clf, {0.5}, Color{0, 0, 0}), InputError);
    EXPECT_THROW(masked_accuracy_curve(set.images, set.on_target, set.labels, clf, {1.5}, Color{0, 0, 0}), InputError);
    EXPECT_THROW(parse_label_subset("most"), InputError);
}

TEST(Analysis, TopKTieBreak) {
    RowVector s(4);
    s << 0.2, 0.5, 0.5, 0.1;
    EXPECT_TRUE(topk_hit(s, {1}));
    EXPECT_FALSE(topk_hit(s, {2}));
    EXPECT_TRUE(topk_hit(s, {2, 3}));
    EXPECT_TRUE(topk_hit(RowVector::Zero(3), {0}));
}

TEST(Analysis, OcclusionMatchesBruteForce) {
    RgbImage img(8, 8);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            img.set(y, x, static_cast<std::uint8_t>(17 * y + 3 * x), static_cast<std::uint8_t>(29 * x),
                    static_cast<std::uint8_t>((y * x * 11) % 256));
        }
    }
    const RegionBrightnessClassifier clf(Region{2, 3, 4, 3});
    const Color fill{10, 20, 30};
    const ImportanceMap m = occlusion_importance(img, 0, clf, 3, 2, 2, fill);
    ASSERT_EQ(m.values.rows(), 3);
    ASSERT_EQ(m.values.cols(), 4);
    const Real base = clf.scores(img)(0);
    for (int gy = 0; gy < 3; ++gy) {
        for (int gx = 0; gx < 4; ++gx) {
            RgbImage occ = img;
            for (int y = gy * 2; y < gy * 2 + 3; ++y) {
                for (int x = gx * 2; x < gx * 2 + 2; ++x) occ.set(y, x, fill[0], fill[1], fill[2]);
            }
            EXPECT_EQ(m.values(gy, gx), base - clf.scores(occ)(0)) << gy << "," << gx;
        }
    }
}

TEST(Analysis, OcclusionLocalizesRegionOracle) {
    // Bright region on a dark ground, occluded with black: importance is
    // positive inside, zero outside.
    RgbImage img(32, 32, 40);
    const Region r{8, 12, 10, 8};
    oracle::fill_rect(img, r.y0, r.x0, r.height, r.width, Color{230, 230, 230});
    const RegionBrightnessClassifier clf(r);
    const ImportanceMap m = occlusion_importance(img, 0, clf, 6, 6, 2, Color{0, 0, 0});
    for (int gy = 0; gy < m.values.rows(); ++gy) {
        for (int gx = 0; gx < m.values.cols(); ++gx) {
            if (m.window_at(gy, gx).intersects(r)) {
                EXPECT_GT(m.values(gy, gx), 0.0);
            } else {
                EXPECT_EQ(m.values(gy, gx), 0.0);
            }
        }
    }
    EXPECT_GE(oracle::positive_mass_share(m, r), 0.9);

    const auto set = oracle::harness_set(5, 6);
    const auto color_clf = oracle::harness_classifier(set);
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        if (i % 5 == 4) continue;  // labeled with the decoy, which the classifier never sees
        const auto& im = set.images[i];
        const int label = set.labels.at(im.id).labels[0];
        const ImportanceMap cm = occlusion_importance(im.image, label, color_clf, 8, 8, 4, mean_color(set.images));
        EXPECT_GE(oracle::positive_mass_share(cm, set.target), 0.9) << im.id;
    }
}

TEST(Analysis, InputIgnoringClassifierGivesZeroImportance) {
    const auto set = oracle::harness_set(3, 7);
    const ConstantClassifier clf(RowVector::LinSpaced(3, 0.1, 0.3));
    for (const auto& im : set.images) {
        EXPECT_TRUE(occlusion_importance(im.image, 1, clf, 8, 8, 4, Color{0, 0, 0}).values.isZero());
    }
    EXPECT_THROW(occlusion_importance(set.images[0].image, 1, clf, 60, 8, 4, Color{0, 0, 0}), InputError);
    EXPECT_THROW(occlusion_importance(set.images[0].image, 5, clf, 8, 8, 4, Color{0, 0, 0}), InputError);
}

TEST(Analysis, OverlayAndEqualization) {
    ImportanceMap a, b;
    for (ImportanceMap* m : {&a, &b}) {
        m->window_h = m->window_w = 4;
        m->stride = 2;
        m->image_h = m->image_w = 8;
    }
    a.values.resize(2, 2);
    b.values.resize(2, 2);
    a.values << 1.0, 2.0, 3.0, 4.0;
    b.values << 3.0, 0.0, 3.0, -2.0;
    const ImportanceOverlay o = mean_importance_overlay({a, b});
    DenseMap want(2, 2);
    want << 2.0, 1.0, 3.0, 1.0;
    EXPECT_EQ(o.mean, want);
    DenseMap eq(2, 2);
    eq << 2.0 / 3.0, 0.5 / 3.0, 1.0, 0.5 / 3.0;
    EXPECT_EQ(o.equalized, eq);

    ImportanceMap flat = a;
    flat.values.setConstant(0.7);
    EXPECT_TRUE((mean_importance_overlay({flat}).equalized.array() == 0.5).all());

    const DenseMap r = oracle::random_matrix(5, 5, 3);
    const DenseMap e = rank_equalize(r);
    for (Index i = 0; i < r.size(); ++i) {
        for (Index j = 0; j < r.size(); ++j) {
            if (r.data()[i] < r.data()[j]) {
                EXPECT_LT(e.data()[i], e.data()[j]);
            }
        }
    }
    EXPECT_EQ(e.minCoeff(), 0.0);
    EXPECT_EQ(e.maxCoeff(), 1.0);

    ImportanceMap other = a;
    other.stride = 3;
    EXPECT_THROW(mean_importance_overlay({a, other}), InputError);
    EXPECT_THROW(mean_importance_overlay({}), InputError);
}

TEST(Analysis, MaskingHelpers) {
    RgbImage img(2, 2, 50);
    BooleanMap mask(2, 2);
    mask << 1, 0, 0, 1;
    const RgbImage out = apply_mask(img, mask, Color{1, 2, 3});
    EXPECT_EQ(out.at(0, 0, 0), 50);
    EXPECT_EQ(out.at(0, 1, 2), 3);
    EXPECT_THROW(apply_mask(img, BooleanMap::Ones(3, 3), Color{0, 0, 0}), InputError);
    RgbImage other(2, 2, 101);
    const Color m = mean_color({{"a", img}, {"b", other}});
    EXPECT_EQ(m, (Color{76, 76, 76}));  // 75.5 rounds away from zero
}
