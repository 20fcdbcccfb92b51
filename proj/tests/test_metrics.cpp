#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groundkit/metrics.hpp"
#include "groundkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace groundkit::metrics;
using groundkit::geom::Box;
using groundkit::rng::Rng;

namespace {

Box shifted(const Box& b, double dx, double dy = 0.0) {
    return {b.xmin + dx, b.ymin + dy, b.xmax + dx, b.ymax + dy};
}

GroundTruthSet single_category_gt(const std::map<int, std::vector<Box>>& boxes_by_image) {
    GroundTruthSet gt;
    gt.categories.push_back({1, "thing", FrequencyTag::kUnknown});
    for (const auto& [image, boxes] : boxes_by_image)
        for (const Box& box : boxes) gt.by_image[image].push_back({box, 1, false});
    return gt;
}

DetectionSet detections_from(const GroundTruthSet& gt, double confidence = 1.0) {
    DetectionSet out;
    for (const auto& [image, boxes] : gt.by_image)
        for (const GtBox& g : boxes)
            out.by_image[image].push_back({g.box, g.category_id, confidence});
    return out;
}

} // namespace

TEST_CASE("match_image pairs a detection with its best gt") {
    std::vector<GtBox> gts = {
        {{0, 0, 10, 10}, 1, false},
        {{20, 0, 30, 10}, 1, false},
    };
    std::vector<DetBox> dets = {
        {{1, 0, 11, 10}, 1, 0.9},
        {{20, 0, 30, 10}, 1, 0.8},
    };
    ImageMatch match = match_image(dets, gts, 0.5);
    CHECK(match.det_to_gt == std::vector<std::ptrdiff_t>{0, 1});
    CHECK(match.gt_matched == std::vector<char>{1, 1});
    CHECK(match.det_ignored == std::vector<char>{0, 0});
}

TEST_CASE("match_image respects categories") {
    std::vector<GtBox> gts = {{{0, 0, 10, 10}, 2, false}};
    std::vector<DetBox> dets = {{{0, 0, 10, 10}, 1, 0.9}};
    ImageMatch match = match_image(dets, gts, 0.5);
    CHECK(match.det_to_gt == std::vector<std::ptrdiff_t>{-1});
}

TEST_CASE("higher confidence claims the contested gt") {
    std::vector<GtBox> gts = {{{0, 0, 10, 10}, 1, false}};
    std::vector<DetBox> dets = {
        {{0, 0, 10, 9}, 1, 0.3},
        {{0, 0, 10, 10}, 1, 0.7},
    };
    ImageMatch match = match_image(dets, gts, 0.5);
    // Detection 1 is visited first (higher confidence) and wins.
    CHECK(match.det_to_gt == std::vector<std::ptrdiff_t>{-1, 0});

    // Unscored: input order decides, detection 0 wins.
    ImageMatch in_order = match_image(dets, gts, 0.5, false);
    CHECK(in_order.det_to_gt == std::vector<std::ptrdiff_t>{0, -1});
}

TEST_CASE("equal-IoU candidates resolve to the lowest gt index") {
    std::vector<GtBox> gts = {
        {{0, 0, 10, 10}, 1, false},
        {{0, 0, 10, 10}, 1, false},
    };
    std::vector<DetBox> dets = {{{0, 0, 10, 10}, 1, 0.9}};
    ImageMatch match = match_image(dets, gts, 0.5);
    CHECK(match.det_to_gt == std::vector<std::ptrdiff_t>{0});
}

TEST_CASE("ignored gts absorb detections without matching") {
    std::vector<GtBox> gts = {
        {{0, 0, 10, 10}, 1, true},
        {{30, 30, 40, 40}, 1, false},
    };
    std::vector<DetBox> dets = {
        {{0, 0, 10, 10}, 1, 0.9},
        {{1, 0, 11, 10}, 1, 0.8},
        {{30, 30, 40, 40}, 1, 0.7},
    };
    ImageMatch match = match_image(dets, gts, 0.5);
    // Both overlapping detections are absorbed by the single ignored gt.
    CHECK(match.det_ignored == std::vector<char>{1, 1, 0});
    CHECK(match.det_to_gt[2] == 1);

    PrCounts counts;
    GroundTruthSet gt;
    gt.categories.push_back({1, "thing", FrequencyTag::kUnknown});
    gt.by_image[0] = gts;
    DetectionSet ds;
    ds.by_image[0] = dets;
    counts = precision_recall(gt, ds, 0.5);
    CHECK(counts.tp == 1);
    CHECK(counts.fp == 0);
    CHECK(counts.fn == 0);
}

TEST_CASE("non-ignored gt wins over an ignored one") {
    std::vector<GtBox> gts = {
        {{0, 0, 10, 10}, 1, true},
        {{0, 0, 10, 10}, 1, false},
    };
    std::vector<DetBox> dets = {{{0, 0, 10, 10}, 1, 0.9}};
    ImageMatch match = match_image(dets, gts, 0.5);
    CHECK(match.det_to_gt == std::vector<std::ptrdiff_t>{1});
    CHECK(match.det_ignored == std::vector<char>{0});
}

TEST_CASE("match_image validates the threshold") {
    CHECK_THROWS_AS(match_image({}, {}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(match_image({}, {}, 1.5), std::invalid_argument);
    CHECK_NOTHROW(match_image({}, {}, 1.0));
}

TEST_CASE("precision and recall with empty inputs") {
    PrCounts none;
    CHECK(none.precision() == 1.0);
    CHECK(none.recall() == 1.0);

    PrCounts misses{0, 0, 3};
    CHECK(misses.precision() == 0.0);
    CHECK(misses.recall() == 0.0);

    PrCounts noise{0, 4, 0};
    CHECK(noise.precision() == 0.0);
    CHECK(noise.recall() == 1.0);
}

TEST_CASE("precision_recall pools per-image counts") {
    GroundTruthSet gt = single_category_gt({
        {0, {{0, 0, 10, 10}, {20, 20, 30, 30}}},
        {1, {{0, 0, 10, 10}}},
    });
    DetectionSet dets;
    dets.by_image[0] = {
        {{0, 0, 10, 10}, 1, 0.9},   // TP
        {{50, 50, 60, 60}, 1, 0.8}, // FP
    };
    // Image 1 has gt but no detections: one FN. Image 2 has detections
    // but no gt: one FP.
    dets.by_image[2] = {{{0, 0, 10, 10}, 1, 0.7}};
    PrCounts counts = precision_recall(gt, dets, 0.5);
    CHECK(counts.tp == 1);
    CHECK(counts.fp == 2);
    CHECK(counts.fn == 2);
    CHECK(counts.precision() == doctest::Approx(1.0 / 3.0));
    CHECK(counts.recall() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("a gt set evaluated against itself is perfect") {
    Rng rng(42);
    GroundTruthSet gt;
    for (int c = 1; c <= 3; ++c)
        gt.categories.push_back({c, "cat" + std::to_string(c), FrequencyTag::kUnknown});
    for (int image = 0; image < 5; ++image) {
        for (int k = 0; k < 8; ++k) {
            double x = rng.uniform(0, 800);
            double y = rng.uniform(0, 800);
            Box box{x, y, x + rng.uniform(5, 100), y + rng.uniform(5, 100)};
            gt.by_image[image].push_back({box, rng.uniform_int(1, 3), false});
        }
    }
    DetectionSet dets = detections_from(gt);
    PrCounts counts = precision_recall(gt, dets, 0.5);
    CHECK(counts.fp == 0);
    CHECK(counts.fn == 0);
    CHECK(counts.precision() == 1.0);
    CHECK(counts.recall() == 1.0);

    // Exact 1.0, not approximately: every precision sample is exactly 1.
    ApResult ap = average_precision(gt, dets, 0.5);
    CHECK(ap.mean == 1.0);
    ApResult sweep = averaged_over_iou(gt, dets);
    CHECK(sweep.mean == 1.0);
}

TEST_CASE("average_precision rejects unscored detections") {
    GroundTruthSet gt = single_category_gt({{0, {{0, 0, 10, 10}}}});
    DetectionSet dets = detections_from(gt);
    dets.scored = false;
    CHECK_THROWS_AS(average_precision(gt, dets, 0.5), std::invalid_argument);
}

TEST_CASE("average_precision on a hand-computed ranking") {
    // One category, 2 gts, 3 detections ranked by confidence:
    //   rank 1: TP  (p=1/1, r=1/2)
    //   rank 2: FP  (p=1/2)
    //   rank 3: TP  (p=2/3, r=2/2)
    GroundTruthSet gt = single_category_gt({
        {0, {{0, 0, 10, 10}, {100, 100, 110, 110}}},
    });
    DetectionSet dets;
    dets.by_image[0] = {
        {{0, 0, 10, 10}, 1, 0.9},
        {{50, 50, 60, 60}, 1, 0.8},
        {{100, 100, 110, 110}, 1, 0.7},
    };
    ApResult ap = average_precision(gt, dets, 0.5);
    // Envelope: precision 1.0 for recall <= 0.5, 2/3 above. 101-point grid:
    // 51 samples at 1.0, 50 at 2/3.
    double expected = (51.0 * 1.0 + 50.0 * (2.0 / 3.0)) / 101.0;
    CHECK(ap.mean == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(ap.per_category.count(1) == 1);
    CHECK(ap.per_category.at(1) == doctest::Approx(expected));
}

TEST_CASE("precision envelope erases a mid-ranking dip") {
    // TP FP TP -> raw precisions 1, 1/2, 2/3. The envelope lifts the
    // middle so AP only depends on values at recall steps.
    GroundTruthSet gt = single_category_gt({{0, {{0, 0, 10, 10}, {30, 30, 40, 40}}}});
    DetectionSet dets;
    dets.by_image[0] = {
        {{0, 0, 10, 10}, 1, 0.9},
        {{70, 70, 80, 80}, 1, 0.8},
        {{30, 30, 40, 40}, 1, 0.7},
    };
    ApResult with_dip = average_precision(gt, dets, 0.5);

    // Same recalls, but the FP ranked last: precisions 1, 1 at the two
    // recall steps. AP must be strictly better.
    DetectionSet clean;
    clean.by_image[0] = {
        {{0, 0, 10, 10}, 1, 0.9},
        {{30, 30, 40, 40}, 1, 0.8},
        {{70, 70, 80, 80}, 1, 0.7},
    };
    ApResult no_dip = average_precision(gt, clean, 0.5);
    CHECK(no_dip.mean > with_dip.mean);
    CHECK(no_dip.mean == doctest::Approx(1.0));
}

TEST_CASE("macro average treats categories equally regardless of size") {
    GroundTruthSet gt;
    gt.categories.push_back({1, "big", FrequencyTag::kUnknown});
    gt.categories.push_back({2, "small", FrequencyTag::kUnknown});
    for (int k = 0; k < 9; ++k) {
        Box box{k * 20.0, 0, k * 20.0 + 10, 10};
        gt.by_image[0].push_back({box, 1, false});
    }
    gt.by_image[0].push_back({{0, 100, 10, 110}, 2, false});

    // Category 1 fully detected; category 2 completely missed.
    DetectionSet dets;
    for (int k = 0; k < 9; ++k)
        dets.by_image[0].push_back({{k * 20.0, 0, k * 20.0 + 10, 10}, 1, 0.9});
    ApResult ap = average_precision(gt, dets, 0.5);
    CHECK(ap.per_category.at(1) == doctest::Approx(1.0));
    CHECK(ap.per_category.at(2) == doctest::Approx(0.0));
    CHECK(ap.mean == doctest::Approx(0.5));
}

TEST_CASE("categories without gt are excluded from the macro mean") {
    GroundTruthSet gt;
    gt.categories.push_back({1, "present", FrequencyTag::kUnknown});
    gt.categories.push_back({2, "absent", FrequencyTag::kUnknown});
    gt.by_image[0].push_back({{0, 0, 10, 10}, 1, false});
    DetectionSet dets;
    dets.by_image[0] = {{{0, 0, 10, 10}, 1, 0.9}};
    // A stray detection for the absent category must not create a bucket.
    dets.by_image[0].push_back({{50, 50, 60, 60}, 2, 0.8});
    ApResult ap = average_precision(gt, dets, 0.5);
    CHECK(ap.per_category.size() == 1);
    CHECK(ap.per_category.count(1) == 1);
    CHECK(ap.mean == doctest::Approx(1.0));
}

TEST_CASE("averaged_over_iou decays as boxes drift") {
    GroundTruthSet gt = single_category_gt({{0, {{0, 0, 100, 100}}}});
    DetectionSet perfect = detections_from(gt);
    // Offset by 10: IoU ~ 0.8 -> fails the strictest thresholds only.
    DetectionSet drifted;
    drifted.by_image[0] = {{shifted(Box{0, 0, 100, 100}, 10), 1, 0.9}};
    ApResult exact = averaged_over_iou(gt, perfect);
    ApResult loose = averaged_over_iou(gt, drifted);
    CHECK(exact.mean == 1.0);
    CHECK(loose.mean < 1.0);
    CHECK(loose.mean > 0.0);
}

TEST_CASE("frequency buckets fill only when tagged categories have gt") {
    GroundTruthSet gt;
    gt.categories.push_back({1, "a", FrequencyTag::kRare});
    gt.categories.push_back({2, "b", FrequencyTag::kFrequent});
    gt.categories.push_back({3, "c", FrequencyTag::kCommon});
    gt.by_image[0].push_back({{0, 0, 10, 10}, 1, false});
    gt.by_image[0].push_back({{20, 20, 30, 30}, 2, false});
    // Category 3 has no gt: common bucket stays empty.
    DetectionSet dets;
    dets.by_image[0] = {
        {{0, 0, 10, 10}, 1, 0.9},
        {{100, 100, 110, 110}, 2, 0.8},
    };
    FrequencyApResult buckets = frequency_ap(gt, dets, 0.5);
    REQUIRE(buckets.rare.has_value());
    REQUIRE(buckets.frequent.has_value());
    CHECK_FALSE(buckets.common.has_value());
    CHECK(*buckets.rare == doctest::Approx(1.0));
    CHECK(*buckets.frequent == doctest::Approx(0.0));
}

TEST_CASE("referring accuracy uses a strict 0.5 cutoff") {
    std::vector<std::pair<Box, Box>> pairs;
    CHECK(referring_accuracy(pairs) == 1.0);

    Box gt{0, 0, 10, 10};
    pairs.push_back({gt, gt});                        // IoU 1
    pairs.push_back({shifted(gt, 20), gt});           // IoU 0
    // IoU exactly 0.5: 10x10 vs 10x5 contained -> 50/100. Strictly above
    // is required, so this pair does not count.
    pairs.push_back({{0, 0, 10, 5}, gt});
    CHECK(referring_accuracy(pairs) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("semantic_iou compares token sets") {
    CHECK(semantic_iou("a red car", "red car") == doctest::Approx(2.0 / 3.0));
    CHECK(semantic_iou("The Red Car", "red car the") == 1.0);
    CHECK(semantic_iou("cat", "dog") == 0.0);
    CHECK(semantic_iou("", "") == 1.0);
    CHECK(semantic_iou("cat", "") == 0.0);
    // Punctuation is not a token.
    CHECK(semantic_iou("car, red!", "red car") == 1.0);
    // Duplicates collapse.
    CHECK(semantic_iou("very very big", "very big") == 1.0);
}

TEST_CASE("hashed embedder is deterministic and token-order invariant") {
    HashedBagEmbedder embedder(64);
    std::vector<double> a = embedder.embed("a red car");
    std::vector<double> b = embedder.embed("car red a");
    CHECK(a == b);
    REQUIRE(a.size() == 64);
    std::vector<double> c = embedder.embed("a blue car");
    CHECK(a != c);
}

TEST_CASE("semantic similarity bounds and identities") {
    CHECK(semantic_similarity("a red car", "a red car") == doctest::Approx(1.0));
    CHECK(semantic_similarity("", "") == 1.0);
    CHECK(semantic_similarity("cat", "") == 0.5);

    Rng rng(7);
    std::vector<std::string> vocabulary = {"cat", "dog", "red", "blue", "big",
                                           "small", "left", "right", "car", "tree"};
    for (int i = 0; i < 500; ++i) {
        std::string a, b;
        for (int w = 0; w < 4; ++w) {
            a += vocabulary[rng.uniform_index(vocabulary.size())] + " ";
            b += vocabulary[rng.uniform_index(vocabulary.size())] + " ";
        }
        double s = semantic_similarity(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s == doctest::Approx(semantic_similarity(b, a)));
    }
}

TEST_CASE("similar phrases score higher than unrelated ones") {
    double close = semantic_similarity("a red car on the road", "the red car on a road");
    double far = semantic_similarity("a red car on the road", "two yellow birds flying");
    CHECK(close > far);
}
