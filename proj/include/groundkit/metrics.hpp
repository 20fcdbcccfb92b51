#pragma once

// Detection-quality metrics: greedy IoU matching, dataset precision/recall,
// interpolated average precision, frequency-bucketed AP, referring accuracy,
// and phrase-level semantic scores.

#include "groundkit/geometry.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace groundkit::metrics {

enum class FrequencyTag { kUnknown, kRare, kCommon, kFrequent };

struct Category {
    int id = 0;
    std::string name;
    FrequencyTag frequency = FrequencyTag::kUnknown;
};

struct GtBox {
    geom::Box box;
    int category_id = 0;
    /// Ignored boxes absorb detections without counting as TP, FP, or FN.
    bool ignore = false;
};

struct DetBox {
    geom::Box box;
    int category_id = 0;
    double confidence = 0.0;
};

struct GroundTruthSet {
    std::map<int, std::vector<GtBox>> by_image;
    std::vector<Category> categories;
};

struct DetectionSet {
    std::map<int, std::vector<DetBox>> by_image;
    /// Unscored sets (index-selection outputs) keep their given order and
    /// support only precision/recall, not ranked AP.
    bool scored = true;
};

struct ImageMatch {
    /// Matched gt index per detection, -1 when unmatched.
    std::vector<std::ptrdiff_t> det_to_gt;
    /// Detections absorbed by an ignored gt; excluded from both TP and FP.
    std::vector<char> det_ignored;
    std::vector<char> gt_matched;
};

/// Greedy one-to-one matching for a single image and category-aware IoU
/// threshold. Scored detections are visited in descending confidence
/// (ties by input order); unscored ones in input order. Each detection
/// takes the highest-IoU unmatched gt of its category with IoU >= the
/// threshold, lowest gt index on ties. Non-ignored candidates win over
/// ignored ones; ignored gts may absorb any number of detections.
ImageMatch match_image(const std::vector<DetBox>& detections,
                       const std::vector<GtBox>& ground_truth,
                       double iou_threshold, bool scored = true);

struct PrCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    /// No detections: 0 when any gt exists, otherwise 1.
    double precision() const;
    /// No gt: 1.
    double recall() const;
};

/// Dataset-level counts pooled over every image (matching stays per-image).
PrCounts precision_recall(const GroundTruthSet& gt, const DetectionSet& detections,
                          double iou_threshold);

struct ApResult {
    double mean = 0.0;
    /// AP per category, only categories with at least one non-ignored gt.
    std::map<int, double> per_category;
};

/// 101-point interpolated AP at one IoU threshold, macro-averaged over
/// categories with gt. Requires a scored detection set. Detections are
/// pooled per category and ranked by confidence descending, ties broken by
/// image id then insertion order. Evaluating a gt set against itself (as
/// confidence-1 detections) yields exactly 1.0.
ApResult average_precision(const GroundTruthSet& gt, const DetectionSet& detections,
                           double iou_threshold);

/// Mean of average_precision over IoU thresholds 0.50, 0.55, ..., 0.95.
ApResult averaged_over_iou(const GroundTruthSet& gt, const DetectionSet& detections);

struct FrequencyApResult {
    std::optional<double> rare;
    std::optional<double> common;
    std::optional<double> frequent;
};

/// Macro AP restricted to categories carrying each frequency tag. Buckets
/// with no tagged category that has gt stay empty.
FrequencyApResult frequency_ap(const GroundTruthSet& gt, const DetectionSet& detections,
                               double iou_threshold);

/// Fraction of (predicted, reference) pairs with IoU strictly above 0.5.
/// An empty list counts as vacuously perfect.
double referring_accuracy(const std::vector<std::pair<geom::Box, geom::Box>>& pairs);

/// Jaccard overlap of the lowercase token sets of two phrases. Tokens are
/// maximal alphanumeric runs. Two empty token sets score 1.
double semantic_iou(const std::string& a, const std::string& b);

class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual std::vector<double> embed(const std::string& text) const = 0;
};

/// Deterministic signed feature hashing of the token bag (FNV-1a buckets).
class HashedBagEmbedder : public TextEmbedder {
public:
    explicit HashedBagEmbedder(std::size_t dimensions = 256);
    std::vector<double> embed(const std::string& text) const override;

private:
    std::size_t dimensions_;
};

/// Cosine similarity of the two embeddings mapped to [0, 1] via
/// (1 + cos) / 2. Two zero vectors score 1; a single zero vector scores
/// 0.5 (orthogonal convention).
double semantic_similarity(const std::string& a, const std::string& b,
                           const TextEmbedder& embedder);

/// Same, with the default hashed bag-of-words embedder.
double semantic_similarity(const std::string& a, const std::string& b);

} // namespace groundkit::metrics
