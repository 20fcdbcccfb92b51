#include "groundkit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>

namespace groundkit::metrics {
namespace {

constexpr std::size_t kRecallSamples = 101;

void check_threshold(double iou_threshold) {
    if (!(iou_threshold > 0.0) || iou_threshold > 1.0)
        throw std::invalid_argument("IoU threshold must be in (0, 1], got " +
                                    std::to_string(iou_threshold));
}

std::vector<std::size_t> visit_order(const std::vector<DetBox>& detections, bool scored) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (scored) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return detections[a].confidence > detections[b].confidence;
        });
    }
    return order;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

// One ranked detection of a category, pooled across the dataset.
struct RankedDet {
    double confidence;
    bool true_positive;
};

struct CategoryPool {
    std::vector<RankedDet> ranked;
    std::size_t gt_count = 0;
};

// Precision at 101 evenly spaced recall targets, averaged.
double interpolate_ap(const CategoryPool& pool) {
    std::vector<RankedDet> ranked = pool.ranked;
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedDet& a, const RankedDet& b) {
        return a.confidence > b.confidence;
    });

    std::vector<double> precision(ranked.size());
    std::vector<double> recall(ranked.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k].true_positive) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / static_cast<double>(pool.gt_count);
    }
    for (std::size_t k = precision.size(); k-- > 1;)
        precision[k - 1] = std::max(precision[k - 1], precision[k]);

    double total = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < kRecallSamples; ++i) {
        const double target = static_cast<double>(i) / 100.0;
        while (k < recall.size() && recall[k] < target) ++k;
        if (k == recall.size()) break;
        total += precision[k];
    }
    return total / static_cast<double>(kRecallSamples);
}

std::map<int, CategoryPool> pool_dataset(const GroundTruthSet& gt,
                                         const DetectionSet& detections,
                                         double iou_threshold) {
    std::map<int, CategoryPool> pools;
    for (const auto& [image_id, boxes] : gt.by_image)
        for (const GtBox& g : boxes)
            if (!g.ignore) ++pools[g.category_id].gt_count;

    static const std::vector<GtBox> kNoGt;
    for (const auto& [image_id, dets] : detections.by_image) {
        auto it = gt.by_image.find(image_id);
        const std::vector<GtBox>& gts = it == gt.by_image.end() ? kNoGt : it->second;
        ImageMatch match = match_image(dets, gts, iou_threshold, true);
        for (std::size_t rank : visit_order(dets, true)) {
            if (match.det_ignored[rank]) continue;
            auto pool = pools.find(dets[rank].category_id);
            if (pool == pools.end()) continue;  // no gt anywhere for this category
            pool->second.ranked.push_back({dets[rank].confidence, match.det_to_gt[rank] >= 0});
        }
    }
    return pools;
}

} // namespace

ImageMatch match_image(const std::vector<DetBox>& detections,
                       const std::vector<GtBox>& ground_truth,
                       double iou_threshold, bool scored) {
    check_threshold(iou_threshold);
    for (const DetBox& d : detections) geom::validate(d.box);
    for (const GtBox& g : ground_truth) geom::validate(g.box);

    ImageMatch result;
    result.det_to_gt.assign(detections.size(), -1);
    result.det_ignored.assign(detections.size(), 0);
    result.gt_matched.assign(ground_truth.size(), 0);

    for (std::size_t d : visit_order(detections, scored)) {
        const DetBox& det = detections[d];
        std::ptrdiff_t best_live = -1, best_ignored = -1;
        double best_live_iou = 0.0, best_ignored_iou = 0.0;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            const GtBox& gt = ground_truth[g];
            if (gt.category_id != det.category_id) continue;
            if (!gt.ignore && result.gt_matched[g]) continue;
            double overlap = geom::iou(det.box, gt.box);
            if (overlap < iou_threshold) continue;
            if (gt.ignore) {
                if (overlap > best_ignored_iou) {
                    best_ignored_iou = overlap;
                    best_ignored = static_cast<std::ptrdiff_t>(g);
                }
            } else if (overlap > best_live_iou) {
                best_live_iou = overlap;
                best_live = static_cast<std::ptrdiff_t>(g);
            }
        }
        if (best_live >= 0) {
            result.det_to_gt[d] = best_live;
            result.gt_matched[static_cast<std::size_t>(best_live)] = 1;
        } else if (best_ignored >= 0) {
            result.det_to_gt[d] = best_ignored;
            result.det_ignored[d] = 1;
        }
    }
    return result;
}

double PrCounts::precision() const {
    if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PrCounts::recall() const {
    if (tp + fn == 0) return 1.0;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

PrCounts precision_recall(const GroundTruthSet& gt, const DetectionSet& detections,
                          double iou_threshold) {
    check_threshold(iou_threshold);
    PrCounts counts;

    std::set<int> image_ids;
    for (const auto& [id, _] : gt.by_image) image_ids.insert(id);
    for (const auto& [id, _] : detections.by_image) image_ids.insert(id);

    static const std::vector<GtBox> kNoGt;
    static const std::vector<DetBox> kNoDet;
    for (int image_id : image_ids) {
        auto git = gt.by_image.find(image_id);
        auto dit = detections.by_image.find(image_id);
        const std::vector<GtBox>& gts = git == gt.by_image.end() ? kNoGt : git->second;
        const std::vector<DetBox>& dets = dit == detections.by_image.end() ? kNoDet : dit->second;
        ImageMatch match = match_image(dets, gts, iou_threshold, detections.scored);
        for (std::size_t d = 0; d < dets.size(); ++d) {
            if (match.det_ignored[d]) continue;
            if (match.det_to_gt[d] >= 0)
                ++counts.tp;
            else
                ++counts.fp;
        }
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (!gts[g].ignore && !match.gt_matched[g]) ++counts.fn;
    }
    return counts;
}

ApResult average_precision(const GroundTruthSet& gt, const DetectionSet& detections,
                           double iou_threshold) {
    check_threshold(iou_threshold);
    if (!detections.scored)
        throw std::invalid_argument(
            "average precision needs confidence-ranked detections; "
            "use precision_recall for unscored sets");

    ApResult result;
    std::map<int, CategoryPool> pools = pool_dataset(gt, detections, iou_threshold);
    if (pools.empty()) return result;

    double total = 0.0;
    for (const auto& [category_id, pool] : pools) {
        double ap = interpolate_ap(pool);
        result.per_category[category_id] = ap;
        total += ap;
    }
    result.mean = total / static_cast<double>(pools.size());
    return result;
}

ApResult averaged_over_iou(const GroundTruthSet& gt, const DetectionSet& detections) {
    ApResult result;
    int threshold_count = 0;
    for (int step = 50; step <= 95; step += 5) {
        ApResult at = average_precision(gt, detections, static_cast<double>(step) / 100.0);
        for (const auto& [category_id, ap] : at.per_category)
            result.per_category[category_id] += ap;
        result.mean += at.mean;
        ++threshold_count;
    }
    if (threshold_count == 0) return result;
    for (auto& [category_id, ap] : result.per_category) ap /= threshold_count;
    result.mean /= threshold_count;
    return result;
}

FrequencyApResult frequency_ap(const GroundTruthSet& gt, const DetectionSet& detections,
                               double iou_threshold) {
    ApResult ap = average_precision(gt, detections, iou_threshold);

    std::map<int, FrequencyTag> tags;
    for (const Category& category : gt.categories) tags[category.id] = category.frequency;

    double sums[3] = {0.0, 0.0, 0.0};
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& [category_id, value] : ap.per_category) {
        auto it = tags.find(category_id);
        if (it == tags.end()) continue;
        int bucket = -1;
        switch (it->second) {
            case FrequencyTag::kRare: bucket = 0; break;
            case FrequencyTag::kCommon: bucket = 1; break;
            case FrequencyTag::kFrequent: bucket = 2; break;
            case FrequencyTag::kUnknown: break;
        }
        if (bucket < 0) continue;
        sums[bucket] += value;
        ++counts[bucket];
    }

    FrequencyApResult result;
    if (counts[0] > 0) result.rare = sums[0] / static_cast<double>(counts[0]);
    if (counts[1] > 0) result.common = sums[1] / static_cast<double>(counts[1]);
    if (counts[2] > 0) result.frequent = sums[2] / static_cast<double>(counts[2]);
    return result;
}

double referring_accuracy(const std::vector<std::pair<geom::Box, geom::Box>>& pairs) {
    if (pairs.empty()) return 1.0;
    std::size_t hits = 0;
    for (const auto& [predicted, reference] : pairs)
        if (geom::iou(predicted, reference) > 0.5) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double semantic_iou(const std::string& a, const std::string& b) {
    std::vector<std::string> ta = tokenize(a), tb = tokenize(b);
    std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 1.0;

    std::size_t shared = 0;
    for (const std::string& token : sa)
        if (sb.count(token)) ++shared;
    std::size_t total = sa.size() + sb.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(total);
}

HashedBagEmbedder::HashedBagEmbedder(std::size_t dimensions) : dimensions_(dimensions) {
    if (dimensions_ == 0) throw std::invalid_argument("embedder needs at least one dimension");
}

std::vector<double> HashedBagEmbedder::embed(const std::string& text) const {
    std::vector<double> vec(dimensions_, 0.0);
    for (const std::string& token : tokenize(text)) {
        std::uint64_t hash = fnv1a(token);
        double sign = (hash >> 63) ? -1.0 : 1.0;
        vec[hash % dimensions_] += sign;
    }
    return vec;
}

double semantic_similarity(const std::string& a, const std::string& b,
                           const TextEmbedder& embedder) {
    std::vector<double> va = embedder.embed(a), vb = embedder.embed(b);
    if (va.size() != vb.size())
        throw std::invalid_argument("embedder returned vectors of different sizes");

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.5;
    double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
    cosine = std::clamp(cosine, -1.0, 1.0);
    return (1.0 + cosine) / 2.0;
}

double semantic_similarity(const std::string& a, const std::string& b) {
    static const HashedBagEmbedder kDefault;
    return semantic_similarity(a, b, kDefault);
}

} // namespace groundkit::metrics
