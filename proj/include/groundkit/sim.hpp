#pragma once

// Monte Carlo comparison of two detection decoding strategies: index
// selection over a proposal set versus direct coordinate generation, plus
// coordinate-quantization round-trip studies.

#include "groundkit/geometry.hpp"
#include "groundkit/metrics.hpp"
#include "groundkit/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace groundkit::sim {

struct CountRange {
    int min_count = 30;
    int max_count = 60;
};

struct SizeRange {
    double min_size = 20.0;
    double max_size = 120.0;
};

struct SceneSpec {
    geom::Extent frame{1000.0, 1000.0};
    CountRange objects;
    SizeRange sizes;
    int class_count = 10;
};

struct SceneObject {
    geom::Box box;
    int category_id = 0;
};

struct Scene {
    geom::Extent frame;
    std::vector<SceneObject> objects;
};

/// Uniformly placed axis-aligned boxes with independent edge lengths and
/// uniform class labels. Boxes always lie inside the frame.
Scene generate_scene(const SceneSpec& spec, rng::Rng& rng);

/// Proposal-then-select decoder: a proposal covers each object with
/// probability recall_target (jittered copy with IoU >= 0.5), and the
/// selector picks the right index with probability selection_accuracy.
/// Expected per-object recall is recall_target * selection_accuracy.
struct RetrievalModelSpec {
    double recall_target = 0.95;
    double selection_accuracy = 0.95;
    double jitter_stddev = 0.05;  // relative to each box dimension
    double score_noise = 0.05;
};

/// Direct coordinate decoder: a box survives only if every one of its
/// serialization tokens is generated correctly, so the expected fraction of
/// emitted boxes is token_accuracy ^ tokens_per_box. Survivors optionally
/// pass through coordinate quantization.
struct RegressionModelSpec {
    double token_accuracy = 0.97;
    int tokens_per_box = 9;
    std::int64_t quantization_bins = 0;  // 0 keeps exact coordinates
    double classification_accuracy = 1.0;
};

double retrieval_recall_estimate(const RetrievalModelSpec& spec);
double regression_emission_estimate(const RegressionModelSpec& spec);

struct RetrievalTrial {
    std::vector<metrics::DetBox> detections;  // one per object, scored
    std::size_t hits = 0;                     // covered and correctly selected
};

struct RegressionTrial {
    std::vector<metrics::DetBox> detections;  // survivors only, unscored
    std::size_t emitted = 0;
};

RetrievalTrial simulate_retrieval(const Scene& scene, const RetrievalModelSpec& spec,
                                  rng::Rng& rng);
RegressionTrial simulate_regression(const Scene& scene, const RegressionModelSpec& spec,
                                    rng::Rng& rng);

/// Monte Carlo estimate of the whole-box survival fraction under
/// independent per-token corruption.
double simulate_survival_fraction(double token_accuracy, int tokens_per_box,
                                  std::size_t trials, std::uint64_t seed);

struct PipelineStats {
    double precision = 0.0;
    double recall = 0.0;
    double mean_ap = 0.0;
};

struct ComparisonReport {
    std::size_t trials = 0;
    std::size_t objects = 0;
    PipelineStats retrieval;
    PipelineStats regression;
    /// Exact per-object success fractions, comparable to the estimates.
    double retrieval_hit_fraction = 0.0;
    double regression_emitted_fraction = 0.0;
    double retrieval_estimate = 0.0;
    double regression_estimate = 0.0;
};

/// Runs both decoders over the same sampled scenes and evaluates them as
/// one pooled dataset (one image per trial). Deterministic for a given
/// seed regardless of the job count.
ComparisonReport compare_pipelines(const SceneSpec& scene_spec,
                                   const RetrievalModelSpec& retrieval_spec,
                                   const RegressionModelSpec& regression_spec,
                                   std::size_t trials, std::uint64_t seed, int jobs = 1);

struct QuantizationPoint {
    double frame_size = 0.0;
    double mean_iou = 0.0;
};

/// Mean quantize/dequantize round-trip IoU of fixed-size square boxes
/// placed uniformly in square frames of the given sizes, at a fixed bin
/// count. Larger frames mean coarser bins and lower IoU.
std::vector<QuantizationPoint> quantization_sweep(const std::vector<double>& frame_sizes,
                                                  std::int64_t bins, double box_size,
                                                  std::size_t samples, std::uint64_t seed);

} // namespace groundkit::sim
