#include "groundkit/sim.hpp"

#include "groundkit/pathology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace groundkit::sim {
namespace {

constexpr int kResampleAttempts = 32;

void check_probability(double value, const char* name) {
    if (value < 0.0 || value > 1.0)
        throw std::invalid_argument(std::string(name) + " must be in [0, 1], got " +
                                    std::to_string(value));
}

void check_scene_spec(const SceneSpec& spec) {
    geom::validate(spec.frame);
    if (spec.objects.min_count < 0 || spec.objects.max_count < spec.objects.min_count)
        throw std::invalid_argument("object count range is empty or negative");
    if (!(spec.sizes.min_size > 0.0) || spec.sizes.max_size < spec.sizes.min_size)
        throw std::invalid_argument("size range is empty or non-positive");
    if (spec.sizes.max_size > spec.frame.width || spec.sizes.max_size > spec.frame.height)
        throw std::invalid_argument("objects larger than the frame cannot be placed");
    if (spec.class_count < 1) throw std::invalid_argument("need at least one class");
}

geom::Box clamp_to_frame(geom::Box box, const geom::Extent& frame) {
    box.xmin = std::clamp(box.xmin, 0.0, frame.width);
    box.xmax = std::clamp(box.xmax, 0.0, frame.width);
    box.ymin = std::clamp(box.ymin, 0.0, frame.height);
    box.ymax = std::clamp(box.ymax, 0.0, frame.height);
    if (box.xmax < box.xmin) std::swap(box.xmin, box.xmax);
    if (box.ymax < box.ymin) std::swap(box.ymin, box.ymax);
    return box;
}

geom::Box jittered_copy(const geom::Box& box, double relative_stddev,
                        const geom::Extent& frame, rng::Rng& rng) {
    const double sx = (box.xmax - box.xmin) * relative_stddev;
    const double sy = (box.ymax - box.ymin) * relative_stddev;
    geom::Box out{box.xmin + rng.gaussian(0.0, sx), box.ymin + rng.gaussian(0.0, sy),
                  box.xmax + rng.gaussian(0.0, sx), box.ymax + rng.gaussian(0.0, sy)};
    return clamp_to_frame(out, frame);
}

geom::Box random_box(const geom::Extent& frame, const SizeRange& sizes, rng::Rng& rng) {
    const double w = rng.uniform(sizes.min_size, sizes.max_size);
    const double h = rng.uniform(sizes.min_size, sizes.max_size);
    const double x = rng.uniform(0.0, frame.width - w);
    const double y = rng.uniform(0.0, frame.height - h);
    return {x, y, x + w, y + h};
}

// A box the selector could plausibly output for a miss: anywhere in the
// frame, but never a valid match for any same-class object.
geom::Box distractor_box(const Scene& scene, int category_id, const SizeRange& sizes,
                         rng::Rng& rng) {
    for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
        geom::Box candidate = random_box(scene.frame, sizes, rng);
        bool clashes = false;
        for (const SceneObject& object : scene.objects) {
            if (object.category_id != category_id) continue;
            if (geom::iou(candidate, object.box) >= 0.5) {
                clashes = true;
                break;
            }
        }
        if (!clashes) return candidate;
    }
    return {0.0, 0.0, 1.0, 1.0};
}

struct TrialData {
    Scene scene;
    RetrievalTrial retrieval;
    RegressionTrial regression;
};

TrialData run_trial(const SceneSpec& scene_spec, const RetrievalModelSpec& retrieval_spec,
                    const RegressionModelSpec& regression_spec, const rng::Rng& root,
                    std::size_t trial) {
    TrialData data;
    rng::Rng scene_rng = root.split(trial * 4);
    rng::Rng retrieval_rng = root.split(trial * 4 + 1);
    rng::Rng regression_rng = root.split(trial * 4 + 2);
    data.scene = generate_scene(scene_spec, scene_rng);
    data.retrieval = simulate_retrieval(data.scene, retrieval_spec, retrieval_rng);
    data.regression = simulate_regression(data.scene, regression_spec, regression_rng);
    return data;
}

PipelineStats evaluate(const metrics::GroundTruthSet& gt, const metrics::DetectionSet& dets) {
    PipelineStats stats;
    metrics::PrCounts counts = metrics::precision_recall(gt, dets, 0.5);
    stats.precision = counts.precision();
    stats.recall = counts.recall();

    metrics::DetectionSet scored = dets;
    scored.scored = true;
    if (!dets.scored)
        for (auto& [image_id, boxes] : scored.by_image)
            for (metrics::DetBox& box : boxes) box.confidence = 1.0;
    stats.mean_ap = metrics::average_precision(gt, scored, 0.5).mean;
    return stats;
}

} // namespace

Scene generate_scene(const SceneSpec& spec, rng::Rng& rng) {
    check_scene_spec(spec);
    Scene scene;
    scene.frame = spec.frame;
    const int count = rng.uniform_int(spec.objects.min_count, spec.objects.max_count);
    scene.objects.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SceneObject object;
        object.box = random_box(spec.frame, spec.sizes, rng);
        object.category_id = rng.uniform_int(0, spec.class_count - 1);
        scene.objects.push_back(object);
    }
    return scene;
}

double retrieval_recall_estimate(const RetrievalModelSpec& spec) {
    check_probability(spec.recall_target, "recall_target");
    check_probability(spec.selection_accuracy, "selection_accuracy");
    return spec.recall_target * spec.selection_accuracy;
}

double regression_emission_estimate(const RegressionModelSpec& spec) {
    return pathology::box_survival(spec.token_accuracy, spec.tokens_per_box);
}

RetrievalTrial simulate_retrieval(const Scene& scene, const RetrievalModelSpec& spec,
                                  rng::Rng& rng) {
    check_probability(spec.recall_target, "recall_target");
    check_probability(spec.selection_accuracy, "selection_accuracy");
    if (!(spec.jitter_stddev >= 0.0))
        throw std::invalid_argument("jitter_stddev must be non-negative");

    SizeRange distractor_sizes{20.0, 120.0};
    RetrievalTrial trial;
    trial.detections.reserve(scene.objects.size());
    for (const SceneObject& object : scene.objects) {
        const bool covered = rng.bernoulli(spec.recall_target);
        const bool selected = rng.bernoulli(spec.selection_accuracy);

        geom::Box output;
        if (covered && selected) {
            output = object.box;
            for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
                geom::Box candidate =
                    jittered_copy(object.box, spec.jitter_stddev, scene.frame, rng);
                if (geom::iou(candidate, object.box) >= 0.5) {
                    output = candidate;
                    break;
                }
            }
            ++trial.hits;
        } else {
            output = distractor_box(scene, object.category_id, distractor_sizes, rng);
        }

        const double score =
            std::clamp(geom::iou(output, object.box) + rng.gaussian(0.0, spec.score_noise),
                       0.0, 1.0);
        trial.detections.push_back({output, object.category_id, score});
    }
    return trial;
}

RegressionTrial simulate_regression(const Scene& scene, const RegressionModelSpec& spec,
                                    rng::Rng& rng) {
    check_probability(spec.token_accuracy, "token_accuracy");
    check_probability(spec.classification_accuracy, "classification_accuracy");
    if (spec.tokens_per_box < 1)
        throw std::invalid_argument("tokens_per_box must be at least 1");
    if (spec.quantization_bins < 0)
        throw std::invalid_argument("quantization_bins must be non-negative");

    int class_count = 1;
    for (const SceneObject& object : scene.objects)
        class_count = std::max(class_count, object.category_id + 1);

    RegressionTrial trial;
    for (const SceneObject& object : scene.objects) {
        bool survived = true;
        for (int token = 0; token < spec.tokens_per_box; ++token)
            if (!rng.bernoulli(spec.token_accuracy)) survived = false;
        if (!survived) continue;
        ++trial.emitted;

        geom::Box output = object.box;
        if (spec.quantization_bins > 0)
            output = geom::dequantize(
                geom::quantize(object.box, scene.frame, spec.quantization_bins), scene.frame);

        int category = object.category_id;
        if (!rng.bernoulli(spec.classification_accuracy) && class_count > 1) {
            const int shift = rng.uniform_int(1, class_count - 1);
            category = (object.category_id + shift) % class_count;
        }
        trial.detections.push_back({output, category, 0.0});
    }
    return trial;
}

double simulate_survival_fraction(double token_accuracy, int tokens_per_box,
                                  std::size_t trials, std::uint64_t seed) {
    check_probability(token_accuracy, "token_accuracy");
    if (tokens_per_box < 1)
        throw std::invalid_argument("tokens_per_box must be at least 1");
    if (trials == 0) throw std::invalid_argument("need at least one trial");

    rng::Rng rng(seed);
    std::size_t survived = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        bool whole = true;
        for (int token = 0; token < tokens_per_box; ++token)
            if (!rng.bernoulli(token_accuracy)) whole = false;
        if (whole) ++survived;
    }
    return static_cast<double>(survived) / static_cast<double>(trials);
}

ComparisonReport compare_pipelines(const SceneSpec& scene_spec,
                                   const RetrievalModelSpec& retrieval_spec,
                                   const RegressionModelSpec& regression_spec,
                                   std::size_t trials, std::uint64_t seed, int jobs) {
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    if (jobs < 1) throw std::invalid_argument("need at least one job");
    check_scene_spec(scene_spec);

    const rng::Rng root(seed);
    std::vector<TrialData> results(trials);
    if (jobs == 1 || trials == 1) {
        for (std::size_t t = 0; t < trials; ++t)
            results[t] = run_trial(scene_spec, retrieval_spec, regression_spec, root, t);
    } else {
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), trials);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t t = w; t < trials; t += workers)
                    results[t] = run_trial(scene_spec, retrieval_spec, regression_spec, root, t);
            });
        }
        for (std::thread& thread : pool) thread.join();
    }

    ComparisonReport report;
    report.trials = trials;
    report.retrieval_estimate = retrieval_recall_estimate(retrieval_spec);
    report.regression_estimate = regression_emission_estimate(regression_spec);

    metrics::GroundTruthSet gt;
    metrics::DetectionSet retrieval_dets;
    metrics::DetectionSet regression_dets;
    regression_dets.scored = false;
    std::size_t hits = 0, emitted = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const int image_id = static_cast<int>(t);
        auto& gt_boxes = gt.by_image[image_id];
        for (const SceneObject& object : results[t].scene.objects)
            gt_boxes.push_back({object.box, object.category_id, false});
        retrieval_dets.by_image[image_id] = results[t].retrieval.detections;
        regression_dets.by_image[image_id] = results[t].regression.detections;
        report.objects += results[t].scene.objects.size();
        hits += results[t].retrieval.hits;
        emitted += results[t].regression.emitted;
    }

    report.retrieval = evaluate(gt, retrieval_dets);
    report.regression = evaluate(gt, regression_dets);
    if (report.objects > 0) {
        report.retrieval_hit_fraction =
            static_cast<double>(hits) / static_cast<double>(report.objects);
        report.regression_emitted_fraction =
            static_cast<double>(emitted) / static_cast<double>(report.objects);
    }
    return report;
}

std::vector<QuantizationPoint> quantization_sweep(const std::vector<double>& frame_sizes,
                                                  std::int64_t bins, double box_size,
                                                  std::size_t samples, std::uint64_t seed) {
    if (bins < 2) throw std::invalid_argument("need at least two bins");
    if (!(box_size > 0.0)) throw std::invalid_argument("box size must be positive");
    if (samples == 0) throw std::invalid_argument("need at least one sample");

    std::vector<QuantizationPoint> points;
    points.reserve(frame_sizes.size());
    const rng::Rng root(seed);
    for (std::size_t f = 0; f < frame_sizes.size(); ++f) {
        const double frame_size = frame_sizes[f];
        if (!(frame_size > box_size))
            throw std::invalid_argument("frame must be larger than the box");
        const geom::Extent frame{frame_size, frame_size};
        rng::Rng rng = root.split(f);
        double total = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            const double x = rng.uniform(0.0, frame_size - box_size);
            const double y = rng.uniform(0.0, frame_size - box_size);
            const geom::Box box{x, y, x + box_size, y + box_size};
            const geom::Box round_trip = geom::dequantize(geom::quantize(box, frame, bins), frame);
            total += geom::iou(box, round_trip);
        }
        points.push_back({frame_size, total / static_cast<double>(samples)});
    }
    return points;
}

} // namespace groundkit::sim
