// Command-line front end: detection evaluation, grounded-answer parsing,
// decoder simulations, transcript pathology reports, and the annotation
// engine. Text reports print numbers with four decimals; --out targets
// additionally get machine-readable copies.

#include "groundkit/engine.hpp"
#include "groundkit/grammar.hpp"
#include "groundkit/io_formats.hpp"
#include "groundkit/metrics.hpp"
#include "groundkit/pathology.hpp"
#include "groundkit/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kWarnings = 1;
constexpr int kFailure = 2;

std::string fmt4(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_json_file(const std::string& path, const json& value) {
    write_text_file(path, value.dump(2) + "\n");
}

// Writes <base>.txt and <base>.json next to printing the text report.
void emit_report(const std::string& out_base, const std::string& text, const json& data) {
    std::cout << text;
    if (out_base.empty()) return;
    write_text_file(out_base + ".txt", text);
    write_json_file(out_base + ".json", data);
}

struct EvalDetArgs {
    std::string gt_path;
    std::string preds_path;
    std::string mode = "scored";
    double iou = 0.5;
    std::string out_base;
};

int run_eval_det(const EvalDetArgs& args) {
    const bool scored = args.mode == "scored";
    groundkit::io::DatasetBundle bundle = groundkit::io::read_dataset(args.gt_path);
    groundkit::metrics::GroundTruthSet gt = groundkit::io::to_ground_truth(bundle);

    std::vector<groundkit::io::PredictionRecord> records =
        groundkit::io::read_predictions(args.preds_path, scored);
    groundkit::io::LabelResolution resolution =
        groundkit::io::resolve_labels(records, bundle.categories);
    std::erase_if(records, [](const groundkit::io::PredictionRecord& record) {
        return record.category_id < 0;
    });
    groundkit::metrics::DetectionSet detections =
        groundkit::io::to_detections(records, scored);

    std::size_t gt_boxes = 0;
    for (const auto& [image_id, boxes] : gt.by_image) gt_boxes += boxes.size();
    std::size_t det_boxes = 0;
    for (const auto& [image_id, boxes] : detections.by_image) det_boxes += boxes.size();

    groundkit::metrics::PrCounts counts =
        groundkit::metrics::precision_recall(gt, detections, args.iou);

    std::ostringstream text;
    json data;
    data["config"] = {{"gt", args.gt_path},
                      {"iou", args.iou},
                      {"mode", args.mode},
                      {"predictions", args.preds_path}};
    text << "dataset:        " << args.gt_path << "\n";
    text << "predictions:    " << args.preds_path << "\n";
    text << "mode:           " << args.mode << "\n";
    text << "images:         " << gt.by_image.size() << "\n";
    text << "gt boxes:       " << gt_boxes << "\n";
    text << "detections:     " << det_boxes << "\n";
    text << "iou threshold:  " << fmt4(args.iou) << "\n";
    text << "tp/fp/fn:       " << counts.tp << "/" << counts.fp << "/" << counts.fn << "\n";
    text << "precision:      " << fmt4(counts.precision()) << "\n";
    text << "recall:         " << fmt4(counts.recall()) << "\n";
    data["results"] = {{"tp", counts.tp},
                       {"fp", counts.fp},
                       {"fn", counts.fn},
                       {"precision", counts.precision()},
                       {"recall", counts.recall()}};

    if (scored) {
        groundkit::metrics::ApResult at_threshold =
            groundkit::metrics::average_precision(gt, detections, args.iou);
        groundkit::metrics::ApResult averaged =
            groundkit::metrics::averaged_over_iou(gt, detections);
        text << "mAP@" << fmt4(args.iou) << ":     " << fmt4(at_threshold.mean) << "\n";
        text << "mAP@[.50:.95]:  " << fmt4(averaged.mean) << "\n";
        data["results"]["map_at_threshold"] = at_threshold.mean;
        data["results"]["map_averaged"] = averaged.mean;

        groundkit::metrics::FrequencyApResult buckets =
            groundkit::metrics::frequency_ap(gt, detections, args.iou);
        if (buckets.rare) {
            text << "AP rare:        " << fmt4(*buckets.rare) << "\n";
            data["results"]["ap_rare"] = *buckets.rare;
        }
        if (buckets.common) {
            text << "AP common:      " << fmt4(*buckets.common) << "\n";
            data["results"]["ap_common"] = *buckets.common;
        }
        if (buckets.frequent) {
            text << "AP frequent:    " << fmt4(*buckets.frequent) << "\n";
            data["results"]["ap_frequent"] = *buckets.frequent;
        }
    }

    int code = kOk;
    if (!resolution.unknown.empty()) {
        code = kWarnings;
        text << "warning: unresolved labels:";
        for (const std::string& label : resolution.unknown) text << " '" << label << "'";
        text << "\n";
        data["warnings"] = {{"unresolved_labels", resolution.unknown}};
    }
    emit_report(args.out_base, text.str(), data);
    return code;
}

struct ParseArgs {
    std::string answer_path;
    int num_objects = 0;
    std::string boxes_path;
    bool strict = false;
    std::string out_base;
};

std::vector<groundkit::geom::Box> read_boxes_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<groundkit::geom::Box> boxes;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        json value = json::parse(line, nullptr, false);
        if (value.is_discarded() || !value.is_array() || value.size() != 4)
            throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                     ": expected a 4-element JSON array");
        boxes.push_back({value[0].get<double>(), value[1].get<double>(),
                         value[2].get<double>(), value[3].get<double>()});
        groundkit::geom::validate(boxes.back());
    }
    return boxes;
}

int run_parse(const ParseArgs& args) {
    namespace grammar = groundkit::grammar;
    const std::string answer = read_text_file(args.answer_path);
    const grammar::ParseMode mode =
        args.strict ? grammar::ParseMode::kStrict : grammar::ParseMode::kLenient;

    grammar::ParseResult result = grammar::parse_grounded_answer(answer, args.num_objects, mode);

    std::ostringstream text;
    json data;
    data["config"] = {{"answer", args.answer_path},
                      {"num_objects", args.num_objects},
                      {"strict", args.strict}};
    text << "spans:          " << result.answer.spans.size() << "\n";
    json spans = json::array();
    for (const grammar::Span& span : result.answer.spans) {
        text << "  phrase '" << span.phrase << "' ->";
        for (int index : span.indices) text << " " << index;
        if (span.indices.empty()) text << " (no objects)";
        text << "\n";
        spans.push_back(json{{"indices", span.indices},
                             {"leading_text", span.leading_text},
                             {"phrase", span.phrase}});
    }
    data["answer"] = {{"spans", spans}, {"trailing_text", result.answer.trailing_text}};

    json diagnostics = json::array();
    for (const grammar::Diagnostic& diagnostic : result.diagnostics) {
        text << "diagnostic at byte " << diagnostic.position << ": "
             << grammar::diagnostic_kind_name(diagnostic.kind) << " (" << diagnostic.message
             << ")\n";
        diagnostics.push_back(json{{"kind", grammar::diagnostic_kind_name(diagnostic.kind)},
                                   {"message", diagnostic.message},
                                   {"position", diagnostic.position}});
    }
    data["diagnostics"] = diagnostics;

    if (!args.boxes_path.empty()) {
        std::vector<groundkit::geom::Box> boxes = read_boxes_file(args.boxes_path);
        std::vector<grammar::LabeledDetection> detections =
            grammar::answer_to_detections(result.answer, boxes, mode);
        json dets = json::array();
        text << "detections:     " << detections.size() << "\n";
        for (const grammar::LabeledDetection& det : detections) {
            text << "  '" << det.label << "' [" << fmt4(det.box.xmin) << ", "
                 << fmt4(det.box.ymin) << ", " << fmt4(det.box.xmax) << ", "
                 << fmt4(det.box.ymax) << "]\n";
            dets.push_back(json{{"bbox", json::array({det.box.xmin, det.box.ymin, det.box.xmax,
                                                      det.box.ymax})},
                                {"label", det.label}});
        }
        data["detections"] = dets;
    }

    emit_report(args.out_base, text.str(), data);
    return result.diagnostics.empty() ? kOk : kWarnings;
}

struct QuantArgs {
    std::vector<double> frames = {1000.0, 2000.0, 4000.0, 8000.0};
    std::int64_t bins = 1000;
    double box_size = 20.0;
    std::size_t samples = 1000;
    std::uint64_t seed = 7;
    std::string out_base;
};

int run_sim_quant(const QuantArgs& args) {
    std::vector<groundkit::sim::QuantizationPoint> points = groundkit::sim::quantization_sweep(
        args.frames, args.bins, args.box_size, args.samples, args.seed);

    std::ostringstream text;
    text << "frame      mean_iou\n";
    json rows = json::array();
    for (const groundkit::sim::QuantizationPoint& point : points) {
        char line[64];
        std::snprintf(line, sizeof(line), "%-10.0f %.4f\n", point.frame_size, point.mean_iou);
        text << line;
        rows.push_back(json{{"frame", point.frame_size}, {"mean_iou", point.mean_iou}});
    }
    json data{{"config",
               {{"bins", args.bins},
                {"box_size", args.box_size},
                {"samples", args.samples},
                {"seed", args.seed}}},
              {"results", rows}};
    emit_report(args.out_base, text.str(), data);
    return kOk;
}

struct SurvivalArgs {
    double token_accuracy = 0.97;
    int tokens = 9;
    std::size_t trials = 10000;
    std::uint64_t seed = 7;
    std::string out_base;
};

int run_sim_survival(const SurvivalArgs& args) {
    const double closed_form =
        groundkit::pathology::box_survival(args.token_accuracy, args.tokens);
    const double simulated = groundkit::sim::simulate_survival_fraction(
        args.token_accuracy, args.tokens, args.trials, args.seed);

    std::ostringstream text;
    text << "token accuracy: " << fmt4(args.token_accuracy) << "\n";
    text << "tokens per box: " << args.tokens << "\n";
    text << "closed form:    " << fmt4(closed_form) << "\n";
    text << "simulated:      " << fmt4(simulated) << " (" << args.trials << " trials)\n";
    json data{{"config",
               {{"seed", args.seed},
                {"token_accuracy", args.token_accuracy},
                {"tokens", args.tokens},
                {"trials", args.trials}}},
              {"results", {{"closed_form", closed_form}, {"simulated", simulated}}}};
    emit_report(args.out_base, text.str(), data);
    return kOk;
}

struct CompareArgs {
    groundkit::sim::SceneSpec scene;
    groundkit::sim::RetrievalModelSpec retrieval;
    groundkit::sim::RegressionModelSpec regression;
    std::size_t trials = 200;
    std::uint64_t seed = 7;
    int jobs = 1;
    std::string out_base;
};

int run_sim_compare(const CompareArgs& args) {
    groundkit::sim::ComparisonReport report = groundkit::sim::compare_pipelines(
        args.scene, args.retrieval, args.regression, args.trials, args.seed, args.jobs);

    std::ostringstream text;
    text << "trials:         " << report.trials << "\n";
    text << "objects:        " << report.objects << "\n";
    text << "retrieval   precision " << fmt4(report.retrieval.precision) << "  recall "
         << fmt4(report.retrieval.recall) << "  mAP " << fmt4(report.retrieval.mean_ap) << "\n";
    text << "regression  precision " << fmt4(report.regression.precision) << "  recall "
         << fmt4(report.regression.recall) << "  mAP " << fmt4(report.regression.mean_ap)
         << "\n";
    text << "retrieval hits:      " << fmt4(report.retrieval_hit_fraction) << " (expected "
         << fmt4(report.retrieval_estimate) << ")\n";
    text << "regression emitted:  " << fmt4(report.regression_emitted_fraction) << " (expected "
         << fmt4(report.regression_estimate) << ")\n";

    json data{{"config",
               {{"jobs", args.jobs},
                {"seed", args.seed},
                {"trials", args.trials},
                {"recall_target", args.retrieval.recall_target},
                {"selection_accuracy", args.retrieval.selection_accuracy},
                {"token_accuracy", args.regression.token_accuracy},
                {"tokens_per_box", args.regression.tokens_per_box},
                {"quantization_bins", args.regression.quantization_bins}}},
              {"results",
               {{"objects", report.objects},
                {"retrieval",
                 {{"precision", report.retrieval.precision},
                  {"recall", report.retrieval.recall},
                  {"map", report.retrieval.mean_ap},
                  {"hit_fraction", report.retrieval_hit_fraction},
                  {"estimate", report.retrieval_estimate}}},
                {"regression",
                 {{"precision", report.regression.precision},
                  {"recall", report.regression.recall},
                  {"map", report.regression.mean_ap},
                  {"emitted_fraction", report.regression_emitted_fraction},
                  {"estimate", report.regression_estimate}}}}}};
    emit_report(args.out_base, text.str(), data);
    return kOk;
}

struct PathologyArgs {
    std::string input_path;
    std::size_t max_words = 0;
    double token_accuracy = 0.97;
    int tokens = 9;
    std::size_t min_run = 3;
    double tolerance = 1.0;
    std::string out_base;
};

int run_pathology(const PathologyArgs& args) {
    namespace pathology = groundkit::pathology;
    const std::string text_content = read_text_file(args.input_path);
    groundkit::io::TranscriptParse parse = groundkit::io::parse_transcript(text_content);
    std::vector<groundkit::geom::Box> boxes = groundkit::io::transcript_boxes(parse);

    pathology::RunScanConfig scan;
    scan.min_boxes = args.min_run;
    scan.tolerance = args.tolerance;
    std::vector<pathology::ArithmeticRun> runs = pathology::find_arithmetic_runs(boxes, scan);
    pathology::TruncationReport truncation =
        pathology::detect_truncation(text_content, args.max_words);
    const double survival = pathology::box_survival(args.token_accuracy, args.tokens);

    std::ostringstream text;
    text << "boxes:          " << boxes.size() << "\n";
    text << "unparsed:       " << parse.unparsed_segments << "\n";
    text << "runs:           " << runs.size() << "\n";
    json run_rows = json::array();
    for (const pathology::ArithmeticRun& run : runs) {
        text << "  start " << run.begin << " length " << run.length << " delta ["
             << fmt4(run.delta_xmin) << ", " << fmt4(run.delta_ymin) << ", "
             << fmt4(run.delta_xmax) << ", " << fmt4(run.delta_ymax) << "]\n";
        run_rows.push_back(json{{"begin", run.begin},
                                {"length", run.length},
                                {"delta",
                                 json::array({run.delta_xmin, run.delta_ymin, run.delta_xmax,
                                              run.delta_ymax})}});
    }
    text << "truncation:     " << pathology::truncation_kind_name(truncation.kind);
    if (truncation.kind != pathology::TruncationKind::kNone)
        text << " at byte " << truncation.cut_position << " (" << truncation.detail << ")";
    text << "\n";
    text << "box survival:   " << fmt4(survival) << " (accuracy " << fmt4(args.token_accuracy)
         << ", " << args.tokens << " tokens)\n";

    json data{{"config",
               {{"input", args.input_path},
                {"max_words", args.max_words},
                {"min_run", args.min_run},
                {"token_accuracy", args.token_accuracy},
                {"tokens", args.tokens},
                {"tolerance", args.tolerance}}},
              {"results",
               {{"boxes", boxes.size()},
                {"unparsed_segments", parse.unparsed_segments},
                {"runs", run_rows},
                {"truncation", pathology::truncation_kind_name(truncation.kind)},
                {"box_survival", survival}}}};
    emit_report(args.out_base, text.str(), data);
    return parse.unparsed_segments == 0 ? kOk : kWarnings;
}

struct EngineArgs {
    std::string manifest_path;
    std::string fixtures_path;
    std::string endpoint;
    std::string config_path;
    std::string store_path;
    std::string checkpoint_path;
    bool resume = false;
    int jobs = 0;  // 0 = take the config value
};

int run_engine_command(const EngineArgs& args) {
    namespace engine = groundkit::engine;
    std::vector<engine::ManifestEntry> manifest = engine::read_manifest(args.manifest_path);

    engine::EngineConfig config;
    if (!args.config_path.empty()) config = engine::read_engine_config(args.config_path);
    if (args.jobs > 0) config.jobs = args.jobs;

    std::unique_ptr<engine::StageClient> client;
    if (!args.fixtures_path.empty()) {
        client = std::make_unique<engine::ReplayClient>(args.fixtures_path);
    } else if (!args.endpoint.empty()) {
        const std::size_t colon = args.endpoint.rfind(':');
        if (colon == std::string::npos)
            throw std::runtime_error("endpoint must be host:port, got " + args.endpoint);
        const std::string host = args.endpoint.substr(0, colon);
        const int port = std::stoi(args.endpoint.substr(colon + 1));
        client = std::make_unique<engine::HttpStageClient>(host, port);
    } else {
        throw std::runtime_error("need either --fixtures or --endpoint");
    }

    if (!args.resume) {
        std::filesystem::remove(args.store_path);
        std::filesystem::remove(args.checkpoint_path);
    }

    engine::RunStats stats = engine::run_engine(manifest, *client, config, args.store_path,
                                                args.checkpoint_path);
    std::cout << "images committed:   " << stats.images_committed << "\n";
    std::cout << "images skipped:     " << stats.images_skipped << "\n";
    std::cout << "phrases found:      " << stats.phrases_found << "\n";
    std::cout << "phrases abstract:   " << stats.phrases_abstract << "\n";
    std::cout << "regions kept:       " << stats.regions_kept << "\n";
    std::cout << "regions dropped:    "
              << stats.regions_below_threshold + stats.regions_out_of_frame +
                     stats.regions_too_small + stats.regions_bad_detail +
                     stats.regions_bad_referring
              << "\n";
    std::cout << "stage retries:      " << stats.stage_retries << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grounded detection toolkit"};
    app.require_subcommand(1);

    EvalDetArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval-det", "evaluate detections against a dataset");
    eval->add_option("--gt", eval_args.gt_path, "dataset JSON")->required();
    eval->add_option("--preds", eval_args.preds_path, "prediction JSONL")->required();
    eval->add_option("--mode", eval_args.mode, "scored or unscored")
        ->check(CLI::IsMember({"scored", "unscored"}));
    eval->add_option("--iou", eval_args.iou, "IoU threshold");
    eval->add_option("--out", eval_args.out_base, "report base path (.txt and .json)");

    ParseArgs parse_args;
    CLI::App* parse = app.add_subcommand("parse", "parse a grounded answer transcript");
    parse->add_option("--answer", parse_args.answer_path, "answer text file")->required();
    parse->add_option("--num-objects", parse_args.num_objects, "object slots in the prompt")
        ->required();
    parse->add_option("--boxes", parse_args.boxes_path, "proposal boxes JSONL (xyxy arrays)");
    parse->add_flag("--strict", parse_args.strict, "reject malformed answers");
    parse->add_option("--out", parse_args.out_base, "report base path");

    CLI::App* simulate = app.add_subcommand("simulate", "decoder simulations");
    simulate->require_subcommand(1);

    QuantArgs quant_args;
    CLI::App* quant = simulate->add_subcommand("quant", "quantization round-trip sweep");
    quant->add_option("--frames", quant_args.frames, "frame sizes");
    quant->add_option("--bins", quant_args.bins, "coordinate bins");
    quant->add_option("--box-size", quant_args.box_size, "box edge length in pixels");
    quant->add_option("--samples", quant_args.samples, "boxes per frame size");
    quant->add_option("--seed", quant_args.seed, "random seed");
    quant->add_option("--out", quant_args.out_base, "report base path");

    SurvivalArgs survival_args;
    CLI::App* survival = simulate->add_subcommand("survival", "whole-box survival estimate");
    survival->add_option("--token-accuracy", survival_args.token_accuracy, "per-token accuracy");
    survival->add_option("--tokens", survival_args.tokens, "tokens per box");
    survival->add_option("--trials", survival_args.trials, "Monte Carlo trials");
    survival->add_option("--seed", survival_args.seed, "random seed");
    survival->add_option("--out", survival_args.out_base, "report base path");

    CompareArgs compare_args;
    CLI::App* compare = simulate->add_subcommand("compare", "retrieval vs regression decoding");
    compare->add_option("--trials", compare_args.trials, "scenes to sample");
    compare->add_option("--seed", compare_args.seed, "random seed");
    compare->add_option("--jobs", compare_args.jobs, "worker threads");
    compare->add_option("--objects-min", compare_args.scene.objects.min_count,
                        "minimum objects per scene");
    compare->add_option("--objects-max", compare_args.scene.objects.max_count,
                        "maximum objects per scene");
    compare->add_option("--classes", compare_args.scene.class_count, "category count");
    compare->add_option("--recall-target", compare_args.retrieval.recall_target,
                        "proposal coverage");
    compare->add_option("--selection-accuracy", compare_args.retrieval.selection_accuracy,
                        "index selection accuracy");
    compare->add_option("--token-accuracy", compare_args.regression.token_accuracy,
                        "per-token accuracy");
    compare->add_option("--tokens", compare_args.regression.tokens_per_box, "tokens per box");
    compare->add_option("--bins", compare_args.regression.quantization_bins,
                        "quantization bins (0 = exact)");
    compare->add_option("--out", compare_args.out_base, "report base path");

    PathologyArgs pathology_args;
    CLI::App* pathology = app.add_subcommand("pathology", "inspect a raw model transcript");
    pathology->add_option("--input", pathology_args.input_path, "transcript file")->required();
    pathology->add_option("--max-words", pathology_args.max_words,
                          "generation cap for the length check");
    pathology->add_option("--token-accuracy", pathology_args.token_accuracy,
                          "per-token accuracy");
    pathology->add_option("--tokens", pathology_args.tokens, "tokens per box");
    pathology->add_option("--min-run", pathology_args.min_run, "minimum boxes per run");
    pathology->add_option("--tolerance", pathology_args.tolerance, "delta spread tolerance");
    pathology->add_option("--out", pathology_args.out_base, "report base path");

    EngineArgs engine_args;
    CLI::App* engine_cmd = app.add_subcommand("engine", "image annotation pipeline");
    engine_cmd->require_subcommand(1);
    CLI::App* engine_run = engine_cmd->add_subcommand("run", "start a fresh run");
    CLI::App* engine_resume =
        engine_cmd->add_subcommand("resume", "continue from the last checkpoint");
    for (CLI::App* sub : {engine_run, engine_resume}) {
        sub->add_option("--manifest", engine_args.manifest_path, "image manifest JSONL")
            ->required();
        sub->add_option("--fixtures", engine_args.fixtures_path, "replay fixture JSON");
        sub->add_option("--endpoint", engine_args.endpoint, "annotation service host:port")
            ->envname("GROUNDKIT_ENDPOINT");
        sub->add_option("--config", engine_args.config_path, "engine config JSON");
        sub->add_option("--store", engine_args.store_path, "output triplet JSONL")->required();
        sub->add_option("--checkpoint", engine_args.checkpoint_path, "checkpoint JSONL")
            ->required();
        sub->add_option("--jobs", engine_args.jobs, "worker threads (overrides config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kFailure;
    }

    try {
        if (eval->parsed()) return run_eval_det(eval_args);
        if (parse->parsed()) return run_parse(parse_args);
        if (simulate->parsed()) {
            if (quant->parsed()) return run_sim_quant(quant_args);
            if (survival->parsed()) return run_sim_survival(survival_args);
            if (compare->parsed()) return run_sim_compare(compare_args);
        }
        if (pathology->parsed()) return run_pathology(pathology_args);
        if (engine_cmd->parsed()) {
            engine_args.resume = engine_resume->parsed();
            return run_engine_command(engine_args);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
