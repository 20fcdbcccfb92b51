#pragma once

// On-disk interchange: dataset JSON (COCO-style xywh annotations),
// prediction JSONL (xyxy boxes), and a tolerant reader for raw model
// transcripts that mention labeled boxes.

#include "groundkit/geometry.hpp"
#include "groundkit/metrics.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace groundkit::io {

/// File-format error carrying the offending path and line (0 = whole file).
class LocatedError : public std::runtime_error {
public:
    LocatedError(std::string path, std::size_t line, const std::string& message);
    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

struct ImageInfo {
    int id = 0;
    std::string file_name;
    double width = 0.0;
    double height = 0.0;
};

struct Annotation {
    int id = 0;
    int image_id = 0;
    int category_id = 0;
    geom::Box box;
    bool ignore = false;
};

struct DatasetBundle {
    std::vector<ImageInfo> images;
    std::vector<metrics::Category> categories;
    std::vector<Annotation> annotations;
};

/// Reads a dataset JSON file: images, categories (optional "frequency":
/// rare|common|frequent), annotations with xywh "bbox". Referential or
/// geometric problems raise LocatedError naming the offending id.
DatasetBundle read_dataset(const std::string& path);
void write_dataset(const std::string& path, const DatasetBundle& bundle);

metrics::GroundTruthSet to_ground_truth(const DatasetBundle& bundle);

struct PredictionRecord {
    int image_id = 0;
    /// Category reference: id when known, free-form label otherwise.
    int category_id = -1;
    std::string label;
    geom::Box box;
    std::optional<double> confidence;
};

/// Prediction JSONL, one object per line: {"image_id", "bbox": [xyxy],
/// "category_id" or "label", "score"}. Scored mode requires a score on
/// every line; unscored mode forbids it. '#' lines are comments.
std::vector<PredictionRecord> read_predictions(const std::string& path, bool scored);
void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records,
                       bool scored);

/// Requires category ids to be resolved on every record.
metrics::DetectionSet to_detections(const std::vector<PredictionRecord>& records, bool scored);

struct LabelResolution {
    std::size_t resolved = 0;
    std::vector<std::string> unknown;  // distinct labels with no category
};

/// Fills category_id on records that only carry a label, by exact
/// case-insensitive category-name match.
LabelResolution resolve_labels(std::vector<PredictionRecord>& records,
                               const std::vector<metrics::Category>& categories);

struct TranscriptItem {
    std::string label;
    geom::Box box;
};

struct TranscriptParse {
    std::vector<TranscriptItem> items;
    /// Brace blocks or arrays that looked like detections but did not parse.
    std::size_t unparsed_segments = 0;
};

/// Best-effort extraction of labeled boxes from free-form model output.
/// Understands {...} blocks with class/label/category plus rect/box/bbox
/// keys (quoting optional) and bare [x, y, x, y] arrays. Never throws on
/// malformed content.
TranscriptParse parse_transcript(const std::string& text);
TranscriptParse read_transcript_file(const std::string& path);

std::vector<geom::Box> transcript_boxes(const TranscriptParse& parse);

} // namespace groundkit::io
