#include "groundkit/io_formats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace groundkit::io {
namespace {

using nlohmann::json;

std::string lowercase(const std::string& text) {
    std::string out = text;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LocatedError(path, 0, "cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    json value = json::parse(buffer.str(), nullptr, false);
    if (value.is_discarded()) throw LocatedError(path, 0, "malformed JSON");
    return value;
}

metrics::FrequencyTag frequency_from_name(const std::string& name, const std::string& path) {
    if (name == "rare") return metrics::FrequencyTag::kRare;
    if (name == "common") return metrics::FrequencyTag::kCommon;
    if (name == "frequent") return metrics::FrequencyTag::kFrequent;
    throw LocatedError(path, 0, "unknown category frequency '" + name + "'");
}

const char* frequency_name(metrics::FrequencyTag tag) {
    switch (tag) {
        case metrics::FrequencyTag::kRare: return "rare";
        case metrics::FrequencyTag::kCommon: return "common";
        case metrics::FrequencyTag::kFrequent: return "frequent";
        case metrics::FrequencyTag::kUnknown: break;
    }
    return "";
}

geom::Box xyxy_from_json(const json& value, const std::string& path, std::size_t line) {
    if (!value.is_array() || value.size() != 4)
        throw LocatedError(path, line, "bbox must be a 4-element array");
    geom::Box box{value[0].get<double>(), value[1].get<double>(), value[2].get<double>(),
                  value[3].get<double>()};
    if (!geom::is_valid(box))
        throw LocatedError(path, line, "bbox coordinates are not a valid xyxy box");
    return box;
}

// Free-form transcript scanning helpers.

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

void skip_spaces(const std::string& text, std::size_t& pos) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

bool parse_number(const std::string& text, std::size_t& pos, double& out) {
    skip_spaces(text, pos);
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) return false;
    pos += static_cast<std::size_t>(end - begin);
    out = value;
    return true;
}

// [x, y, x, y] starting at '['; pos moves past ']' on success.
bool parse_quad(const std::string& text, std::size_t& pos, geom::Box& out) {
    std::size_t cursor = pos;
    if (cursor >= text.size() || text[cursor] != '[') return false;
    ++cursor;
    double values[4];
    for (int i = 0; i < 4; ++i) {
        if (!parse_number(text, cursor, values[i])) return false;
        skip_spaces(text, cursor);
        if (i < 3) {
            if (cursor >= text.size() || text[cursor] != ',') return false;
            ++cursor;
        }
    }
    skip_spaces(text, cursor);
    if (cursor >= text.size() || text[cursor] != ']') return false;
    ++cursor;
    geom::Box box{values[0], values[1], values[2], values[3]};
    if (!geom::is_valid(box)) return false;
    out = box;
    pos = cursor;
    return true;
}

// Matches `key` as a standalone word (optionally quoted) followed by ':'.
// Returns the position just past the colon, or npos.
std::size_t find_key(const std::string& text, const std::string& key) {
    for (std::size_t pos = text.find(key); pos != std::string::npos;
         pos = text.find(key, pos + 1)) {
        if (pos > 0 && is_word_char(text[pos - 1])) continue;
        std::size_t after = pos + key.size();
        if (after < text.size() && is_word_char(text[after])) continue;
        if (after < text.size() && (text[after] == '\'' || text[after] == '"')) ++after;
        skip_spaces(text, after);
        if (after < text.size() && text[after] == ':') return after + 1;
    }
    return std::string::npos;
}

std::string parse_value_string(const std::string& text, std::size_t pos) {
    skip_spaces(text, pos);
    if (pos >= text.size()) return "";
    if (text[pos] == '\'' || text[pos] == '"') {
        const char quote = text[pos];
        std::size_t end = text.find(quote, pos + 1);
        if (end == std::string::npos) return "";
        return text.substr(pos + 1, end - pos - 1);
    }
    std::size_t end = pos;
    while (end < text.size() && text[end] != ',' && text[end] != '}' && text[end] != '\n')
        ++end;
    std::string value = text.substr(pos, end - pos);
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back())))
        value.pop_back();
    return value;
}

// The matching '}' for the '{' at open, honoring nested braces/brackets.
std::size_t matching_brace(const std::string& text, std::size_t open) {
    int depth = 0;
    for (std::size_t pos = open; pos < text.size(); ++pos) {
        if (text[pos] == '{' || text[pos] == '[') ++depth;
        else if (text[pos] == '}' || text[pos] == ']') {
            --depth;
            if (depth == 0) return pos;
        }
    }
    return std::string::npos;
}

} // namespace

LocatedError::LocatedError(std::string path, std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? path + ":" + std::to_string(line) + ": " + message
                                  : path + ": " + message),
      path_(std::move(path)),
      line_(line) {}

DatasetBundle read_dataset(const std::string& path) {
    json root = load_json_file(path);
    DatasetBundle bundle;

    std::set<int> image_ids, category_ids, annotation_ids;
    for (const json& item : root.value("images", json::array())) {
        ImageInfo image;
        image.id = item.at("id").get<int>();
        image.file_name = item.value("file_name", "");
        image.width = item.at("width").get<double>();
        image.height = item.at("height").get<double>();
        if (!(image.width > 0.0) || !(image.height > 0.0))
            throw LocatedError(path, 0,
                               "image " + std::to_string(image.id) +
                                   " has non-positive dimensions");
        if (!image_ids.insert(image.id).second)
            throw LocatedError(path, 0, "duplicate image id " + std::to_string(image.id));
        bundle.images.push_back(std::move(image));
    }

    for (const json& item : root.value("categories", json::array())) {
        metrics::Category category;
        category.id = item.at("id").get<int>();
        category.name = item.at("name").get<std::string>();
        if (item.contains("frequency"))
            category.frequency =
                frequency_from_name(item.at("frequency").get<std::string>(), path);
        if (!category_ids.insert(category.id).second)
            throw LocatedError(path, 0, "duplicate category id " + std::to_string(category.id));
        bundle.categories.push_back(std::move(category));
    }

    for (const json& item : root.value("annotations", json::array())) {
        Annotation annotation;
        annotation.id = item.at("id").get<int>();
        annotation.image_id = item.at("image_id").get<int>();
        annotation.category_id = item.at("category_id").get<int>();
        if (!annotation_ids.insert(annotation.id).second)
            throw LocatedError(path, 0,
                               "duplicate annotation id " + std::to_string(annotation.id));
        if (!image_ids.count(annotation.image_id))
            throw LocatedError(path, 0,
                               "annotation " + std::to_string(annotation.id) +
                                   " references missing image " +
                                   std::to_string(annotation.image_id));
        if (!category_ids.count(annotation.category_id))
            throw LocatedError(path, 0,
                               "annotation " + std::to_string(annotation.id) +
                                   " references missing category " +
                                   std::to_string(annotation.category_id));
        const json& bbox = item.at("bbox");
        if (!bbox.is_array() || bbox.size() != 4)
            throw LocatedError(path, 0,
                               "annotation " + std::to_string(annotation.id) +
                                   " bbox must be a 4-element array");
        const double x = bbox[0].get<double>(), y = bbox[1].get<double>();
        const double w = bbox[2].get<double>(), h = bbox[3].get<double>();
        if (w < 0.0 || h < 0.0)
            throw LocatedError(path, 0,
                               "annotation " + std::to_string(annotation.id) +
                                   " has negative bbox size");
        annotation.box = {x, y, x + w, y + h};
        if (!geom::is_valid(annotation.box))
            throw LocatedError(path, 0,
                               "annotation " + std::to_string(annotation.id) +
                                   " bbox is not finite");
        annotation.ignore =
            item.value("ignore", 0) != 0 || item.value("iscrowd", 0) != 0;
        bundle.annotations.push_back(annotation);
    }
    return bundle;
}

void write_dataset(const std::string& path, const DatasetBundle& bundle) {
    json images = json::array();
    for (const ImageInfo& image : bundle.images)
        images.push_back(json{{"file_name", image.file_name},
                              {"height", image.height},
                              {"id", image.id},
                              {"width", image.width}});

    json categories = json::array();
    for (const metrics::Category& category : bundle.categories) {
        json item{{"id", category.id}, {"name", category.name}};
        if (category.frequency != metrics::FrequencyTag::kUnknown)
            item["frequency"] = frequency_name(category.frequency);
        categories.push_back(std::move(item));
    }

    json annotations = json::array();
    for (const Annotation& annotation : bundle.annotations) {
        json item{{"bbox",
                   json::array({annotation.box.xmin, annotation.box.ymin,
                                annotation.box.xmax - annotation.box.xmin,
                                annotation.box.ymax - annotation.box.ymin})},
                  {"category_id", annotation.category_id},
                  {"id", annotation.id},
                  {"image_id", annotation.image_id}};
        if (annotation.ignore) item["ignore"] = 1;
        annotations.push_back(std::move(item));
    }

    json root{{"annotations", annotations}, {"categories", categories}, {"images", images}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw LocatedError(path, 0, "cannot open file for writing");
    out << root.dump(2) << '\n';
    if (!out) throw LocatedError(path, 0, "write failed");
}

metrics::GroundTruthSet to_ground_truth(const DatasetBundle& bundle) {
    metrics::GroundTruthSet gt;
    gt.categories = bundle.categories;
    for (const ImageInfo& image : bundle.images) gt.by_image[image.id];
    for (const Annotation& annotation : bundle.annotations)
        gt.by_image[annotation.image_id].push_back(
            {annotation.box, annotation.category_id, annotation.ignore});
    return gt;
}

std::vector<PredictionRecord> read_predictions(const std::string& path, bool scored) {
    std::ifstream in(path);
    if (!in) throw LocatedError(path, 0, "cannot open file");

    std::vector<PredictionRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        json value = json::parse(line, nullptr, false);
        if (value.is_discarded()) throw LocatedError(path, line_number, "malformed JSON");

        PredictionRecord record;
        record.image_id = value.at("image_id").get<int>();
        record.box = xyxy_from_json(value.at("bbox"), path, line_number);
        if (value.contains("category_id")) record.category_id = value.at("category_id").get<int>();
        if (value.contains("label")) record.label = value.at("label").get<std::string>();
        if (record.category_id < 0 && record.label.empty())
            throw LocatedError(path, line_number, "need either category_id or label");

        const bool has_score = value.contains("score");
        if (scored && !has_score)
            throw LocatedError(path, line_number, "scored predictions require a score");
        if (!scored && has_score)
            throw LocatedError(path, line_number,
                               "unscored predictions must not carry a score");
        if (has_score) {
            record.confidence = value.at("score").get<double>();
            if (!std::isfinite(*record.confidence))
                throw LocatedError(path, line_number, "score must be finite");
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records,
                       bool scored) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw LocatedError(path, 0, "cannot open file for writing");
    out << "# groundkit predictions v1\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PredictionRecord& record = records[i];
        json value{{"bbox", json::array({record.box.xmin, record.box.ymin, record.box.xmax,
                                         record.box.ymax})},
                   {"image_id", record.image_id}};
        if (record.category_id >= 0) value["category_id"] = record.category_id;
        if (!record.label.empty()) value["label"] = record.label;
        if (scored) {
            if (!record.confidence)
                throw LocatedError(path, i + 2, "scored record lacks a confidence");
            value["score"] = *record.confidence;
        }
        out << value.dump() << '\n';
    }
    if (!out) throw LocatedError(path, 0, "write failed");
}

metrics::DetectionSet to_detections(const std::vector<PredictionRecord>& records, bool scored) {
    metrics::DetectionSet detections;
    detections.scored = scored;
    for (const PredictionRecord& record : records) {
        if (record.category_id < 0)
            throw std::invalid_argument("prediction with unresolved label '" + record.label +
                                        "'; resolve labels against the dataset first");
        const double confidence = scored && record.confidence ? *record.confidence : 0.0;
        detections.by_image[record.image_id].push_back(
            {record.box, record.category_id, confidence});
    }
    return detections;
}

LabelResolution resolve_labels(std::vector<PredictionRecord>& records,
                               const std::vector<metrics::Category>& categories) {
    std::map<std::string, int> by_name;
    for (const metrics::Category& category : categories)
        by_name[lowercase(category.name)] = category.id;

    LabelResolution resolution;
    std::set<std::string> unknown;
    for (PredictionRecord& record : records) {
        if (record.category_id >= 0 || record.label.empty()) continue;
        auto it = by_name.find(lowercase(record.label));
        if (it == by_name.end()) {
            unknown.insert(record.label);
        } else {
            record.category_id = it->second;
            ++resolution.resolved;
        }
    }
    resolution.unknown.assign(unknown.begin(), unknown.end());
    return resolution;
}

TranscriptParse parse_transcript(const std::string& text) {
    TranscriptParse parse;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == '{') {
            const std::size_t end = matching_brace(text, pos);
            if (end == std::string::npos) {
                ++parse.unparsed_segments;
                ++pos;
                continue;
            }
            const std::string block = text.substr(pos, end - pos + 1);
            std::string label;
            for (const char* key : {"class", "label", "category", "name"}) {
                std::size_t at = find_key(block, key);
                if (at != std::string::npos) {
                    label = parse_value_string(block, at);
                    break;
                }
            }
            geom::Box box;
            bool have_box = false;
            for (const char* key : {"rect", "bbox", "box"}) {
                std::size_t at = find_key(block, key);
                if (at == std::string::npos) continue;
                skip_spaces(block, at);
                if (at < block.size() && parse_quad(block, at, box)) {
                    have_box = true;
                    break;
                }
            }
            if (have_box)
                parse.items.push_back({label, box});
            else
                ++parse.unparsed_segments;
            pos = end + 1;
        } else if (c == '[') {
            geom::Box box;
            std::size_t cursor = pos;
            if (parse_quad(text, cursor, box)) {
                parse.items.push_back({"", box});
                pos = cursor;
            } else {
                ++pos;
            }
        } else {
            ++pos;
        }
    }
    return parse;
}

TranscriptParse read_transcript_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LocatedError(path, 0, "cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_transcript(buffer.str());
}

std::vector<geom::Box> transcript_boxes(const TranscriptParse& parse) {
    std::vector<geom::Box> boxes;
    boxes.reserve(parse.items.size());
    for (const TranscriptItem& item : parse.items) boxes.push_back(item.box);
    return boxes;
}

} // namespace groundkit::io
