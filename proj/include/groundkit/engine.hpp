#pragma once

// Image-to-triplet annotation pipeline: caption an image, chunk the caption
// into noun phrases, ground each phrase to regions, caption each region,
// rewrite the region caption into a short referring expression, and store
// the results as replayable JSONL with checkpointed resume.

#include "groundkit/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace groundkit::engine {

struct ManifestEntry {
    std::string id;
    std::string uri;
    double width = 0.0;
    double height = 0.0;
    std::vector<std::string> tags;
};

/// One JSON object per line: {"id", "uri", "width", "height", "tags"}.
/// Lines starting with '#' are comments.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

enum class PhraseKind { kCategoryName, kDescriptive };

struct NounPhrase {
    std::string text;
    PhraseKind kind = PhraseKind::kCategoryName;

    bool operator==(const NounPhrase&) const = default;
};

/// True for function words and other non-content tokens (the bundled
/// lexicon: determiners, pronouns, prepositions, conjunctions, auxiliaries,
/// common verbs, numerals, and similar).
bool is_closed_class_word(const std::string& lowercase_word);

/// Splits a caption into candidate noun phrases: maximal runs of content
/// words between closed-class words and punctuation. Runs of one or two
/// words count as category names, longer runs as descriptive phrases.
/// Phrases are lowercased; duplicates keep their first occurrence.
std::vector<NounPhrase> extract_phrases(const std::string& caption);

/// Head-word filter for non-groundable phrases ("the image", "a nice view").
bool is_abstract_phrase(const std::string& phrase, const std::vector<std::string>& blocklist);

/// Exactly one sentence: non-empty, single terminal . ! or ? at the end.
bool is_single_sentence(const std::string& text);

/// Referring expressions stay short and comma-free: more than 5 and fewer
/// than 10 words, no comma characters.
bool is_valid_referring(const std::string& text);

struct GroundedRegion {
    geom::Box box;
    double score = 0.0;
};

/// One annotation-stage backend. Implementations must be safe to call from
/// several threads at once.
class StageClient {
public:
    virtual ~StageClient() = default;
    virtual std::string caption(const ManifestEntry& image) = 0;
    virtual std::vector<GroundedRegion> ground(const ManifestEntry& image,
                                               const std::string& phrase) = 0;
    virtual std::string region_caption(const ManifestEntry& image, const std::string& phrase,
                                       const geom::Box& box) = 0;
    virtual std::string rewrite_referring(const std::string& phrase,
                                          const std::string& detail) = 0;
};

/// Fixture-backed client for deterministic runs and tests. The fixture file
/// is one JSON object:
///   caption:        image id -> text
///   ground:         "image id|phrase" -> [{"box": [x,y,x,y], "score": s}]
///   region_caption: "image id|phrase" -> text
///   rewrite:        "phrase|detail" -> text
/// Missing entries throw std::runtime_error.
class ReplayClient : public StageClient {
public:
    explicit ReplayClient(const std::string& fixture_path);

    std::string caption(const ManifestEntry& image) override;
    std::vector<GroundedRegion> ground(const ManifestEntry& image,
                                       const std::string& phrase) override;
    std::string region_caption(const ManifestEntry& image, const std::string& phrase,
                               const geom::Box& box) override;
    std::string rewrite_referring(const std::string& phrase, const std::string& detail) override;

private:
    std::map<std::string, std::string> captions_;
    std::map<std::string, std::vector<GroundedRegion>> grounded_;
    std::map<std::string, std::string> region_captions_;
    std::map<std::string, std::string> rewrites_;
};

/// HTTP backend: POSTs JSON to {base}/caption, {base}/ground,
/// {base}/region_caption and {base}/rewrite. Calls are serialized
/// internally; failures throw std::runtime_error.
class HttpStageClient : public StageClient {
public:
    HttpStageClient(const std::string& host, int port, int timeout_ms = 10000);
    ~HttpStageClient() override;

    std::string caption(const ManifestEntry& image) override;
    std::vector<GroundedRegion> ground(const ManifestEntry& image,
                                       const std::string& phrase) override;
    std::string region_caption(const ManifestEntry& image, const std::string& phrase,
                               const geom::Box& box) override;
    std::string rewrite_referring(const std::string& phrase, const std::string& detail) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct EngineConfig {
    /// Grounded regions below this score are discarded; everything at or
    /// above it is kept (no top-1 restriction).
    double ground_score_threshold = 0.3;
    /// Extra attempts per stage call after the first failure.
    int retries = 2;
    /// Minimum region size in pixels; smaller grounded boxes are dropped.
    double min_region_width = 1.0;
    double min_region_height = 1.0;
    /// Image tag filters. deny wins over allow; empty allow list admits all.
    std::vector<std::string> allow_tags;
    std::vector<std::string> deny_tags;
    /// Phrases whose head word is listed here are not grounded.
    std::vector<std::string> abstract_blocklist = default_abstract_blocklist();
    /// Worker threads for the annotation stages.
    int jobs = 1;
    /// Stop after committing this many images in one run (0 = no limit).
    /// The next run resumes from the checkpoint.
    std::size_t stop_after_images = 0;

    static std::vector<std::string> default_abstract_blocklist();
};

EngineConfig read_engine_config(const std::string& path);

struct RegionRecord {
    geom::Box box;
    double score = 0.0;
    std::string phrase;
    PhraseKind kind = PhraseKind::kCategoryName;
    std::string detail;
    std::string referring;
};

struct ImageRecord {
    std::string id;
    std::string caption;
    std::vector<RegionRecord> regions;
};

struct RunStats {
    std::size_t images_committed = 0;
    std::size_t images_skipped = 0;
    std::size_t phrases_found = 0;
    std::size_t phrases_abstract = 0;
    std::size_t regions_kept = 0;
    std::size_t regions_below_threshold = 0;
    std::size_t regions_out_of_frame = 0;
    std::size_t regions_too_small = 0;
    std::size_t regions_bad_detail = 0;
    std::size_t regions_bad_referring = 0;
    std::size_t stage_retries = 0;
};

/// The output store is JSONL: a fixed header comment line, then one image
/// record per line. Rewriting the same records yields byte-identical files.
inline constexpr const char* kTripletHeader = "# groundkit triplets v1";

std::string serialize_image_record(const ImageRecord& record);
ImageRecord parse_image_record(const std::string& line);
std::vector<ImageRecord> read_triplets(const std::string& path);

/// Runs the pipeline over the manifest, appending one record per admitted
/// image to store_path and one checkpoint line per handled manifest entry
/// to checkpoint_path. When both files already exist, the run resumes: the
/// store is truncated to the last checkpointed offset and processing
/// continues with the first unhandled manifest entry. Interrupt and resume
/// produce byte-identical output to one uninterrupted run.
RunStats run_engine(const std::vector<ManifestEntry>& manifest, StageClient& client,
                    const EngineConfig& config, const std::string& store_path,
                    const std::string& checkpoint_path);

} // namespace groundkit::engine
