#pragma once

// Failure-signature analysis for generated box transcripts: arithmetic
// coordinate runs (copy-paste style hallucinations), whole-box survival
// under per-token corruption, and truncation detection.

#include "groundkit/geometry.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace groundkit::pathology {

/// A maximal stretch of consecutive boxes whose coordinate-wise deltas stay
/// (near) constant. length counts boxes, so a run carries length - 1 deltas.
struct ArithmeticRun {
    std::size_t begin = 0;
    std::size_t length = 0;
    double delta_xmin = 0.0;
    double delta_ymin = 0.0;
    double delta_xmax = 0.0;
    double delta_ymax = 0.0;
};

struct RunScanConfig {
    std::size_t min_boxes = 3;
    /// Deltas within a run may spread up to 2 * tolerance per coordinate.
    double tolerance = 1.0;
};

/// Greedy left-to-right scan for arithmetic runs. Reported deltas are the
/// per-coordinate midrange over the run. A run's final box may start the
/// next run.
std::vector<ArithmeticRun> find_arithmetic_runs(const std::vector<geom::Box>& boxes,
                                                const RunScanConfig& config = {});

/// Probability that every token of a box serialization survives independent
/// per-token corruption: token_accuracy ^ tokens_per_box.
double box_survival(double token_accuracy, int tokens_per_box = 9);

enum class TruncationKind {
    kNone,
    kUnclosedBracket,  // [ { ( left open
    kUnclosedSpan,     // <g> or <o> group left open
    kLengthLimit,      // word count reached the generation cap
    kEllipsis,         // output trails off with ... or the ellipsis rune
};

struct TruncationReport {
    TruncationKind kind = TruncationKind::kNone;
    /// Byte offset of the last structurally whole prefix (opener position
    /// for unclosed structures, text end otherwise).
    std::size_t cut_position = 0;
    std::string detail;
};

const char* truncation_kind_name(TruncationKind kind);

/// Checks a transcript for signs of a cut-off generation. max_words of 0
/// disables the length-limit check.
TruncationReport detect_truncation(const std::string& text, std::size_t max_words = 0);

} // namespace groundkit::pathology
