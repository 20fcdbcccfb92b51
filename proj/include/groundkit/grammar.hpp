#pragma once

// Grounded-output protocol: special-token vocabulary, LLM input-sequence
// construction, and parsing/serialization of grounded answers.
//
// Answers interleave plain text with spans of the form
//   <g>noun phrase</g><o><obj3><obj7></o>
// where each <objK> selects one of the input proposal boxes. Tokens are
// literal text markers; no tokenizer vocabulary is involved.

#include "groundkit/geometry.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace groundkit::grammar {

/// Maximum number of object slots an input sequence may carry.
inline constexpr int kMaxObjects = 100;

enum class TokenKind {
    kImagePlaceholder,
    kRoiPlaceholder,
    kGroundStart,
    kGroundEnd,
    kObjStart,
    kObjEnd,
    kObjIndex,
    kText,
};

struct Token {
    TokenKind kind = TokenKind::kText;
    int index = -1;       // kObjIndex only
    std::string text;     // kText only

    bool operator==(const Token&) const = default;
};

/// Symbolic LLM input: image placeholder, newline, one (index, roi) pair
/// per object, newline, then the question text.
using InputSequence = std::vector<Token>;

/// One grounded span plus the plain text that precedes it.
struct Span {
    std::string leading_text;
    std::string phrase;
    std::vector<int> indices;

    bool operator==(const Span&) const = default;
};

struct GroundedAnswer {
    std::vector<Span> spans;
    std::string trailing_text;

    bool operator==(const GroundedAnswer&) const = default;
};

enum class ParseMode { kStrict, kLenient };

enum class DiagnosticKind {
    kStrayToken,          // group/index token outside any span
    kReopenedPhrase,      // <g> while a phrase is already open
    kUnclosedPhrase,      // input ended inside <g>...
    kPhraseWithoutGroup,  // </g> not followed by <o>
    kLegacyGroupCloser,   // group closed by <o> instead of </o>
    kUnclosedGroup,       // group terminated by <g> or end of input
    kTextInsideGroup,     // non-token text between index tokens
    kIndexOutOfRange,     // <objK> with K >= num_objects
    kDuplicateIndex,      // repeated index within one span
    kEmptyIndexList,      // <o></o>
};

struct Diagnostic {
    std::size_t position = 0;  // byte offset into the source text
    DiagnosticKind kind = DiagnosticKind::kStrayToken;
    std::string message;
};

struct ParseResult {
    GroundedAnswer answer;
    std::vector<Diagnostic> diagnostics;
};

/// Thrown by strict-mode parsing and strict detection conversion.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, const std::string& message);
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

const char* diagnostic_kind_name(DiagnosticKind kind);

/// Builds the LLM input sequence for num_objects proposal boxes.
/// Requires 1 <= num_objects <= kMaxObjects and a non-empty question.
InputSequence build_input_sequence(int num_objects, const std::string& question);

std::string input_sequence_to_text(const InputSequence& sequence);

/// Parses answer text into spans. Strict mode throws ParseError on
/// malformed structure or out-of-range indices; lenient mode always
/// returns, recovering what it can and recording diagnostics. Duplicate
/// indices within a span are deduplicated in both modes.
ParseResult parse_grounded_answer(const std::string& text, int num_objects, ParseMode mode);

/// Canonical text form. parse(serialize(a)) == a for every valid answer
/// whose text segments contain no special-token markers.
std::string serialize_grounded_answer(const GroundedAnswer& answer);

struct LabeledDetection {
    std::string label;
    geom::Box box;

    bool operator==(const LabeledDetection&) const = default;
};

/// Resolves each (phrase, index) pair to a labeled box, span order first,
/// index order within a span. Out-of-range indices throw in strict mode
/// and are dropped with a diagnostic in lenient mode.
std::vector<LabeledDetection> answer_to_detections(const GroundedAnswer& answer,
                                                   const std::vector<geom::Box>& boxes,
                                                   ParseMode mode,
                                                   std::vector<Diagnostic>* diagnostics = nullptr);

} // namespace groundkit::grammar
