#include "groundkit/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <stdexcept>

namespace groundkit::grammar {
namespace {

constexpr const char* kImageToken = "<image>";
constexpr const char* kRoiToken = "<roi>";
constexpr const char* kGroundStartToken = "<g>";
constexpr const char* kGroundEndToken = "</g>";
constexpr const char* kObjStartToken = "<o>";
constexpr const char* kObjEndToken = "</o>";

std::string obj_index_token(int index) {
    return "<obj" + std::to_string(index) + ">";
}

// Scanner token: either a special marker or a run of plain text.
struct Lexeme {
    enum Kind { kGroundStart, kGroundEnd, kObjStart, kObjEnd, kObjIndex, kText } kind;
    std::size_t position;
    int index = -1;       // kObjIndex
    std::string text;     // kText, or literal form of a special for recovery
};

bool starts_with(const std::string& s, std::size_t pos, const char* literal) {
    return s.compare(pos, std::char_traits<char>::length(literal), literal) == 0;
}

// Matches "<obj" digits ">" at pos. Rejects absurdly long digit runs so the
// index always fits an int.
bool match_obj_index(const std::string& s, std::size_t pos, int& index, std::size_t& length) {
    if (!starts_with(s, pos, "<obj")) return false;
    std::size_t cursor = pos + 4;
    std::size_t digits_begin = cursor;
    while (cursor < s.size() && s[cursor] >= '0' && s[cursor] <= '9') ++cursor;
    std::size_t digit_count = cursor - digits_begin;
    if (digit_count == 0 || digit_count > 8) return false;
    if (cursor >= s.size() || s[cursor] != '>') return false;
    index = std::stoi(s.substr(digits_begin, digit_count));
    length = cursor + 1 - pos;
    return true;
}

std::vector<Lexeme> scan(const std::string& text) {
    std::vector<Lexeme> out;
    std::string pending;
    std::size_t pending_start = 0;

    auto flush = [&]() {
        if (!pending.empty()) {
            out.push_back({Lexeme::kText, pending_start, -1, pending});
            pending.clear();
        }
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] == '<') {
            int index = -1;
            std::size_t length = 0;
            Lexeme special{Lexeme::kText, pos};
            bool matched = true;
            if (starts_with(text, pos, kGroundEndToken)) {
                special.kind = Lexeme::kGroundEnd;
                special.text = kGroundEndToken;
            } else if (starts_with(text, pos, kGroundStartToken)) {
                special.kind = Lexeme::kGroundStart;
                special.text = kGroundStartToken;
            } else if (starts_with(text, pos, kObjEndToken)) {
                special.kind = Lexeme::kObjEnd;
                special.text = kObjEndToken;
            } else if (match_obj_index(text, pos, index, length)) {
                special.kind = Lexeme::kObjIndex;
                special.index = index;
                special.text = text.substr(pos, length);
            } else if (starts_with(text, pos, kObjStartToken)) {
                special.kind = Lexeme::kObjStart;
                special.text = kObjStartToken;
            } else {
                matched = false;
            }
            if (matched) {
                flush();
                out.push_back(special);
                pos += special.text.size();
                continue;
            }
        }
        if (pending.empty()) pending_start = pos;
        pending.push_back(text[pos]);
        ++pos;
    }
    flush();
    return out;
}

bool is_whitespace_only(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

class Parser {
public:
    Parser(const std::string& text, int num_objects, ParseMode mode)
        : lexemes_(scan(text)), num_objects_(num_objects), mode_(mode) {}

    ParseResult run() {
        while (cursor_ < lexemes_.size()) {
            const Lexeme& lx = lexemes_[cursor_];
            switch (state_) {
                case State::kOutside: outside(lx); break;
                case State::kInPhrase: in_phrase(lx); break;
                case State::kInGroup: in_group(lx); break;
            }
            ++cursor_;
        }
        finish();
        ParseResult result;
        result.answer.spans = std::move(spans_);
        result.answer.trailing_text = std::move(text_);
        result.diagnostics = std::move(diagnostics_);
        return result;
    }

private:
    enum class State { kOutside, kInPhrase, kInGroup };

    void fail(std::size_t position, const std::string& message) {
        throw ParseError(position, message);
    }

    void note(std::size_t position, DiagnosticKind kind, std::string message) {
        diagnostics_.push_back({position, kind, std::move(message)});
    }

    void outside(const Lexeme& lx) {
        switch (lx.kind) {
            case Lexeme::kText:
                text_ += lx.text;
                break;
            case Lexeme::kGroundStart:
                state_ = State::kInPhrase;
                phrase_.clear();
                phrase_start_ = lx.position;
                break;
            default:
                if (mode_ == ParseMode::kStrict) {
                    if (lx.kind == Lexeme::kObjIndex)
                        fail(lx.position, "index token outside an object group: " + lx.text);
                    fail(lx.position, "unbalanced delimiter outside any span: " + lx.text);
                }
                note(lx.position, DiagnosticKind::kStrayToken,
                     "stray token kept as text: " + lx.text);
                text_ += lx.text;
                break;
        }
    }

    void in_phrase(const Lexeme& lx) {
        switch (lx.kind) {
            case Lexeme::kText:
                phrase_ += lx.text;
                break;
            case Lexeme::kGroundEnd:
                close_phrase(lx.position);
                break;
            case Lexeme::kObjStart:
                // Missing </g>; the group opener still marks the phrase end.
                if (mode_ == ParseMode::kStrict)
                    fail(lx.position, "object group opened inside an unclosed phrase");
                note(lx.position, DiagnosticKind::kUnclosedPhrase,
                     "phrase closed implicitly by object group");
                open_group();
                break;
            case Lexeme::kGroundStart:
                if (mode_ == ParseMode::kStrict)
                    fail(lx.position, "phrase reopened before being closed");
                note(lx.position, DiagnosticKind::kReopenedPhrase,
                     "previous phrase kept as text");
                text_ += std::string(kGroundStartToken) + phrase_;
                phrase_.clear();
                phrase_start_ = lx.position;
                break;
            default:
                if (mode_ == ParseMode::kStrict) {
                    if (lx.kind == Lexeme::kObjIndex)
                        fail(lx.position, "index token outside an object group: " + lx.text);
                    fail(lx.position, "unbalanced delimiter inside a phrase: " + lx.text);
                }
                note(lx.position, DiagnosticKind::kStrayToken,
                     "stray token kept inside phrase: " + lx.text);
                phrase_ += lx.text;
                break;
        }
    }

    // After </g> the next lexeme must open the object group. Lenient mode
    // tolerates whitespace in between and degrades a groupless phrase to a
    // span with no indices.
    void close_phrase(std::size_t position) {
        std::size_t lookahead = cursor_ + 1;
        if (lookahead < lexemes_.size() && mode_ == ParseMode::kLenient &&
            lexemes_[lookahead].kind == Lexeme::kText &&
            is_whitespace_only(lexemes_[lookahead].text) &&
            lookahead + 1 < lexemes_.size() &&
            lexemes_[lookahead + 1].kind == Lexeme::kObjStart) {
            ++lookahead;
        }
        if (lookahead < lexemes_.size() && lexemes_[lookahead].kind == Lexeme::kObjStart) {
            cursor_ = lookahead;
            open_group();
            return;
        }
        if (mode_ == ParseMode::kStrict)
            fail(position, "phrase is not followed by an object group");
        note(position, DiagnosticKind::kPhraseWithoutGroup,
             "span recorded with no indices");
        commit_span();
        state_ = State::kOutside;
    }

    void open_group() {
        indices_.clear();
        state_ = State::kInGroup;
    }

    void in_group(const Lexeme& lx) {
        switch (lx.kind) {
            case Lexeme::kObjIndex:
                add_index(lx);
                break;
            case Lexeme::kObjEnd:
                close_group(lx.position, false);
                break;
            case Lexeme::kObjStart:
                // Some transcripts close groups with <o> instead of </o>.
                if (mode_ == ParseMode::kStrict)
                    fail(lx.position, "object group closed by its opening token");
                note(lx.position, DiagnosticKind::kLegacyGroupCloser,
                     "group closed by <o>");
                close_group(lx.position, false);
                break;
            case Lexeme::kGroundStart:
                if (mode_ == ParseMode::kStrict)
                    fail(lx.position, "object group left unclosed");
                note(lx.position, DiagnosticKind::kUnclosedGroup,
                     "group closed implicitly by next phrase");
                close_group(lx.position, true);
                state_ = State::kInPhrase;
                phrase_.clear();
                phrase_start_ = lx.position;
                break;
            default:
                if (mode_ == ParseMode::kStrict)
                    fail(lx.position, "unexpected content inside an object group");
                note(lx.position, DiagnosticKind::kTextInsideGroup,
                     "dropped content inside object group: " + lx.text);
                break;
        }
    }

    void add_index(const Lexeme& lx) {
        if (lx.index >= num_objects_) {
            if (mode_ == ParseMode::kStrict)
                fail(lx.position, "object index out of range: " + lx.text);
            note(lx.position, DiagnosticKind::kIndexOutOfRange,
                 "dropped out-of-range index: " + lx.text);
            return;
        }
        if (std::find(indices_.begin(), indices_.end(), lx.index) != indices_.end()) {
            note(lx.position, DiagnosticKind::kDuplicateIndex,
                 "dropped repeated index: " + lx.text);
            return;
        }
        indices_.push_back(lx.index);
    }

    void close_group(std::size_t position, bool reentering_phrase) {
        if (indices_.empty())
            note(position, DiagnosticKind::kEmptyIndexList, "span has no indices");
        commit_span();
        if (!reentering_phrase) state_ = State::kOutside;
    }

    void commit_span() {
        Span span;
        span.leading_text = std::move(text_);
        span.phrase = std::move(phrase_);
        span.indices = std::move(indices_);
        spans_.push_back(std::move(span));
        text_.clear();
        phrase_.clear();
        indices_.clear();
    }

    void finish() {
        if (state_ == State::kInPhrase) {
            if (mode_ == ParseMode::kStrict)
                fail(phrase_start_, "input ended inside a phrase");
            note(phrase_start_, DiagnosticKind::kUnclosedPhrase,
                 "unterminated phrase kept as text");
            text_ += std::string(kGroundStartToken) + phrase_;
        } else if (state_ == State::kInGroup) {
            if (mode_ == ParseMode::kStrict)
                fail(phrase_start_, "input ended inside an object group");
            note(phrase_start_, DiagnosticKind::kUnclosedGroup,
                 "group closed implicitly at end of input");
            close_group(phrase_start_, false);
        }
    }

    std::vector<Lexeme> lexemes_;
    int num_objects_;
    ParseMode mode_;

    std::size_t cursor_ = 0;
    State state_ = State::kOutside;
    std::vector<Span> spans_;
    std::string text_;
    std::string phrase_;
    std::vector<int> indices_;
    std::size_t phrase_start_ = 0;
    std::vector<Diagnostic> diagnostics_;
};

} // namespace

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at byte " + std::to_string(position) + ": " + message),
      position_(position) {}

const char* diagnostic_kind_name(DiagnosticKind kind) {
    switch (kind) {
        case DiagnosticKind::kStrayToken: return "stray-token";
        case DiagnosticKind::kReopenedPhrase: return "reopened-phrase";
        case DiagnosticKind::kUnclosedPhrase: return "unclosed-phrase";
        case DiagnosticKind::kPhraseWithoutGroup: return "phrase-without-group";
        case DiagnosticKind::kLegacyGroupCloser: return "legacy-group-closer";
        case DiagnosticKind::kUnclosedGroup: return "unclosed-group";
        case DiagnosticKind::kTextInsideGroup: return "text-inside-group";
        case DiagnosticKind::kIndexOutOfRange: return "index-out-of-range";
        case DiagnosticKind::kDuplicateIndex: return "duplicate-index";
        case DiagnosticKind::kEmptyIndexList: return "empty-index-list";
    }
    return "unknown";
}

InputSequence build_input_sequence(int num_objects, const std::string& question) {
    if (num_objects < 1 || num_objects > kMaxObjects)
        throw std::invalid_argument("number of objects must be in [1, " +
                                    std::to_string(kMaxObjects) + "], got " +
                                    std::to_string(num_objects));
    if (question.empty())
        throw std::invalid_argument("question must not be empty");

    InputSequence sequence;
    sequence.reserve(static_cast<std::size_t>(num_objects) * 2 + 4);
    sequence.push_back({TokenKind::kImagePlaceholder, -1, ""});
    sequence.push_back({TokenKind::kText, -1, "\n"});
    for (int i = 0; i < num_objects; ++i) {
        sequence.push_back({TokenKind::kObjIndex, i, ""});
        sequence.push_back({TokenKind::kRoiPlaceholder, -1, ""});
    }
    sequence.push_back({TokenKind::kText, -1, "\n"});
    sequence.push_back({TokenKind::kText, -1, question});
    return sequence;
}

std::string input_sequence_to_text(const InputSequence& sequence) {
    std::string out;
    for (const Token& token : sequence) {
        switch (token.kind) {
            case TokenKind::kImagePlaceholder: out += kImageToken; break;
            case TokenKind::kRoiPlaceholder: out += kRoiToken; break;
            case TokenKind::kGroundStart: out += kGroundStartToken; break;
            case TokenKind::kGroundEnd: out += kGroundEndToken; break;
            case TokenKind::kObjStart: out += kObjStartToken; break;
            case TokenKind::kObjEnd: out += kObjEndToken; break;
            case TokenKind::kObjIndex: out += obj_index_token(token.index); break;
            case TokenKind::kText: out += token.text; break;
        }
    }
    return out;
}

ParseResult parse_grounded_answer(const std::string& text, int num_objects, ParseMode mode) {
    if (num_objects < 0)
        throw std::invalid_argument("number of objects must be non-negative");
    return Parser(text, num_objects, mode).run();
}

std::string serialize_grounded_answer(const GroundedAnswer& answer) {
    std::string out;
    for (const Span& span : answer.spans) {
        out += span.leading_text;
        out += kGroundStartToken;
        out += span.phrase;
        out += kGroundEndToken;
        out += kObjStartToken;
        for (int index : span.indices) out += obj_index_token(index);
        out += kObjEndToken;
    }
    out += answer.trailing_text;
    return out;
}

std::vector<LabeledDetection> answer_to_detections(const GroundedAnswer& answer,
                                                   const std::vector<geom::Box>& boxes,
                                                   ParseMode mode,
                                                   std::vector<Diagnostic>* diagnostics) {
    std::vector<LabeledDetection> detections;
    for (const Span& span : answer.spans) {
        for (int index : span.indices) {
            if (index < 0 || static_cast<std::size_t>(index) >= boxes.size()) {
                if (mode == ParseMode::kStrict)
                    throw std::out_of_range("object index " + std::to_string(index) +
                                            " has no box (have " +
                                            std::to_string(boxes.size()) + ")");
                if (diagnostics)
                    diagnostics->push_back({0, DiagnosticKind::kIndexOutOfRange,
                                            "dropped index " + std::to_string(index) +
                                                " with no box"});
                continue;
            }
            detections.push_back({span.phrase, boxes[static_cast<std::size_t>(index)]});
        }
    }
    return detections;
}

} // namespace groundkit::grammar
