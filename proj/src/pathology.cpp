#include "groundkit/pathology.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace groundkit::pathology {
namespace {

struct DeltaWindow {
    double lo[4];
    double hi[4];

    void reset(const double* delta) {
        for (int c = 0; c < 4; ++c) lo[c] = hi[c] = delta[c];
    }
    bool try_extend(const double* delta, double tolerance) {
        double new_lo[4], new_hi[4];
        for (int c = 0; c < 4; ++c) {
            new_lo[c] = std::min(lo[c], delta[c]);
            new_hi[c] = std::max(hi[c], delta[c]);
            if (new_hi[c] - new_lo[c] > 2.0 * tolerance) return false;
        }
        for (int c = 0; c < 4; ++c) {
            lo[c] = new_lo[c];
            hi[c] = new_hi[c];
        }
        return true;
    }
    double midrange(int c) const { return (lo[c] + hi[c]) / 2.0; }
};

void box_delta(const geom::Box& a, const geom::Box& b, double* out) {
    out[0] = b.xmin - a.xmin;
    out[1] = b.ymin - a.ymin;
    out[2] = b.xmax - a.xmax;
    out[3] = b.ymax - a.ymax;
}

std::size_t count_words(const std::string& text) {
    std::size_t words = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

bool ends_with_ellipsis(const std::string& text, std::size_t& start) {
    std::size_t end = text.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (end >= 3 && text.compare(end - 3, 3, "...") == 0) {
        start = end - 3;
        return true;
    }
    // UTF-8 horizontal ellipsis
    if (end >= 3 && text.compare(end - 3, 3, "\xe2\x80\xa6") == 0) {
        start = end - 3;
        return true;
    }
    return false;
}

} // namespace

std::vector<ArithmeticRun> find_arithmetic_runs(const std::vector<geom::Box>& boxes,
                                                const RunScanConfig& config) {
    if (config.min_boxes < 3)
        throw std::invalid_argument("a run needs at least 3 boxes (2 deltas)");
    if (!(config.tolerance >= 0.0))
        throw std::invalid_argument("run tolerance must be non-negative");

    std::vector<ArithmeticRun> runs;
    if (boxes.size() < config.min_boxes) return runs;

    std::size_t start = 0;
    while (start + 2 < boxes.size()) {
        double delta[4];
        box_delta(boxes[start], boxes[start + 1], delta);
        DeltaWindow window;
        window.reset(delta);

        std::size_t end = start + 1;  // last box currently in the window
        while (end + 1 < boxes.size()) {
            box_delta(boxes[end], boxes[end + 1], delta);
            if (!window.try_extend(delta, config.tolerance)) break;
            ++end;
        }

        const std::size_t length = end - start + 1;
        if (length >= config.min_boxes) {
            runs.push_back({start, length, window.midrange(0), window.midrange(1),
                            window.midrange(2), window.midrange(3)});
            start = end;  // the final box may open the next run
        } else {
            ++start;
        }
    }
    return runs;
}

double box_survival(double token_accuracy, int tokens_per_box) {
    if (token_accuracy < 0.0 || token_accuracy > 1.0)
        throw std::invalid_argument("token accuracy must be in [0, 1]");
    if (tokens_per_box < 1)
        throw std::invalid_argument("a box serialization has at least one token");
    return std::pow(token_accuracy, tokens_per_box);
}

const char* truncation_kind_name(TruncationKind kind) {
    switch (kind) {
        case TruncationKind::kNone: return "none";
        case TruncationKind::kUnclosedBracket: return "unclosed-bracket";
        case TruncationKind::kUnclosedSpan: return "unclosed-span";
        case TruncationKind::kLengthLimit: return "length-limit";
        case TruncationKind::kEllipsis: return "ellipsis";
    }
    return "unknown";
}

TruncationReport detect_truncation(const std::string& text, std::size_t max_words) {
    TruncationReport report;
    report.cut_position = text.size();

    std::vector<std::pair<char, std::size_t>> brackets;
    std::vector<std::pair<char, std::size_t>> spans;  // 'g' or 'o'
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '[' || c == '{' || c == '(') {
            brackets.emplace_back(c, i);
        } else if (c == ']' || c == '}' || c == ')') {
            const char opener = c == ']' ? '[' : (c == '}' ? '{' : '(');
            if (!brackets.empty() && brackets.back().first == opener) brackets.pop_back();
        } else if (c == '<') {
            if (text.compare(i, 3, "<g>") == 0) {
                spans.emplace_back('g', i);
            } else if (text.compare(i, 3, "<o>") == 0) {
                // <o> both opens a group and (in older transcripts) closes one
                if (!spans.empty() && spans.back().first == 'o')
                    spans.pop_back();
                else
                    spans.emplace_back('o', i);
            } else if (text.compare(i, 4, "</g>") == 0) {
                if (!spans.empty() && spans.back().first == 'g') spans.pop_back();
            } else if (text.compare(i, 4, "</o>") == 0) {
                if (!spans.empty() && spans.back().first == 'o') spans.pop_back();
            }
        }
    }

    if (!brackets.empty()) {
        report.kind = TruncationKind::kUnclosedBracket;
        report.cut_position = brackets.back().second;
        report.detail = std::string("unclosed '") + brackets.back().first + "'";
        return report;
    }
    if (!spans.empty()) {
        report.kind = TruncationKind::kUnclosedSpan;
        report.cut_position = spans.back().second;
        report.detail = spans.back().first == 'g' ? "unclosed phrase" : "unclosed object group";
        return report;
    }
    if (max_words > 0 && count_words(text) >= max_words) {
        report.kind = TruncationKind::kLengthLimit;
        report.detail = "word count reached the cap of " + std::to_string(max_words);
        return report;
    }
    std::size_t ellipsis_start = 0;
    if (ends_with_ellipsis(text, ellipsis_start)) {
        report.kind = TruncationKind::kEllipsis;
        report.cut_position = ellipsis_start;
        report.detail = "output trails off";
        return report;
    }
    return report;
}

} // namespace groundkit::pathology
