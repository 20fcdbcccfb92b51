#include "groundkit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace groundkit::matching {
namespace {

void check_matrix(const Matrix& m, const char* name) {
    if (m.values.size() != m.rows * m.cols)
        throw std::invalid_argument(std::string(name) + ": storage size " +
                                    std::to_string(m.values.size()) + " does not match " +
                                    std::to_string(m.rows) + "x" + std::to_string(m.cols));
    for (double v : m.values)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(name) + ": non-finite entry");
}

double classification_term(double score, const CostOptions& options) {
    if (score < 0.0 || score > 1.0)
        throw std::invalid_argument("class score outside [0, 1]: " + std::to_string(score));
    if (!options.focal_classification) return 1.0 - score;
    const double a = options.focal_alpha;
    const double g = options.focal_gamma;
    const double pos = a * std::pow(1.0 - score, g) * (-std::log(score + 1e-8));
    const double neg = (1.0 - a) * std::pow(score, g) * (-std::log(1.0 - score + 1e-8));
    return pos - neg;
}

// Jonker-Volgenant shortest augmenting paths on a square matrix. Fills
// row_of_col (matching) and the dual potentials, 1-indexed internally.
void solve_square(const Matrix& a, std::size_t n, std::vector<std::size_t>& col_of_row,
                  std::vector<double>& u_out, std::vector<double>& v_out) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = a.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    col_of_row.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
    u_out.assign(u.begin() + 1, u.end());
    v_out.assign(v.begin() + 1, v.end());
}

// Kuhn's augmenting search over the admissible (zero reduced cost) edges,
// restricted to rows >= first_free and columns not pinned by earlier rows.
bool try_match(std::size_t row, const std::vector<std::vector<std::size_t>>& adjacency,
               std::vector<char>& visited, std::vector<std::ptrdiff_t>& row_of_col) {
    for (std::size_t col : adjacency[row]) {
        if (visited[col]) continue;
        visited[col] = 1;
        if (row_of_col[col] < 0 ||
            try_match(static_cast<std::size_t>(row_of_col[col]), adjacency, visited, row_of_col)) {
            row_of_col[col] = static_cast<std::ptrdiff_t>(row);
            return true;
        }
    }
    return false;
}

bool feasible(std::size_t n, const std::vector<std::vector<std::size_t>>& adjacency,
              const std::vector<std::ptrdiff_t>& pinned_col_of_row, std::size_t first_free) {
    std::vector<std::ptrdiff_t> row_of_col(n, -1);
    std::vector<std::vector<std::size_t>> filtered(n);
    std::vector<char> pinned_col(n, 0);
    for (std::size_t i = 0; i < first_free; ++i) {
        row_of_col[static_cast<std::size_t>(pinned_col_of_row[i])] =
            static_cast<std::ptrdiff_t>(i);
        pinned_col[static_cast<std::size_t>(pinned_col_of_row[i])] = 1;
    }
    for (std::size_t i = first_free; i < n; ++i) {
        for (std::size_t col : adjacency[i])
            if (!pinned_col[col]) filtered[i].push_back(col);
    }
    for (std::size_t i = first_free; i < n; ++i) {
        std::vector<char> visited(n, 0);
        if (!try_match(i, filtered, visited, row_of_col)) return false;
    }
    return true;
}

} // namespace

Matrix granularity_scores(const Matrix& probes, const Matrix& queries) {
    check_matrix(probes, "probes");
    check_matrix(queries, "queries");
    if (probes.cols != queries.cols)
        throw std::invalid_argument("feature dimension mismatch: probes have " +
                                    std::to_string(probes.cols) + ", queries have " +
                                    std::to_string(queries.cols));
    Matrix scores(probes.rows, queries.rows);
    for (std::size_t c = 0; c < probes.rows; ++c) {
        for (std::size_t q = 0; q < queries.rows; ++q) {
            double dot = 0.0;
            for (std::size_t d = 0; d < probes.cols; ++d)
                dot += probes.at(c, d) * queries.at(q, d);
            scores.at(c, q) = dot;
        }
    }
    return scores;
}

Matrix pairwise_cost(const std::vector<geom::Box>& predictions,
                     const std::vector<geom::Box>& targets,
                     const Matrix& class_scores,
                     const geom::Extent& frame,
                     const CostOptions& options) {
    geom::validate(frame);
    for (const geom::Box& b : predictions) geom::validate(b);
    for (const geom::Box& b : targets) geom::validate(b);
    check_matrix(class_scores, "class_scores");
    if (class_scores.rows != predictions.size() || class_scores.cols != targets.size())
        throw std::invalid_argument(
            "class_scores must be predictions x targets, got " +
            std::to_string(class_scores.rows) + "x" + std::to_string(class_scores.cols) +
            " for " + std::to_string(predictions.size()) + " predictions and " +
            std::to_string(targets.size()) + " targets");

    Matrix cost(predictions.size(), targets.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (std::size_t j = 0; j < targets.size(); ++j) {
            double cls = classification_term(class_scores.at(i, j), options);
            double l1 = geom::l1_distance(predictions[i], targets[j], frame);
            double giou = geom::giou(predictions[i], targets[j]);
            cost.at(i, j) = options.weights.classification * cls +
                            options.weights.l1 * l1 +
                            options.weights.giou * (1.0 - giou);
        }
    }
    return cost;
}

Assignment hungarian(const Matrix& cost) {
    check_matrix(cost, "cost");
    Assignment result;
    if (cost.rows == 0 || cost.cols == 0) return result;

    const std::size_t n = std::max(cost.rows, cost.cols);
    Matrix padded(n, n, 0.0);
    for (std::size_t i = 0; i < cost.rows; ++i)
        for (std::size_t j = 0; j < cost.cols; ++j)
            padded.at(i, j) = cost.at(i, j);

    std::vector<std::size_t> col_of_row;
    std::vector<double> u, v;
    solve_square(padded, n, col_of_row, u, v);

    // Admissible edges: reduced cost within rounding slack of zero. The
    // solver's own matching is always admissible, so a perfect matching in
    // this graph exists and any one of them has the optimal total cost.
    double scale = 1.0;
    for (double value : padded.values) scale = std::max(scale, std::fabs(value));
    const double slack = 1e-11 * scale;
    std::vector<std::vector<std::size_t>> adjacency(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (padded.at(i, j) - u[i] - v[j] <= slack) adjacency[i].push_back(j);

    // Re-pick columns row by row, preferring the smallest admissible column
    // that still leaves the remaining rows matchable.
    std::vector<std::ptrdiff_t> pinned(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        bool fixed = false;
        for (std::size_t j : adjacency[i]) {
            bool taken = false;
            for (std::size_t k = 0; k < i; ++k)
                if (pinned[k] == static_cast<std::ptrdiff_t>(j)) taken = true;
            if (taken) continue;
            pinned[i] = static_cast<std::ptrdiff_t>(j);
            if (feasible(n, adjacency, pinned, i + 1)) {
                fixed = true;
                break;
            }
            pinned[i] = -1;
        }
        if (!fixed)
            throw std::logic_error("assignment extraction lost feasibility");
    }

    for (std::size_t i = 0; i < cost.rows; ++i) {
        auto j = static_cast<std::size_t>(pinned[i]);
        if (j >= cost.cols) continue;
        result.pairs.emplace_back(i, j);
        result.total_cost += cost.at(i, j);
    }
    return result;
}

} // namespace groundkit::matching
