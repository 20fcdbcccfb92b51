#pragma once

// Bipartite assignment between predictions and ground-truth boxes, plus the
// retrieval-style classification score map (per-category probe vectors dotted
// against per-proposal query vectors).

#include "groundkit/geometry.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace groundkit::matching {

/// Dense row-major matrix, sized for cost/score computations.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Rows are L2-normalizable probe vectors (one per category), columns of the
/// result are proposals: scores = probes * queries^T. probes is C x D,
/// queries is N x D, result is C x N. Dimension mismatch throws.
Matrix granularity_scores(const Matrix& probes, const Matrix& queries);

struct CostWeights {
    double classification = 2.0;
    double l1 = 5.0;
    double giou = 2.0;
};

/// Loss mixing weights used when totaling matched-pair losses. Kept distinct
/// from CostWeights: matching and loss totals weight the same terms
/// differently (classification 1 vs 2).
struct LossWeights {
    double classification = 1.0;
    double l1 = 5.0;
    double giou = 2.0;
};

struct CostOptions {
    CostWeights weights;
    /// When set, the classification term uses a focal-style transform of the
    /// score instead of (1 - score).
    bool focal_classification = false;
    double focal_alpha = 0.25;
    double focal_gamma = 2.0;
};

/// Builds the pairwise matching cost between M predictions and K targets.
/// class_scores.at(i, j) is prediction i's score for target j's category,
/// expected in [0, 1]. Throws on dimension mismatch or invalid boxes.
Matrix pairwise_cost(const std::vector<geom::Box>& predictions,
                     const std::vector<geom::Box>& targets,
                     const Matrix& class_scores,
                     const geom::Extent& frame,
                     const CostOptions& options = {});

struct Assignment {
    /// pair (prediction index, target index), one per matched pair; covers
    /// min(rows, cols) pairs.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double total_cost = 0.0;
};

/// Minimum-cost bipartite assignment (Jonker-Volgenant style shortest
/// augmenting paths, O(n^3)). Rectangular matrices are padded internally;
/// padded pairs never appear in the result. Among all minimum-cost
/// assignments the lexicographically smallest one (by column choice of
/// row 0, then row 1, ...) is returned, so ties break deterministically.
/// An empty matrix yields an empty assignment.
Assignment hungarian(const Matrix& cost);

} // namespace groundkit::matching
