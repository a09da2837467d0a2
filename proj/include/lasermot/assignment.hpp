#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "lasermot/error.hpp"

namespace lasermot {

constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct Matching {
    std::vector<std::pair<int, int>> pairs;  // (row, col), ascending row index
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
    double total_cost = 0.0;
};

// Minimum-cost matching of maximum cardinality on a dense cost matrix.
// Entries set to kForbidden are never matched. Successive shortest
// augmenting paths (Bellman-Ford on the residual graph), so each partial
// matching is cost-optimal for its cardinality and forbidden pairs never
// mix into the arithmetic. Ties resolve to the lowest (row, col) pair by
// scan order.
inline Matching solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int nr = static_cast<int>(cost.size());
    const int nc = nr > 0 ? static_cast<int>(cost[0].size()) : 0;
    for (const auto& row : cost)
        if (static_cast<int>(row.size()) != nc)
            throw contract_error("cost matrix rows must have equal length");

    std::vector<int> match_row(static_cast<size_t>(nr), -1);
    std::vector<int> match_col(static_cast<size_t>(nc), -1);

    const double inf = std::numeric_limits<double>::infinity();

    while (true) {
        std::vector<double> dist_row(static_cast<size_t>(nr), inf);
        std::vector<double> dist_col(static_cast<size_t>(nc), inf);
        std::vector<int> parent_col(static_cast<size_t>(nc), -1);  // row that reached this col
        std::vector<int> parent_row(static_cast<size_t>(nr), -1);  // col that reached this row

        for (int i = 0; i < nr; ++i)
            if (match_row[static_cast<size_t>(i)] == -1) dist_row[static_cast<size_t>(i)] = 0.0;

        bool changed = true;
        while (changed) {
            changed = false;
            for (int i = 0; i < nr; ++i) {
                if (dist_row[static_cast<size_t>(i)] == inf) continue;
                for (int j = 0; j < nc; ++j) {
                    const double c = cost[static_cast<size_t>(i)][static_cast<size_t>(j)];
                    if (c == kForbidden || match_row[static_cast<size_t>(i)] == j) continue;
                    const double nd = dist_row[static_cast<size_t>(i)] + c;
                    if (nd < dist_col[static_cast<size_t>(j)]) {
                        dist_col[static_cast<size_t>(j)] = nd;
                        parent_col[static_cast<size_t>(j)] = i;
                        changed = true;
                    }
                }
            }
            for (int j = 0; j < nc; ++j) {
                const int i = match_col[static_cast<size_t>(j)];
                if (i == -1 || dist_col[static_cast<size_t>(j)] == inf) continue;
                const double nd = dist_col[static_cast<size_t>(j)] -
                                  cost[static_cast<size_t>(i)][static_cast<size_t>(j)];
                if (nd < dist_row[static_cast<size_t>(i)]) {
                    dist_row[static_cast<size_t>(i)] = nd;
                    parent_row[static_cast<size_t>(i)] = j;
                    changed = true;
                }
            }
        }

        int best_col = -1;
        for (int j = 0; j < nc; ++j)
            if (match_col[static_cast<size_t>(j)] == -1 && dist_col[static_cast<size_t>(j)] < inf &&
                (best_col == -1 ||
                 dist_col[static_cast<size_t>(j)] < dist_col[static_cast<size_t>(best_col)]))
                best_col = j;
        if (best_col == -1) break;

        // Flip the alternating path back to its free source row.
        int j = best_col;
        while (true) {
            const int i = parent_col[static_cast<size_t>(j)];
            const int prev = parent_row[static_cast<size_t>(i)];
            match_row[static_cast<size_t>(i)] = j;
            match_col[static_cast<size_t>(j)] = i;
            if (prev == -1) break;
            j = prev;
        }
    }

    Matching m;
    for (int i = 0; i < nr; ++i) {
        const int j = match_row[static_cast<size_t>(i)];
        if (j == -1) {
            m.unmatched_rows.push_back(i);
        } else {
            m.pairs.emplace_back(i, j);
            m.total_cost += cost[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    }
    for (int j = 0; j < nc; ++j)
        if (match_col[static_cast<size_t>(j)] == -1) m.unmatched_cols.push_back(j);
    return m;
}

} // namespace lasermot
