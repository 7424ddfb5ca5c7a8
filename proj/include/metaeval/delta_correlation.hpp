#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "metaeval/correlation.hpp"
#include "metaeval/errors.hpp"
#include "metaeval/score_matrix.hpp"

namespace metaeval {

// One unordered system pair and its absolute gap in aggregate metric score.
// first_id <= second_id lexicographically.
struct PairGap {
    std::string first_id;
    std::string second_id;
    std::size_t first_index = 0;
    std::size_t second_index = 0;
    double gap = 0.0;
};

// Gap bounds for a windowed correlation: either explicit score-gap bounds
// (inclusive on both ends) or a gap-rank interval given as pair fractions.
struct DeltaWindow {
    enum class Selection { value_bounds, rank_bounds };

    Selection selection = Selection::value_bounds;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    std::optional<double> fraction_low;
    std::optional<double> fraction_high;
    std::size_t selected_pairs = 0;

    static DeltaWindow value_bounds(double lower, double upper) {
        if (!(lower >= 0.0) || !(upper >= lower))
            throw input_error("delta window: need 0 <= lower <= upper, got [" +
                              std::to_string(lower) + ", " + std::to_string(upper) + "]");
        DeltaWindow w;
        w.selection = Selection::value_bounds;
        w.lower = lower;
        w.upper = upper;
        return w;
    }

    static DeltaWindow rank_bounds(double fraction_low, double fraction_high) {
        if (!(fraction_low >= 0.0) || !(fraction_low < fraction_high) || !(fraction_high <= 1.0))
            throw input_error("delta window: need 0 <= fraction_low < fraction_high <= 1");
        DeltaWindow w;
        w.selection = Selection::rank_bounds;
        w.fraction_low = fraction_low;
        w.fraction_high = fraction_high;
        return w;
    }
};

// Every unordered system pair with its |mean_i - mean_j| gap, ascending by
// gap, ties broken by the lexicographic pair ids.
inline std::vector<PairGap> pairwise_score_gaps(const SystemAggregate& agg) {
    const std::size_t n = agg.system_ids.size();
    if (n < 2) throw input_error("pairwise_score_gaps: need at least 2 systems");
    std::vector<PairGap> gaps;
    gaps.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            PairGap g;
            g.first_index = i;
            g.second_index = j;
            g.gap = std::abs(agg.means[i] - agg.means[j]);
            if (agg.system_ids[i] <= agg.system_ids[j]) {
                g.first_id = agg.system_ids[i];
                g.second_id = agg.system_ids[j];
            } else {
                g.first_id = agg.system_ids[j];
                g.second_id = agg.system_ids[i];
            }
            gaps.push_back(std::move(g));
        }
    std::sort(gaps.begin(), gaps.end(), [](const PairGap& a, const PairGap& b) {
        if (a.gap != b.gap) return a.gap < b.gap;
        if (a.first_id != b.first_id) return a.first_id < b.first_id;
        return a.second_id < b.second_id;
    });
    return gaps;
}

namespace detail {

// Number of pairs a fraction selects: ceil(f * n0), with a small slack so
// that exact grid fractions like 0.2 * 55 do not round up spuriously.
inline std::size_t pair_count_for_fraction(double f, std::size_t n0) {
    if (f <= 0.0) return 0;
    const double raw = f * static_cast<double>(n0);
    auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    if (k < 1) k = 1;
    if (k > n0) k = n0;
    return k;
}

struct WindowSelection {
    std::size_t first_rank = 0;  // inclusive index into the sorted gap list
    std::size_t last_rank = 0;   // exclusive
    std::size_t count() const noexcept { return last_rank - first_rank; }
};

// Resolves a window against the sorted gap list. Rank bounds select the rank
// interval (count(f_low), count(f_high)]; value bounds keep l <= gap <= u.
inline WindowSelection resolve_window(const std::vector<PairGap>& gaps, const DeltaWindow& w) {
    WindowSelection sel;
    const std::size_t n0 = gaps.size();
    if (w.selection == DeltaWindow::Selection::rank_bounds) {
        sel.first_rank = pair_count_for_fraction(*w.fraction_low, n0);
        sel.last_rank = pair_count_for_fraction(*w.fraction_high, n0);
        if (sel.last_rank < sel.first_rank) sel.last_rank = sel.first_rank;
    } else {
        const auto lo = std::lower_bound(gaps.begin(), gaps.end(), w.lower,
                                         [](const PairGap& g, double v) { return g.gap < v; });
        const auto hi = std::upper_bound(gaps.begin(), gaps.end(), w.upper,
                                         [](double v, const PairGap& g) { return v < g.gap; });
        sel.first_rank = static_cast<std::size_t>(lo - gaps.begin());
        sel.last_rank = static_cast<std::size_t>(hi - gaps.begin());
        if (sel.last_rank < sel.first_rank) sel.last_rank = sel.first_rank;
    }
    return sel;
}

inline std::string describe_window(const DeltaWindow& w) {
    if (w.selection == DeltaWindow::Selection::rank_bounds)
        return "fractions (" + std::to_string(*w.fraction_low) + ", " +
               std::to_string(*w.fraction_high) + "]";
    return "[" + std::to_string(w.lower) + ", " + std::to_string(w.upper) + "]";
}

}  // namespace detail

// Windowed system-level correlation: classifies only the selected pairs by
// metric and human means and applies the tie-corrected tau to those counts.
inline CorrelationResult delta_correlation(const SystemAggregate& metric_agg,
                                           const SystemAggregate& human_agg,
                                           const DeltaWindow& window) {
    if (metric_agg.system_ids != human_agg.system_ids)
        throw input_error("delta_correlation: metric and human aggregates must list the same "
                          "systems in the same order");
    const auto gaps = pairwise_score_gaps(metric_agg);
    const auto sel = detail::resolve_window(gaps, window);
    if (sel.count() == 0)
        throw degenerate_error("delta_correlation: window " + detail::describe_window(window) +
                               " selects no system pairs");

    TauComponents c;
    c.n = metric_agg.system_ids.size();
    for (std::size_t r = sel.first_rank; r < sel.last_rank; ++r) {
        const PairGap& g = gaps[r];
        detail::classify_pair(metric_agg.means[g.first_index], metric_agg.means[g.second_index],
                              human_agg.means[g.first_index], human_agg.means[g.second_index],
                              c);
    }
    CorrelationResult result;
    result.components = c;
    result.coefficient = detail::tau_from_components(c);
    result.pairs_used = sel.count();
    result.mode = CorrelationMode::delta_window;
    return result;
}

struct DeltaGridCell {
    double fraction_low = 0.0;
    double fraction_high = 0.0;
    double lower_gap = 0.0;  // realized value bounds of the selected pairs
    double upper_gap = 0.0;
    CorrelationResult result;
};

struct DeltaGrid {
    std::vector<double> fractions;
    std::vector<DeltaGridCell> cells;  // ordered by (fraction_low, fraction_high)
};

// One rank-bounds cell per (fraction_low, fraction_high) with
// fraction_low < fraction_high, fraction_low drawn from {0} plus the
// fractions, fraction_high from the fractions. With the default ten
// fractions this is the 55-cell upper triangle; the fraction_low = 0 row is
// the u-sweep, and the (0, 1] cell is the standard full-pair correlation.
inline DeltaGrid delta_grid(const SystemAggregate& metric_agg, const SystemAggregate& human_agg,
                            const std::vector<double>& fractions) {
    if (fractions.empty()) throw input_error("delta_grid: empty fraction list");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0) || !(fractions[i] <= 1.0))
            throw input_error("delta_grid: fractions must lie in (0, 1]");
        if (i > 0 && !(fractions[i] > fractions[i - 1]))
            throw input_error("delta_grid: fractions must be strictly increasing");
    }
    if (metric_agg.system_ids != human_agg.system_ids)
        throw input_error("delta_grid: metric and human aggregates must list the same systems "
                          "in the same order");

    const auto gaps = pairwise_score_gaps(metric_agg);
    DeltaGrid grid;
    grid.fractions = fractions;

    std::vector<double> lows;
    lows.reserve(fractions.size() + 1);
    lows.push_back(0.0);
    lows.insert(lows.end(), fractions.begin(), fractions.end());

    for (double lo : lows)
        for (double hi : fractions) {
            if (!(lo < hi)) continue;
            const auto window = DeltaWindow::rank_bounds(lo, hi);
            const auto sel = detail::resolve_window(gaps, window);
            DeltaGridCell cell;
            cell.fraction_low = lo;
            cell.fraction_high = hi;
            cell.result = delta_correlation(metric_agg, human_agg, window);
            cell.lower_gap = gaps[sel.first_rank].gap;
            cell.upper_gap = gaps[sel.last_rank - 1].gap;
            grid.cells.push_back(std::move(cell));
        }
    return grid;
}

// Minimum u that selects at least ceil(f * n0) of the sorted gaps.
inline double gap_threshold_for_fraction(const std::vector<PairGap>& gaps, double fraction) {
    if (gaps.empty()) throw input_error("gap_threshold_for_fraction: empty gap list");
    if (!(fraction > 0.0) || !(fraction <= 1.0))
        throw input_error("gap_threshold_for_fraction: fraction must lie in (0, 1]");
    const std::size_t k = detail::pair_count_for_fraction(fraction, gaps.size());
    return gaps[k - 1].gap;
}

}  // namespace metaeval
