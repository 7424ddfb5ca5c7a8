#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "metaeval/errors.hpp"
#include "metaeval/score_matrix.hpp"

namespace metaeval {

enum class ScoringMode { judged_only, full_test };

// How a correlation was produced: system scores averaged over the judged
// documents only, over each matrix's full document set, or over a gap-bounded
// subset of system pairs.
enum class CorrelationMode { judged_only, full_test, delta_window };

inline std::string_view to_string(ScoringMode m) {
    return m == ScoringMode::judged_only ? "judged-only" : "full-test";
}

inline std::string_view to_string(CorrelationMode m) {
    switch (m) {
        case CorrelationMode::judged_only: return "judged-only";
        case CorrelationMode::full_test: return "full-test";
        case CorrelationMode::delta_window: return "delta-window";
    }
    return "?";
}

inline CorrelationMode correlation_mode(ScoringMode m) {
    return m == ScoringMode::judged_only ? CorrelationMode::judged_only
                                         : CorrelationMode::full_test;
}

// Exhaustive pair classification. For a full classification of n items the
// five counts partition all n(n-1)/2 pairs.
struct TauComponents {
    std::uint64_t concordant = 0;   // P
    std::uint64_t discordant = 0;   // Q
    std::uint64_t ties_x_only = 0;  // T
    std::uint64_t ties_z_only = 0;  // U
    std::uint64_t ties_both = 0;    // B
    std::size_t n = 0;

    std::uint64_t total_pairs() const noexcept {
        return static_cast<std::uint64_t>(n) * (n - 1) / 2;
    }
    std::uint64_t classified_pairs() const noexcept {
        return concordant + discordant + ties_x_only + ties_z_only + ties_both;
    }
};

struct CorrelationResult {
    double coefficient = 0.0;
    TauComponents components;
    std::uint64_t pairs_used = 0;
    std::optional<CorrelationMode> mode;
};

namespace detail {

inline void check_pair_input(std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size())
        throw input_error("pair counting: length mismatch (" + std::to_string(x.size()) +
                          " vs " + std::to_string(z.size()) + ")");
    if (x.size() < 2) throw input_error("pair counting: need at least 2 items");
    for (double v : x)
        if (!std::isfinite(v)) throw input_error("pair counting: non-finite value in x");
    for (double v : z)
        if (!std::isfinite(v)) throw input_error("pair counting: non-finite value in z");
}

// Classifies one pair into the components. Ties are exact floating-point
// equality; no epsilon.
inline void classify_pair(double xi, double xj, double zi, double zj, TauComponents& c) {
    const bool tie_x = xi == xj;
    const bool tie_z = zi == zj;
    if (tie_x && tie_z)
        ++c.ties_both;
    else if (tie_x)
        ++c.ties_x_only;
    else if (tie_z)
        ++c.ties_z_only;
    else if ((xi < xj) == (zi < zj))
        ++c.concordant;
    else
        ++c.discordant;
}

// Tie pair count from the values of one vector alone: sum of t*(t-1)/2 over
// groups of equal values. Used for the classical tau-b denominator.
inline std::uint64_t tied_pair_count(std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t pairs = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            pairs += static_cast<std::uint64_t>(run) * (run - 1) / 2;
            run = 1;
        }
    }
    return pairs;
}

// tau from already-classified counts. Throws undefined_correlation when a
// denominator factor vanishes (one of the vectors is fully tied over the
// classified pairs).
inline double tau_from_components(const TauComponents& c) {
    const std::uint64_t pqt = c.concordant + c.discordant + c.ties_x_only;
    const std::uint64_t pqu = c.concordant + c.discordant + c.ties_z_only;
    if (pqt == 0 || pqu == 0)
        throw undefined_correlation(
            "kendall tau-b: undefined, a fully tied ranking leaves no comparable pairs");
    const double diff =
        static_cast<double>(c.concordant) - static_cast<double>(c.discordant);
    return diff / std::sqrt(static_cast<double>(pqt) * static_cast<double>(pqu));
}

}  // namespace detail

// O(n^2) classification of every pair of (x, z) positions into concordant,
// discordant, tied-in-x-only, tied-in-z-only, tied-in-both.
inline TauComponents count_pair_components(std::span<const double> x,
                                           std::span<const double> z) {
    detail::check_pair_input(x, z);
    TauComponents c;
    c.n = x.size();
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            detail::classify_pair(x[i], x[j], z[i], z[j], c);
    assert(c.classified_pairs() == c.total_pairs());
    return c;
}

// Tie-corrected Kendall tau-b: (P - Q) / sqrt((P+Q+T) * (P+Q+U)). Equals the
// classical form (P-Q)/sqrt((n0-n1)(n0-n2)) with n1/n2 the per-vector tied
// pair counts; debug builds verify both routes agree.
inline CorrelationResult kendall_tau_b(std::span<const double> x, std::span<const double> z,
                                       std::optional<CorrelationMode> mode = std::nullopt) {
    CorrelationResult r;
    r.components = count_pair_components(x, z);
    r.coefficient = detail::tau_from_components(r.components);
    r.pairs_used = r.components.total_pairs();
    r.mode = mode;
#ifndef NDEBUG
    {
        const std::uint64_t n0 = r.components.total_pairs();
        const std::uint64_t n1 = detail::tied_pair_count(x);
        const std::uint64_t n2 = detail::tied_pair_count(z);
        assert(n0 - n1 == r.components.concordant + r.components.discordant +
                              r.components.ties_z_only);
        assert(n0 - n2 == r.components.concordant + r.components.discordant +
                              r.components.ties_x_only);
        const double classical =
            (static_cast<double>(r.components.concordant) -
             static_cast<double>(r.components.discordant)) /
            std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
        assert(std::abs(classical - r.coefficient) <= 1e-12);
    }
#endif
    return r;
}

// Sample Pearson correlation; provided as plumbing. Throws
// undefined_correlation on zero variance.
inline double pearson(std::span<const double> x, std::span<const double> z) {
    detail::check_pair_input(x, z);
    const double mx = detail::mean_of(x);
    const double mz = detail::mean_of(z);
    double sxx = 0.0, szz = 0.0, sxz = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dz = z[i] - mz;
        sxx += dx * dx;
        szz += dz * dz;
        sxz += dx * dz;
    }
    if (sxx == 0.0 || szz == 0.0)
        throw undefined_correlation("pearson: zero variance input");
    const double r = sxz / std::sqrt(sxx * szz);
    return std::clamp(r, -1.0, 1.0);
}

// System-level correlation between a metric matrix and a human matrix.
// judged-only averages the metric over exactly the human matrix's documents;
// full-test averages each matrix over all of its own documents.
inline CorrelationResult system_level_correlation(const ScoreMatrix& metric,
                                                  const ScoreMatrix& human, ScoringMode mode) {
    auto [metric_aligned, human_aligned] = align_systems(metric, human);
    SystemAggregate metric_agg;
    if (mode == ScoringMode::judged_only)
        metric_agg = system_means(restrict_to_common_docs(metric_aligned, human_aligned));
    else
        metric_agg = system_means(metric_aligned);
    const SystemAggregate human_agg = system_means(human_aligned);
    return kendall_tau_b(metric_agg.means, human_agg.means, correlation_mode(mode));
}

}  // namespace metaeval
