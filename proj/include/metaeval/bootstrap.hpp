#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metaeval/correlation.hpp"
#include "metaeval/errors.hpp"
#include "metaeval/rng.hpp"
#include "metaeval/score_matrix.hpp"

namespace metaeval {

// Seed-stream tags. These are frozen: together with SplitMix64 and
// derive_iteration_seed they define the exact draw sequence of every
// resampling routine, and the test oracles replay them verbatim.
namespace stream_tags {
inline constexpr std::string_view kInputs = "inputs";                // paired judged-doc draw
inline constexpr std::string_view kInputsMetric = "inputs-metric";   // full-test metric docs
inline constexpr std::string_view kInputsHuman = "inputs-human";     // full-test human docs
inline constexpr std::string_view kSystems = "systems";              // system draw
inline constexpr std::string_view kVarianceSize = "variance-size";   // per-size root
inline constexpr std::string_view kVarianceDraw = "draw";
inline constexpr std::string_view kStabilitySize = "stability-size"; // per-size root
inline constexpr std::string_view kStabilityA = "a";
inline constexpr std::string_view kStabilityB = "b";
}  // namespace stream_tags

enum class BootstrapMethod { boot_inputs, boot_systems, boot_both };

inline std::string_view to_string(BootstrapMethod m) {
    switch (m) {
        case BootstrapMethod::boot_inputs: return "boot-inputs";
        case BootstrapMethod::boot_systems: return "boot-systems";
        case BootstrapMethod::boot_both: return "boot-both";
    }
    return "?";
}

struct BootstrapConfig {
    BootstrapMethod method = BootstrapMethod::boot_inputs;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    double confidence_level = 0.95;
    ScoringMode scoring_mode = ScoringMode::judged_only;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    double point_estimate = 0.0;
    std::string method;
    std::size_t defined_iterations = 0;
    std::size_t iterations = 0;
};

struct StabilityPoint {
    std::size_t sample_size = 0;  // M
    double mean_tau = 0.0;
    double std_tau = 0.0;
    std::size_t iterations = 0;
    std::size_t defined = 0;
};

struct VarianceReport {
    std::vector<std::pair<std::string, double>> per_system_variance;  // matrix row order
    std::size_t sample_size = 0;  // M
    std::size_t iterations = 0;
};

// Empirical two-sided interval: quantiles at (1-level)/2 and 1-(1-level)/2
// with linear interpolation between order statistics.
inline std::pair<double, double> percentile_interval(std::span<const double> samples,
                                                     double level) {
    if (samples.empty()) throw input_error("percentile_interval: empty sample list");
    if (!(level > 0.0) || !(level < 1.0))
        throw input_error("percentile_interval: level must lie in (0, 1)");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&sorted](double p) {
        if (sorted.size() == 1) return sorted.front();
        const double h = p * static_cast<double>(sorted.size() - 1);
        const auto i = static_cast<std::size_t>(h);
        if (i + 1 >= sorted.size()) return sorted.back();
        return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
    };
    const double alpha = (1.0 - level) / 2.0;
    return {quantile(alpha), quantile(1.0 - alpha)};
}

namespace detail {

inline void draw_indices(SplitMix64& rng, std::size_t count, std::size_t bound,
                         std::vector<std::size_t>& out) {
    out.resize(count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = static_cast<std::size_t>(rng.next_below(bound));
}

// Row means over the given columns (with repetition). Gathers into `scratch`
// and sums pairwise, so it is bit-identical to select_docs + system_means.
inline void means_at(const ScoreMatrix& m, std::span<const std::size_t> cols,
                     std::vector<double>& out, std::vector<double>& scratch) {
    out.resize(m.n_systems());
    scratch.resize(cols.size());
    for (std::size_t i = 0; i < m.n_systems(); ++i) {
        const auto row = m.row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) scratch[k] = row[cols[k]];
        out[i] = mean_of(scratch);
    }
}

inline void means_all(const ScoreMatrix& m, std::vector<double>& out) {
    out.resize(m.n_systems());
    for (std::size_t i = 0; i < m.n_systems(); ++i) out[i] = mean_of(m.row(i));
}

inline double sample_std(std::span<const double> values, double mean) {
    if (values.size() < 2) return 0.0;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        sq[i] = d * d;
    }
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size() - 1));
}

}  // namespace detail

// Percentile bootstrap CI for the system-level correlation. boot-inputs
// resamples documents (judged-only: one shared draw over the judged docs,
// preserving the metric/human pairing; full-test: independent draws per
// matrix, since the doc sets differ), boot-systems resamples which systems
// enter the correlation, boot-both composes the two. Iterations with an
// undefined tau are dropped and counted via defined_iterations.
inline ConfidenceInterval bootstrap_correlation_ci(const ScoreMatrix& metric,
                                                   const ScoreMatrix& human,
                                                   const BootstrapConfig& cfg) {
    if (cfg.iterations < 1) throw input_error("bootstrap: iterations must be >= 1");
    if (!(cfg.confidence_level > 0.0) || !(cfg.confidence_level < 1.0))
        throw input_error("bootstrap: confidence level must lie in (0, 1)");

    ConfidenceInterval ci;
    ci.level = cfg.confidence_level;
    ci.method = std::string(to_string(cfg.method));
    ci.iterations = cfg.iterations;
    ci.point_estimate = system_level_correlation(metric, human, cfg.scoring_mode).coefficient;

    auto [metric_aligned, human_aligned] = align_systems(metric, human);
    const bool judged = cfg.scoring_mode == ScoringMode::judged_only;
    const ScoreMatrix metric_scored =
        judged ? restrict_to_common_docs(metric_aligned, human_aligned)
               : std::move(metric_aligned);

    const std::size_t n_systems = metric_scored.n_systems();
    const bool resample_docs = cfg.method != BootstrapMethod::boot_systems;
    const bool resample_systems = cfg.method != BootstrapMethod::boot_inputs;

    std::vector<double> metric_means, human_means;
    if (!resample_docs) {
        detail::means_all(metric_scored, metric_means);
        detail::means_all(human_aligned, human_means);
    }

    std::vector<double> taus;
    taus.reserve(cfg.iterations);
    std::vector<std::size_t> doc_idx, human_doc_idx, sys_idx;
    std::vector<double> m_means, h_means, m_sel, h_sel, scratch;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        if (resample_docs) {
            if (judged) {
                SplitMix64 rng(derive_iteration_seed(cfg.seed, it, stream_tags::kInputs));
                detail::draw_indices(rng, metric_scored.n_docs(), metric_scored.n_docs(),
                                     doc_idx);
                detail::means_at(metric_scored, doc_idx, m_means, scratch);
                detail::means_at(human_aligned, doc_idx, h_means, scratch);
            } else {
                SplitMix64 rng_m(
                    derive_iteration_seed(cfg.seed, it, stream_tags::kInputsMetric));
                SplitMix64 rng_h(derive_iteration_seed(cfg.seed, it, stream_tags::kInputsHuman));
                detail::draw_indices(rng_m, metric_scored.n_docs(), metric_scored.n_docs(),
                                     doc_idx);
                detail::draw_indices(rng_h, human_aligned.n_docs(), human_aligned.n_docs(),
                                     human_doc_idx);
                detail::means_at(metric_scored, doc_idx, m_means, scratch);
                detail::means_at(human_aligned, human_doc_idx, h_means, scratch);
            }
        } else {
            m_means = metric_means;
            h_means = human_means;
        }

        const std::vector<double>* mv = &m_means;
        const std::vector<double>* hv = &h_means;
        if (resample_systems) {
            SplitMix64 rng(derive_iteration_seed(cfg.seed, it, stream_tags::kSystems));
            detail::draw_indices(rng, n_systems, n_systems, sys_idx);
            m_sel.resize(n_systems);
            h_sel.resize(n_systems);
            for (std::size_t k = 0; k < n_systems; ++k) {
                m_sel[k] = m_means[sys_idx[k]];
                h_sel[k] = h_means[sys_idx[k]];
            }
            mv = &m_sel;
            hv = &h_sel;
        }

        try {
            taus.push_back(kendall_tau_b(*mv, *hv).coefficient);
        } catch (const undefined_correlation&) {
            // degenerate draw, dropped
        }
    }

    ci.defined_iterations = taus.size();
    if (taus.empty())
        throw degenerate_error("bootstrap: every iteration produced an undefined correlation");
    const auto [lo, hi] = percentile_interval(taus, cfg.confidence_level);
    ci.lower = lo;
    ci.upper = hi;
    return ci;
}

// Per-system mean samples from `iterations` with-replacement draws of
// `sample_size` documents: samples[system][iteration]. The draw sequence is
// seeded per size and iteration so reruns and oracles reproduce it exactly.
inline std::vector<std::vector<double>> bootstrap_system_mean_samples(const ScoreMatrix& m,
                                                                      std::size_t sample_size,
                                                                      std::size_t iterations,
                                                                      std::uint64_t seed) {
    if (sample_size < 1) throw input_error("bootstrap means: sample size must be >= 1");
    if (iterations < 2) throw input_error("bootstrap means: need at least 2 iterations");
    const std::uint64_t size_root =
        derive_iteration_seed(seed, sample_size, stream_tags::kVarianceSize);
    std::vector<std::vector<double>> samples(m.n_systems(),
                                             std::vector<double>(iterations, 0.0));
    std::vector<std::size_t> idx;
    std::vector<double> means, scratch;
    for (std::size_t it = 0; it < iterations; ++it) {
        SplitMix64 rng(derive_iteration_seed(size_root, it, stream_tags::kVarianceDraw));
        detail::draw_indices(rng, sample_size, m.n_docs(), idx);
        detail::means_at(m, idx, means, scratch);
        for (std::size_t i = 0; i < m.n_systems(); ++i) samples[i][it] = means[i];
    }
    return samples;
}

// Variance of each system's score estimate when computed from M documents
// sampled with replacement.
inline VarianceReport system_score_variance(const ScoreMatrix& m, std::size_t sample_size,
                                            std::size_t iterations, std::uint64_t seed) {
    const auto samples = bootstrap_system_mean_samples(m, sample_size, iterations, seed);
    VarianceReport report;
    report.sample_size = sample_size;
    report.iterations = iterations;
    report.per_system_variance.reserve(m.n_systems());
    std::vector<double> sq(iterations);
    for (std::size_t i = 0; i < m.n_systems(); ++i) {
        const double mean = detail::mean_of(samples[i]);
        for (std::size_t it = 0; it < iterations; ++it) {
            const double d = samples[i][it] - mean;
            sq[it] = d * d;
        }
        const double var = detail::pairwise_sum(sq) / static_cast<double>(iterations - 1);
        report.per_system_variance.emplace_back(m.system_ids()[i], var);
    }
    return report;
}

// Stability of the ranking induced by one score matrix: per size M, the tau
// between the system rankings computed from two independent with-replacement
// samples of M documents, summarized over iterations.
inline std::vector<StabilityPoint> ranking_stability_curve(const ScoreMatrix& m,
                                                           std::span<const std::size_t> sizes,
                                                           std::size_t iterations,
                                                           std::uint64_t seed) {
    if (sizes.empty()) throw input_error("ranking stability: empty size list");
    if (iterations < 2) throw input_error("ranking stability: need at least 2 iterations");
    for (std::size_t size : sizes)
        if (size < 1) throw input_error("ranking stability: sizes must be >= 1");

    std::vector<StabilityPoint> curve;
    curve.reserve(sizes.size());
    std::vector<std::size_t> idx_a, idx_b;
    std::vector<double> means_a, means_b, scratch;
    for (std::size_t size : sizes) {
        const std::uint64_t size_root =
            derive_iteration_seed(seed, size, stream_tags::kStabilitySize);
        std::vector<double> taus;
        taus.reserve(iterations);
        for (std::size_t it = 0; it < iterations; ++it) {
            SplitMix64 rng_a(derive_iteration_seed(size_root, it, stream_tags::kStabilityA));
            SplitMix64 rng_b(derive_iteration_seed(size_root, it, stream_tags::kStabilityB));
            detail::draw_indices(rng_a, size, m.n_docs(), idx_a);
            detail::draw_indices(rng_b, size, m.n_docs(), idx_b);
            detail::means_at(m, idx_a, means_a, scratch);
            detail::means_at(m, idx_b, means_b, scratch);
            try {
                taus.push_back(kendall_tau_b(means_a, means_b).coefficient);
            } catch (const undefined_correlation&) {
            }
        }
        if (taus.empty())
            throw degenerate_error("ranking stability: every draw undefined at M = " +
                                   std::to_string(size));
        StabilityPoint point;
        point.sample_size = size;
        point.iterations = iterations;
        point.defined = taus.size();
        point.mean_tau = detail::mean_of(taus);
        point.std_tau = detail::sample_std(taus, point.mean_tau);
        curve.push_back(point);
    }
    return curve;
}

}  // namespace metaeval
