#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metaeval/errors.hpp"
#include "metaeval/rng.hpp"
#include "metaeval/score_matrix.hpp"

namespace metaeval {

// Generator parameters for a paired metric/human score dataset. The human
// matrix covers a prefix subset of the metric matrix's documents, mirroring
// the judged-subset relationship of real meta-evaluation datasets.
struct SynthConfig {
    std::size_t n_systems = 16;
    std::size_t m_test = 11490;
    std::size_t m_jud = 100;
    double quality_spread = 1.0;      // latent system quality q_i ~ U[0, spread]
    double doc_noise = 1.0;           // per-summary noise scale
    double metric_distortion = 0.0;   // lambda: system-level metric/human disagreement
    std::uint64_t seed = 0;
};

struct SynthDataset {
    ScoreMatrix metric;
    ScoreMatrix human;
};

namespace detail {

inline std::vector<std::string> numbered_ids(const char* prefix, std::size_t count) {
    const std::size_t width = std::to_string(count).size();
    std::vector<std::string> ids;
    ids.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        std::string num = std::to_string(i);
        ids.push_back(prefix + std::string(width - num.size(), '0') + num);
    }
    return ids;
}

}  // namespace detail

// Human score: z_ij = q_i + noise. Metric score: x_ij = q_i + lambda * d_i +
// noise', with d_i standard normal per system and both noises independent
// Gaussians of scale doc_noise. Fully determined by cfg.seed.
inline SynthDataset generate_dataset(const SynthConfig& cfg) {
    if (cfg.n_systems < 2) throw input_error("synth: need at least 2 systems");
    if (cfg.m_jud < 1 || cfg.m_jud > cfg.m_test)
        throw input_error("synth: need 1 <= judged docs <= test docs");
    if (cfg.quality_spread < 0.0 || cfg.doc_noise < 0.0 || cfg.metric_distortion < 0.0)
        throw input_error("synth: scales must be nonnegative");

    const std::size_t n = cfg.n_systems;
    std::vector<double> quality(n), distortion(n);
    {
        SplitMix64 rng(derive_iteration_seed(cfg.seed, 0, "synth-quality"));
        for (std::size_t i = 0; i < n; ++i) quality[i] = cfg.quality_spread * rng.next_double();
    }
    {
        SplitMix64 rng(derive_iteration_seed(cfg.seed, 0, "synth-distortion"));
        for (std::size_t i = 0; i < n; ++i) distortion[i] = rng.next_normal();
    }

    std::vector<double> human_values(n * cfg.m_jud);
    {
        SplitMix64 rng(derive_iteration_seed(cfg.seed, 0, "synth-human-noise"));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < cfg.m_jud; ++j)
                human_values[i * cfg.m_jud + j] = quality[i] + cfg.doc_noise * rng.next_normal();
    }
    std::vector<double> metric_values(n * cfg.m_test);
    {
        SplitMix64 rng(derive_iteration_seed(cfg.seed, 0, "synth-metric-noise"));
        for (std::size_t i = 0; i < n; ++i) {
            const double level = quality[i] + cfg.metric_distortion * distortion[i];
            for (std::size_t j = 0; j < cfg.m_test; ++j)
                metric_values[i * cfg.m_test + j] = level + cfg.doc_noise * rng.next_normal();
        }
    }

    auto systems = detail::numbered_ids("sys", n);
    auto docs = detail::numbered_ids("doc", cfg.m_test);
    std::vector<std::string> judged_docs(docs.begin(), docs.begin() + cfg.m_jud);
    return SynthDataset{
        ScoreMatrix::make(systems, std::move(docs), std::move(metric_values),
                          "synthetic-metric"),
        ScoreMatrix::make(std::move(systems), std::move(judged_docs), std::move(human_values),
                          "synthetic-human"),
    };
}

// Deliberately naive tau-b evaluation kept as the test-suite ground truth:
// sign products over a double loop, nothing shared with kendall_tau_b.
struct BruteForceCounts {
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    std::uint64_t ties_x_only = 0;
    std::uint64_t ties_z_only = 0;
    std::uint64_t ties_both = 0;
};

inline BruteForceCounts brute_force_components(std::span<const double> x,
                                               std::span<const double> z) {
    if (x.size() != z.size() || x.size() < 2)
        throw input_error("brute_force_tau: need two equal-length vectors of >= 2 items");
    BruteForceCounts c;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j];
            const double dz = z[i] - z[j];
            if (dx == 0.0 && dz == 0.0)
                ++c.ties_both;
            else if (dx == 0.0)
                ++c.ties_x_only;
            else if (dz == 0.0)
                ++c.ties_z_only;
            else if (dx * dz > 0.0)
                ++c.concordant;
            else
                ++c.discordant;
        }
    return c;
}

inline double brute_force_tau(std::span<const double> x, std::span<const double> z) {
    const BruteForceCounts c = brute_force_components(x, z);
    const double with_x = static_cast<double>(c.concordant + c.discordant + c.ties_x_only);
    const double with_z = static_cast<double>(c.concordant + c.discordant + c.ties_z_only);
    if (with_x == 0.0 || with_z == 0.0)
        throw undefined_correlation("brute_force_tau: undefined on a fully tied vector");
    return (static_cast<double>(c.concordant) - static_cast<double>(c.discordant)) /
           std::sqrt(with_x * with_z);
}

}  // namespace metaeval
