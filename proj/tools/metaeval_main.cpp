// metaeval: system-level meta-evaluation of automatic summarization metrics
// against human judgments, from precomputed score tables.
//
// Subcommands: correlate, delta, ci, stability, variance, synth.
// Exit codes: 0 success, 2 input/usage error, 3 degenerate statistics.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaeval/metaeval.hpp"

namespace me = metaeval;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw me::input_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw me::input_error("cannot write file: " + path);
    out << content;
    if (!out) throw me::input_error("failed while writing: " + path);
}

me::TableFormat format_for(const std::string& path) {
    return path.size() >= 5 && path.substr(path.size() - 5) == ".json" ? me::TableFormat::json
                                                                       : me::TableFormat::csv_long;
}

struct LoadedTable {
    me::ScoreMatrix matrix;
    std::string path;
    std::string digest;
};

std::string digest_of(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(me::fnv1a64(bytes)));
    return buf;
}

LoadedTable load_table(const std::string& path) {
    const std::string bytes = read_file(path);
    return LoadedTable{me::parse_score_table(bytes, format_for(path), path), path,
                       digest_of(bytes)};
}

me::ScoringMode parse_mode(const std::string& mode) {
    if (mode == "judged-only") return me::ScoringMode::judged_only;
    if (mode == "full-test") return me::ScoringMode::full_test;
    throw me::input_error("unknown --mode \"" + mode + "\" (judged-only or full-test)");
}

me::BootstrapMethod parse_method(const std::string& method) {
    if (method == "boot-inputs") return me::BootstrapMethod::boot_inputs;
    if (method == "boot-systems") return me::BootstrapMethod::boot_systems;
    if (method == "boot-both") return me::BootstrapMethod::boot_both;
    throw me::input_error("unknown --method \"" + method +
                          "\" (boot-inputs, boot-systems or boot-both)");
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string quote_arg(const std::string& arg) {
    if (arg.find_first_of(" \t\"'") == std::string::npos) return arg;
    std::string quoted = "'";
    for (char c : arg) {
        if (c == '\'') quoted += "'\\''";
        else quoted += c;
    }
    return quoted + "'";
}

// Reproducibility record written next to file outputs.
struct ManifestInfo {
    std::string command_line;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
};

void write_manifest(const std::string& path, const ManifestInfo& info) {
    me::ojson j;
    j["command"] = info.command_line;
    if (info.seed) j["seed"] = *info.seed;
    else j["seed"] = nullptr;
    me::ojson inputs = me::ojson::object();
    for (const auto& [in_path, digest] : info.inputs) inputs[in_path] = digest;
    j["inputs"] = std::move(inputs);
    j["tool_version"] = me::kVersion;
    j["timestamp"] = iso_timestamp();
    write_file(path, me::dump_pretty(j));
}

// Writes to the given file plus a manifest beside it, or to stdout when no
// path was requested (no manifest then: there is nothing to sit alongside).
void emit(const std::string& out_path, const std::string& content, const ManifestInfo& info) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    write_file(out_path, content);
    write_manifest(out_path + ".manifest.json", info);
}

double parse_double_arg(const std::string& text, const std::string& what) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw me::input_error("cannot parse " + what + " \"" + text + "\" as a number");
    return value;
}

me::DeltaWindow parse_window_arg(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw me::input_error("--window expects L:U, got \"" + spec + "\"");
    const double lower = parse_double_arg(spec.substr(0, colon), "--window lower bound");
    const double upper = parse_double_arg(spec.substr(colon + 1), "--window upper bound");
    return me::DeltaWindow::value_bounds(lower, upper);
}

std::vector<double> parse_fractions_arg(const std::string& spec) {
    // START:STOP:STEP, inclusive of STOP
    double start = 0.0, stop = 0.0, step = 0.0;
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw me::input_error("--fractions expects START:STOP:STEP, got \"" + spec + "\"");
    start = parse_double_arg(spec.substr(0, c1), "--fractions start");
    stop = parse_double_arg(spec.substr(c1 + 1, c2 - c1 - 1), "--fractions stop");
    step = parse_double_arg(spec.substr(c2 + 1), "--fractions step");
    if (!(step > 0.0) || !(start > 0.0) || !(stop <= 1.0) || !(start <= stop))
        throw me::input_error("--fractions needs 0 < START <= STOP <= 1 and STEP > 0");
    std::vector<double> fractions;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) {
        double f = start + static_cast<double>(i) * step;
        f = std::round(f * 1e9) / 1e9;  // keep grid labels clean
        fractions.push_back(f);
    }
    return fractions;
}

// Aggregates under a scoring mode: align systems, restrict the metric to the
// judged docs when asked, then average.
struct AggregatePair {
    me::SystemAggregate metric;
    me::SystemAggregate human;
};

AggregatePair aggregates_for(const me::ScoreMatrix& metric, const me::ScoreMatrix& human,
                             me::ScoringMode mode) {
    auto [metric_aligned, human_aligned] = me::align_systems(metric, human);
    AggregatePair out;
    if (mode == me::ScoringMode::judged_only)
        out.metric = me::system_means(me::restrict_to_common_docs(metric_aligned, human_aligned));
    else
        out.metric = me::system_means(metric_aligned);
    out.human = me::system_means(human_aligned);
    return out;
}

std::string fnum(double v) { return me::detail::format_score(v); }

// ---------------------------------------------------------------------------
// subcommands

struct CorrelateArgs {
    std::string metric_path, human_path, mode = "judged-only", out;
};

int run_correlate(const CorrelateArgs& args, const std::string& command_line) {
    const auto metric = load_table(args.metric_path);
    const auto human = load_table(args.human_path);
    const auto result =
        me::system_level_correlation(metric.matrix, human.matrix, parse_mode(args.mode));
    ManifestInfo info{command_line, std::nullopt,
                      {{metric.path, metric.digest}, {human.path, human.digest}}};
    emit(args.out, me::dump_pretty(me::to_json(result)), info);
    return 0;
}

struct DeltaArgs {
    std::string metric_path, human_path, mode = "judged-only";
    std::vector<std::string> windows;
    bool grid = false;
    std::string fractions = "0.1:1.0:0.1";
    std::string out;
    std::string out_prefix;
};

me::HeatmapChart heatmap_for(const me::DeltaGrid& grid) {
    me::HeatmapChart chart;
    chart.title = "windowed system-level correlation";
    chart.x_label = "pair fraction (upper)";
    chart.y_label = "pair fraction (lower)";
    std::vector<double> lows;
    for (const auto& cell : grid.cells)
        if (lows.empty() || lows.back() != cell.fraction_low) lows.push_back(cell.fraction_low);
    for (double f : grid.fractions) chart.col_labels.push_back(fnum(f));
    for (double f : lows) chart.row_labels.push_back(fnum(f));
    for (const auto& cell : grid.cells) {
        me::HeatmapChart::Cell c;
        c.row = static_cast<std::size_t>(
            std::find(lows.begin(), lows.end(), cell.fraction_low) - lows.begin());
        c.col = static_cast<std::size_t>(std::find(grid.fractions.begin(), grid.fractions.end(),
                                                   cell.fraction_high) -
                                         grid.fractions.begin());
        c.value = cell.result.coefficient;
        c.annotation = "l=" + fnum(cell.lower_gap) + " u=" + fnum(cell.upper_gap) +
                       " pairs=" + std::to_string(cell.result.pairs_used);
        chart.cells.push_back(std::move(c));
    }
    return chart;
}

int run_delta(const DeltaArgs& args, const std::string& command_line) {
    if (!args.grid && args.windows.empty())
        throw me::input_error("delta: pass either --window L:U (repeatable) or --grid");
    if (args.grid && !args.windows.empty())
        throw me::input_error("delta: --window and --grid are mutually exclusive");

    const auto metric = load_table(args.metric_path);
    const auto human = load_table(args.human_path);
    const auto aggs = aggregates_for(metric.matrix, human.matrix, parse_mode(args.mode));
    ManifestInfo info{command_line, std::nullopt,
                      {{metric.path, metric.digest}, {human.path, human.digest}}};

    if (args.grid) {
        if (args.out_prefix.empty())
            throw me::input_error("delta --grid needs --out-prefix for its JSON/CSV/SVG outputs");
        const auto grid =
            me::delta_grid(aggs.metric, aggs.human, parse_fractions_arg(args.fractions));
        write_file(args.out_prefix + ".json", me::dump_pretty(me::to_json(grid)));
        write_file(args.out_prefix + ".csv", me::to_csv(grid));
        write_file(args.out_prefix + ".svg", me::render_heatmap(heatmap_for(grid)));
        write_manifest(args.out_prefix + ".manifest.json", info);
        return 0;
    }

    auto report = me::ojson::array();
    for (const auto& spec : args.windows) {
        auto window = parse_window_arg(spec);
        const auto result = me::delta_correlation(aggs.metric, aggs.human, window);
        window.selected_pairs = result.pairs_used;
        auto j = me::to_json(result);
        j["window"] = {{"l", window.lower},
                       {"u", window.upper},
                       {"selected_pairs", window.selected_pairs}};
        report.push_back(std::move(j));
    }
    emit(args.out, me::dump_pretty(report.size() == 1 ? report.front() : report), info);
    return 0;
}

struct CiArgs {
    std::string metric_path, human_path;
    std::string method = "boot-inputs";
    std::string mode = "judged-only";
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    double level = 0.95;
    std::string out, plot;
};

int run_ci(const CiArgs& args, const std::string& command_line) {
    const auto metric = load_table(args.metric_path);
    const auto human = load_table(args.human_path);
    me::BootstrapConfig cfg;
    cfg.method = parse_method(args.method);
    cfg.scoring_mode = parse_mode(args.mode);
    cfg.iterations = args.iterations;
    cfg.seed = args.seed;
    cfg.confidence_level = args.level;
    const auto ci = me::bootstrap_correlation_ci(metric.matrix, human.matrix, cfg);

    auto j = me::to_json(ci);
    j["scoring_mode"] = std::string(me::to_string(cfg.scoring_mode));
    ManifestInfo info{command_line, args.seed,
                      {{metric.path, metric.digest}, {human.path, human.digest}}};
    emit(args.out, me::dump_pretty(j), info);

    if (!args.plot.empty()) {
        me::BarIntervalChart chart;
        chart.title = "bootstrap confidence interval";
        chart.y_label = "tau";
        chart.labels = {args.method + " / " + args.mode};
        chart.value = {ci.point_estimate};
        chart.lower = {ci.lower};
        chart.upper = {ci.upper};
        write_file(args.plot, me::render_bar_interval(chart));
    }
    return 0;
}

struct StabilityArgs {
    std::string scores_path;
    std::vector<std::size_t> sizes;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    std::string out_prefix;
};

int run_stability(const StabilityArgs& args, const std::string& command_line) {
    const auto scores = load_table(args.scores_path);
    for (std::size_t size : args.sizes)
        if (size > scores.matrix.n_docs())
            std::cerr << "warning: size " << size << " exceeds the " << scores.matrix.n_docs()
                      << " available docs; sampling with replacement anyway\n";
    const auto curve =
        me::ranking_stability_curve(scores.matrix, args.sizes, args.iterations, args.seed);

    ManifestInfo info{command_line, args.seed, {{scores.path, scores.digest}}};
    if (args.out_prefix.empty()) {
        std::cout << me::to_csv(curve);
        return 0;
    }
    write_file(args.out_prefix + ".csv", me::to_csv(curve));
    auto points = me::ojson::array();
    for (const auto& p : curve) points.push_back(me::to_json(p));
    write_file(args.out_prefix + ".json", me::dump_pretty(points));

    me::LineBandChart chart;
    chart.title = "ranking stability of " + scores.matrix.label();
    chart.x_label = "documents per sample (M)";
    chart.y_label = "mean tau (+/- 1 std)";
    chart.log_x = true;
    for (const auto& p : curve) {
        chart.x.push_back(static_cast<double>(p.sample_size));
        chart.y.push_back(p.mean_tau);
        chart.band_low.push_back(p.mean_tau - p.std_tau);
        chart.band_high.push_back(p.mean_tau + p.std_tau);
    }
    write_file(args.out_prefix + ".svg", me::render_line_band(chart));
    write_manifest(args.out_prefix + ".manifest.json", info);
    return 0;
}

struct VarianceArgs {
    std::string scores_path;
    std::vector<std::size_t> sizes;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    double level = 0.95;
    std::string out, plot;
};

int run_variance(const VarianceArgs& args, const std::string& command_line) {
    const auto scores = load_table(args.scores_path);
    const auto& m = scores.matrix;

    me::ojson j;
    auto sizes_json = me::ojson::array();
    std::vector<double> mean_variance;
    me::BarIntervalChart chart;
    chart.title = "per-system score estimates of " + m.label();
    chart.y_label = "score";

    for (std::size_t size : args.sizes) {
        const auto samples = me::bootstrap_system_mean_samples(m, size, args.iterations,
                                                               args.seed);
        me::ojson per_var = me::ojson::object();
        me::ojson per_ci = me::ojson::object();
        double var_sum = 0.0;
        std::vector<double> sq(args.iterations);
        for (std::size_t i = 0; i < m.n_systems(); ++i) {
            const double mean = me::detail::mean_of(samples[i]);
            for (std::size_t it = 0; it < args.iterations; ++it) {
                const double d = samples[i][it] - mean;
                sq[it] = d * d;
            }
            const double var =
                me::detail::pairwise_sum(sq) / static_cast<double>(args.iterations - 1);
            var_sum += var;
            const auto [lo, hi] = me::percentile_interval(samples[i], args.level);
            per_var[m.system_ids()[i]] = var;
            per_ci[m.system_ids()[i]] = {{"mean", mean}, {"lower", lo}, {"upper", hi}};
            chart.labels.push_back(m.system_ids()[i] + "@" + std::to_string(size));
            chart.value.push_back(mean);
            chart.lower.push_back(lo);
            chart.upper.push_back(hi);
        }
        mean_variance.push_back(var_sum / static_cast<double>(m.n_systems()));
        me::ojson entry;
        entry["M"] = size;
        entry["iterations"] = args.iterations;
        entry["level"] = args.level;
        entry["per_system_variance"] = std::move(per_var);
        entry["per_system_interval"] = std::move(per_ci);
        sizes_json.push_back(std::move(entry));
    }
    j["sizes"] = std::move(sizes_json);
    if (args.sizes.size() >= 2) {
        const double reduction = 100.0 * (1.0 - mean_variance.back() / mean_variance.front());
        j["variance_reduction_pct"] = reduction;
        std::cerr << "variance reduction from M=" << args.sizes.front()
                  << " to M=" << args.sizes.back() << ": " << reduction << "%\n";
    }

    ManifestInfo info{command_line, args.seed, {{scores.path, scores.digest}}};
    emit(args.out, me::dump_pretty(j), info);
    if (!args.plot.empty()) write_file(args.plot, me::render_bar_interval(chart));
    return 0;
}

struct SynthArgs {
    std::size_t systems = 16;
    std::size_t docs = 11490;
    std::size_t judged = 100;
    double spread = 1.0;
    double noise = 1.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    std::string out_metric, out_human;
};

int run_synth(const SynthArgs& args, const std::string& command_line) {
    me::SynthConfig cfg;
    cfg.n_systems = args.systems;
    cfg.m_test = args.docs;
    cfg.m_jud = args.judged;
    cfg.quality_spread = args.spread;
    cfg.doc_noise = args.noise;
    cfg.metric_distortion = args.lambda;
    cfg.seed = args.seed;
    const auto data = me::generate_dataset(cfg);
    write_file(args.out_metric, me::serialize_csv(data.metric));
    write_file(args.out_human, me::serialize_csv(data.human));
    ManifestInfo info{command_line, args.seed, {}};
    write_manifest(args.out_metric + ".manifest.json", info);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::string command_line;
    for (int i = 0; i < argc; ++i) {
        if (i) command_line += ' ';
        command_line += quote_arg(argv[i]);
    }

    CLI::App app{"meta-evaluation of automatic metrics against human judgments"};
    app.set_version_flag("--version", me::kVersion);
    app.require_subcommand(1);
    int exit_code = 0;

    CorrelateArgs correlate;
    auto* cmd_correlate =
        app.add_subcommand("correlate", "system-level correlation between two score tables");
    cmd_correlate->add_option("--metric", correlate.metric_path, "metric score table")
        ->required();
    cmd_correlate->add_option("--human", correlate.human_path, "human score table")->required();
    cmd_correlate->add_option("--mode", correlate.mode, "judged-only or full-test");
    cmd_correlate->add_option("--out", correlate.out, "output JSON path (default stdout)");
    cmd_correlate->callback(
        [&] { exit_code = run_correlate(correlate, command_line); });

    DeltaArgs delta;
    auto* cmd_delta = app.add_subcommand(
        "delta", "correlation over system pairs within a metric-score gap window");
    cmd_delta->add_option("--metric", delta.metric_path)->required();
    cmd_delta->add_option("--human", delta.human_path)->required();
    cmd_delta->add_option("--mode", delta.mode, "judged-only or full-test");
    cmd_delta->add_option("--window", delta.windows,
                          "gap bounds L:U, inclusive; repeatable");
    cmd_delta->add_flag("--grid", delta.grid, "rank-bounds fraction grid");
    cmd_delta->add_option("--fractions", delta.fractions, "grid fractions START:STOP:STEP");
    cmd_delta->add_option("--out", delta.out, "window-mode output JSON path");
    cmd_delta->add_option("--out-prefix", delta.out_prefix,
                          "grid-mode output prefix (.json/.csv/.svg)");
    cmd_delta->callback([&] { exit_code = run_delta(delta, command_line); });

    CiArgs ci;
    auto* cmd_ci =
        app.add_subcommand("ci", "bootstrap confidence interval for the correlation");
    cmd_ci->add_option("--metric", ci.metric_path)->required();
    cmd_ci->add_option("--human", ci.human_path)->required();
    cmd_ci->add_option("--method", ci.method, "boot-inputs, boot-systems or boot-both");
    cmd_ci->add_option("--mode", ci.mode, "judged-only or full-test");
    cmd_ci->add_option("--iterations", ci.iterations, "bootstrap iterations");
    cmd_ci->add_option("--seed", ci.seed, "resampling seed")->required();
    cmd_ci->add_option("--level", ci.level, "confidence level");
    cmd_ci->add_option("--out", ci.out, "output JSON path (default stdout)");
    cmd_ci->add_option("--plot", ci.plot, "bar-with-interval SVG path");
    cmd_ci->callback([&] { exit_code = run_ci(ci, command_line); });

    StabilityArgs stability;
    auto* cmd_stability = app.add_subcommand(
        "stability", "ranking stability versus the number of sampled documents");
    cmd_stability->add_option("--scores", stability.scores_path)->required();
    cmd_stability->add_option("--sizes", stability.sizes, "sample sizes, comma separated")
        ->required()
        ->delimiter(',');
    cmd_stability->add_option("--iterations", stability.iterations);
    cmd_stability->add_option("--seed", stability.seed)->required();
    cmd_stability->add_option("--out-prefix", stability.out_prefix,
                              "output prefix (.csv/.json/.svg); default stdout CSV");
    cmd_stability->callback([&] { exit_code = run_stability(stability, command_line); });

    VarianceArgs variance;
    auto* cmd_variance = app.add_subcommand(
        "variance", "per-system score variance under document resampling");
    cmd_variance->add_option("--scores", variance.scores_path)->required();
    cmd_variance->add_option("--sizes", variance.sizes, "sample sizes, comma separated")
        ->required()
        ->delimiter(',');
    cmd_variance->add_option("--iterations", variance.iterations);
    cmd_variance->add_option("--seed", variance.seed)->required();
    cmd_variance->add_option("--level", variance.level, "per-system interval level");
    cmd_variance->add_option("--out", variance.out, "output JSON path (default stdout)");
    cmd_variance->add_option("--plot", variance.plot, "bar-with-interval SVG path");
    cmd_variance->callback([&] { exit_code = run_variance(variance, command_line); });

    SynthArgs synth;
    auto* cmd_synth =
        app.add_subcommand("synth", "generate a seeded synthetic metric/human dataset");
    cmd_synth->add_option("--systems", synth.systems);
    cmd_synth->add_option("--docs", synth.docs, "metric (full test set) documents");
    cmd_synth->add_option("--judged", synth.judged, "human-judged documents");
    cmd_synth->add_option("--spread", synth.spread, "latent quality spread");
    cmd_synth->add_option("--noise", synth.noise, "per-summary noise scale");
    cmd_synth->add_option("--lambda", synth.lambda, "system-level metric distortion");
    cmd_synth->add_option("--seed", synth.seed)->required();
    cmd_synth->add_option("--out-metric", synth.out_metric, "metric CSV path")->required();
    cmd_synth->add_option("--out-human", synth.out_human, "human CSV path")->required();
    cmd_synth->callback([&] { exit_code = run_synth(synth, command_line); });

    try {
        app.parse(argc, argv);
        return exit_code;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const me::degenerate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
