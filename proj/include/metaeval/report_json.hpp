#pragma once

#include <string>

#include <json.hpp>

#include "metaeval/bootstrap.hpp"
#include "metaeval/correlation.hpp"
#include "metaeval/delta_correlation.hpp"
#include "metaeval/table_io.hpp"

namespace metaeval {

using ojson = nlohmann::ordered_json;

inline ojson to_json(const CorrelationResult& r) {
    ojson j;
    j["coefficient"] = r.coefficient;
    j["P"] = r.components.concordant;
    j["Q"] = r.components.discordant;
    j["T"] = r.components.ties_x_only;
    j["U"] = r.components.ties_z_only;
    j["B"] = r.components.ties_both;
    j["n"] = r.components.n;
    j["pairs_used"] = r.pairs_used;
    if (r.mode)
        j["mode"] = std::string(to_string(*r.mode));
    else
        j["mode"] = nullptr;
    return j;
}

inline ojson to_json(const ConfidenceInterval& ci) {
    ojson j;
    j["lower"] = ci.lower;
    j["upper"] = ci.upper;
    j["level"] = ci.level;
    j["point_estimate"] = ci.point_estimate;
    j["method"] = ci.method;
    j["iterations"] = ci.iterations;
    j["defined_iterations"] = ci.defined_iterations;
    return j;
}

inline ojson to_json(const DeltaGridCell& cell) {
    ojson j;
    j["fraction_low"] = cell.fraction_low;
    j["fraction_high"] = cell.fraction_high;
    j["l_value"] = cell.lower_gap;
    j["u_value"] = cell.upper_gap;
    j["pairs"] = cell.result.pairs_used;
    j["result"] = to_json(cell.result);
    return j;
}

inline ojson to_json(const DeltaGrid& grid) {
    ojson j;
    j["fractions"] = grid.fractions;
    auto cells = ojson::array();
    for (const auto& cell : grid.cells) cells.push_back(to_json(cell));
    j["cells"] = std::move(cells);
    return j;
}

inline ojson to_json(const StabilityPoint& p) {
    ojson j;
    j["M"] = p.sample_size;
    j["mean_tau"] = p.mean_tau;
    j["std_tau"] = p.std_tau;
    j["iterations"] = p.iterations;
    j["defined"] = p.defined;
    return j;
}

inline ojson to_json(const VarianceReport& r) {
    ojson j;
    j["M"] = r.sample_size;
    j["iterations"] = r.iterations;
    ojson vars = ojson::object();
    for (const auto& [id, var] : r.per_system_variance) vars[id] = var;
    j["per_system_variance"] = std::move(vars);
    return j;
}

// Flat CSV view of a delta grid, one row per cell.
inline std::string to_csv(const DeltaGrid& grid) {
    std::string out = "fraction_low,fraction_high,l_value,u_value,pairs,tau\n";
    for (const auto& cell : grid.cells) {
        out += detail::format_score(cell.fraction_low);
        out += ',';
        out += detail::format_score(cell.fraction_high);
        out += ',';
        out += detail::format_score(cell.lower_gap);
        out += ',';
        out += detail::format_score(cell.upper_gap);
        out += ',';
        out += std::to_string(cell.result.pairs_used);
        out += ',';
        out += detail::format_score(cell.result.coefficient);
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const std::vector<StabilityPoint>& curve) {
    std::string out = "M,mean_tau,std_tau,iterations,defined\n";
    for (const auto& p : curve) {
        out += std::to_string(p.sample_size);
        out += ',';
        out += detail::format_score(p.mean_tau);
        out += ',';
        out += detail::format_score(p.std_tau);
        out += ',';
        out += std::to_string(p.iterations);
        out += ',';
        out += std::to_string(p.defined);
        out += '\n';
    }
    return out;
}

inline std::string dump_pretty(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace metaeval
