#pragma once

// Meta-evaluation of automatic summarization metrics against human
// judgments: system-level rank correlations, gap-windowed correlation
// variants, bootstrap confidence intervals, and ranking-stability and
// score-variance analyses over precomputed score tables.

#include "metaeval/bootstrap.hpp"
#include "metaeval/correlation.hpp"
#include "metaeval/delta_correlation.hpp"
#include "metaeval/errors.hpp"
#include "metaeval/report_json.hpp"
#include "metaeval/rng.hpp"
#include "metaeval/score_matrix.hpp"
#include "metaeval/svg_chart.hpp"
#include "metaeval/synthetic.hpp"
#include "metaeval/table_io.hpp"

namespace metaeval {
inline constexpr const char* kVersion = "0.1.0";
}
