#pragma once

#include <string>

#include "gqr/eval.hpp"

namespace gqr {

/// Deterministic renderers: a given report always yields identical bytes.
/// Markdown tables mirror the Min/Max/Avg ± Std and per-rank layouts with
/// per-column maxima bolded; CSV carries the same numeric values.
std::string render_markdown(const EvalReport& report);
std::string render_csv(const EvalReport& report);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

std::string render_sweep_markdown(const SweepReport& report);
std::string render_sweep_csv(const SweepReport& report);

} // namespace gqr
