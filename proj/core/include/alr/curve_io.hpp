#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "alr/harness.hpp"

namespace alr {

inline constexpr std::string_view kCurveCsvHeader =
    "strategy,solver,task,K,metric,mean,std,n_runs";

/// Tidy long format, one row per (metric, task, K).
void write_curves_csv(std::span<const LearningCurve> curves, std::ostream& out);
void write_curves_csv(std::span<const LearningCurve> curves, const std::filesystem::path& path);

/// Groups rows back into curves by (strategy, solver), in file order.
std::vector<LearningCurve> read_curves_csv(const std::filesystem::path& path);

/// CSV helpers shared with the command-line tool: quoting per RFC 4180 and
/// round-trippable 17-digit numbers.
std::string csv_field(std::string_view text);
std::string csv_number(double value);

std::string curves_to_json(std::span<const LearningCurve> curves);

}  // namespace alr
