#pragma once

#include <string>

#include "ddflow/cpg.hpp"
#include "ddflow/engine.hpp"

namespace ddflow {

inline constexpr int kReportVersion = 1;

/// Versioned JSON report. With `timing` false the elapsed time is written as
/// 0 so repeated runs produce identical bytes.
std::string report_json(const Cpg& cpg, const FlowReport& report, bool timing = true);
std::string report_text(const Cpg& cpg, const FlowReport& report, bool timing = true);

}  // namespace ddflow
