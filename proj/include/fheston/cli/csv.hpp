#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "fheston/engine.hpp"

namespace fheston::cli {

inline constexpr std::string_view kSummariesHeader = "payoff,n,mean,sd,cv,min,q1,median,q3,max";
inline constexpr std::string_view kEstimatesHeader = "payoff,n,estimate_index,value";
inline constexpr std::string_view kConvergenceHeader = "level,n,delta,strong_err_L2,weak_err,slope";

/// Shortest decimal string that parses back to the same double.
std::string format_number(double x);

void write_summary_row(std::ostream& os, std::string_view payoff, std::size_t n, const EstimateSummary& s);
void write_estimate_rows(std::ostream& os, std::string_view payoff, std::size_t n, std::span<const double> values);
/// One row per level; `slope` is the fitted strong-error slope, repeated.
void write_convergence_rows(std::ostream& os, const ConvergenceReport& report);

}  // namespace fheston::cli
