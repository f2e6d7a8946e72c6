#include "fheston/cli/csv.hpp"

#include <array>
#include <charconv>

namespace fheston::cli {

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

void write_summary_row(std::ostream& os, std::string_view payoff, std::size_t n, const EstimateSummary& s) {
  os << payoff << ',' << n;
  for (double v : {s.mean, s.sd, s.cv, s.min, s.q1, s.median, s.q3, s.max}) os << ',' << format_number(v);
  os << '\n';
}

void write_estimate_rows(std::ostream& os, std::string_view payoff, std::size_t n, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    os << payoff << ',' << n << ',' << i << ',' << format_number(values[i]) << '\n';
}

void write_convergence_rows(std::ostream& os, const ConvergenceReport& report) {
  for (std::size_t l = 0; l < report.levels.size(); ++l) {
    const auto& lv = report.levels[l];
    os << l << ',' << lv.n << ',' << format_number(lv.delta) << ',' << format_number(lv.strong_err_l2) << ','
       << format_number(lv.weak_err) << ',' << format_number(report.strong_slope) << '\n';
  }
}

}  // namespace fheston::cli
