#pragma once

#include <string>
#include <vector>

namespace spindyn {

// Sampled signal vs time. sigmas may be empty (no per-point uncertainty).
struct DecayCurve {
  std::vector<double> times;   // us, strictly increasing, >= 0
  std::vector<double> values;  // dimensionless, in [-1.05, 1.05]
  std::vector<double> sigmas;  // 1-sigma per point; empty or same length

  bool has_sigmas() const { return !sigmas.empty(); }
  std::size_t size() const { return times.size(); }

  // throws DataError on violated invariants
  void validate() const;
};

// CSV format: header "time_us,signal[,sigma]", '.' decimal separator, '\n'
// line endings. The sigma column is optional.
DecayCurve read_curve_csv(const std::string& path);
void write_curve_csv(const std::string& path, const DecayCurve& curve,
                     const std::string& time_label = "time_us");

// atomic text write (temp file + rename)
void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);

}  // namespace spindyn
