#include "spindyn/curve.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spindyn/errors.hpp"

namespace spindyn {

void DecayCurve::validate() const {
  if (values.size() != times.size()) {
    throw DataError("DecayCurve: times/values length mismatch");
  }
  if (!sigmas.empty() && sigmas.size() != times.size()) {
    throw DataError("DecayCurve: sigma column length mismatch");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) throw DataError("DecayCurve: negative time");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw DataError("DecayCurve: times must be strictly increasing");
    }
    if (values[i] < -1.05 || values[i] > 1.05) {
      throw DataError("DecayCurve: signal outside [-1.05, 1.05]");
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

DecayCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open curve file: " + path);
  DecayCurve c;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      // first row is a header if the first field is not numeric
      char* end = nullptr;
      std::strtod(line.c_str(), &end);
      if (end == line.c_str()) continue;
    }
    std::istringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) {
      if (field.empty()) continue;
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw DataError("malformed CSV field '" + field + "' at " + path + ":" +
                        std::to_string(lineno));
      }
    }
    if (row.size() < 2) {
      throw DataError("CSV row with fewer than 2 columns at " + path + ":" +
                      std::to_string(lineno));
    }
    c.times.push_back(row[0]);
    c.values.push_back(row[1]);
    if (row.size() >= 3) c.sigmas.push_back(row[2]);
  }
  if (!c.sigmas.empty() && c.sigmas.size() != c.times.size()) {
    throw DataError("CSV sigma column present only on some rows: " + path);
  }
  c.validate();
  return c;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_curve_csv(const std::string& path, const DecayCurve& curve,
                     const std::string& time_label) {
  std::ostringstream out;
  out << time_label << ",signal";
  if (curve.has_sigmas()) out << ",sigma";
  out << "\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << format_double(curve.times[i]) << "," << format_double(curve.values[i]);
    if (curve.has_sigmas()) out << "," << format_double(curve.sigmas[i]);
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

}  // namespace spindyn
