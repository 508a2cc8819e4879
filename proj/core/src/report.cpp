#include "ftaplab/report.hpp"

#include <cstdio>
#include <sstream>

namespace ftaplab {

void AnalysisReport::add_row(int n, const std::string& condition, double value,
                             const std::string& certificate) {
  rows_.push_back({n, condition, value, certificate});
}

std::string AnalysisReport::format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string AnalysisReport::to_text() const {
  std::ostringstream os;
  os << "== " << title_ << " ==\n";
  for (const auto& row : rows_) {
    os << "  n=" << row.n << "  " << row.condition << " = " << format_value(row.value);
    if (!row.certificate.empty()) os << "  [" << row.certificate << "]";
    os << "\n";
  }
  for (const auto& note : notes_) os << "  note: " << note << "\n";
  return os.str();
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string AnalysisReport::to_csv() const {
  std::ostringstream os;
  os << "# ftaplab report v1\n";
  os << "n,condition,value,certificate\n";
  for (const auto& row : rows_)
    os << row.n << "," << csv_quote(row.condition) << "," << format_value(row.value) << ","
       << csv_quote(row.certificate) << "\n";
  return os.str();
}

}  // namespace ftaplab
