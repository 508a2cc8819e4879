#pragma once

#include <string>
#include <vector>

namespace ftaplab {

struct ReportRow {
  int n = 0;
  std::string condition;
  double value = 0.0;
  std::string certificate;
};

/// Verdicts, certificates and per-index values collected by an analysis,
/// rendered as human-readable text or versioned machine CSV. All numeric
/// formatting is fixed so identical runs produce identical bytes.
class AnalysisReport {
 public:
  explicit AnalysisReport(std::string title) : title_(std::move(title)) {}

  void add_row(int n, const std::string& condition, double value,
               const std::string& certificate = "");
  void add_note(const std::string& note) { notes_.push_back(note); }

  const std::vector<ReportRow>& rows() const { return rows_; }
  const std::vector<std::string>& notes() const { return notes_; }

  std::string to_text() const;
  std::string to_csv() const;

  static std::string format_value(double v);

 private:
  std::string title_;
  std::vector<ReportRow> rows_;
  std::vector<std::string> notes_;
};

}  // namespace ftaplab
