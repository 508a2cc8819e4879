#include <doctest.h>

#include "ftaplab/report.hpp"

using namespace ftaplab;

TEST_SUITE("report") {

TEST_CASE("csv output is versioned, quoted and deterministic") {
  auto build = [] {
    AnalysisReport rep("detectors");
    rep.add_row(1, "AA1", 0.3, "xi=3 @ n=1");
    rep.add_row(2, "AA2", 0.0, "says \"absent\"");
    rep.add_note("schedule c_k = 1/k");
    return rep;
  };
  auto a = build().to_csv();
  auto b = build().to_csv();
  CHECK(a == b);
  CHECK(a.rfind("# ftaplab report v1\n", 0) == 0);
  CHECK(a.find("n,condition,value,certificate\n") != std::string::npos);
  CHECK(a.find("\"says \"\"absent\"\"\"") != std::string::npos);

  auto text = build().to_text();
  CHECK(text.find("AA1") != std::string::npos);
  CHECK(text.find("note: schedule") != std::string::npos);
}

TEST_CASE("value formatting is stable") {
  CHECK(AnalysisReport::format_value(0.5) == "0.5");
  CHECK(AnalysisReport::format_value(-0.125) == "-0.125");
  CHECK(AnalysisReport::format_value(1.0 / 3.0) == "0.333333333333");
}

}  // TEST_SUITE
