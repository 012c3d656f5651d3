#include <doctest.h>

#include <sstream>

#include "crtrial/dataset_io.hpp"
#include "crtrial/report.hpp"

using namespace crtrial;

namespace {

long error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_dataset_csv(in, "x.csv");
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("dataset CSV round trip") {
  std::istringstream in("id,arm,time,status\n1,T,2.5,1\n\n2,C,28,0\r\n3,C,4,2\n");
  const auto d = read_dataset_csv(in, "mem");
  REQUIRE(d.size() == 3);
  CHECK(d[0].time == 2.5);
  CHECK(d[1].status == Status::censored);
  CHECK(d[2].arm == Arm::control);
  std::ostringstream out;
  write_dataset_csv(out, d);
  CHECK(out.str() == "id,arm,time,status\n1,T,2.5,1\n2,C,28,0\n3,C,4,2\n");
}

TEST_CASE("dataset CSV errors carry line numbers") {
  CHECK(error_line("") == 0);
  CHECK(error_line("id,arm,time\n") == 1);
  CHECK(error_line("id,arm,time,status\n1,T,2,1\n2,X,3,1\n") == 3);
  CHECK(error_line("id,arm,time,status\n1,T,-2,1\n") == 2);
  CHECK(error_line("id,arm,time,status\n1,T,0,1\n") == 2);
  CHECK(error_line("id,arm,time,status\n1,T,abc,1\n") == 2);
  CHECK(error_line("id,arm,time,status\n1,T,2,3\n") == 2);
  CHECK(error_line("id,arm,time,status\n1,T,2,1\n1,C,2,1\n") == 3);
  CHECK(error_line("id,arm,time,status\n1,T,2\n") == 2);
}

TEST_CASE("scenario row CSV") {
  std::istringstream hz("alpha01t,alpha01c,alpha02t,alpha02c\n0.06,0.04,0.01,0.01\n");
  const auto rows = read_scenario_rows_csv(hz, "h");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].kind == ScenarioRowInput::Kind::hazards);
  std::istringstream pr("f1t,f1c,f2t,f2c\n0.7,0.55,0.1,0.1\n0.7,0.55,0.2,0.2\n");
  CHECK(read_scenario_rows_csv(pr, "p").size() == 2);
  std::istringstream empty("f1t,f1c,f2t,f2c\n");
  CHECK_THROWS_AS(read_scenario_rows_csv(empty, "e"), ParseError);
  std::istringstream wrong("a,b,c,d\n1,2,3,4\n");
  CHECK_THROWS_AS(read_scenario_rows_csv(wrong, "w"), ParseError);
}
