#include <doctest.h>

#include <limits>
#include <sstream>

#include "cfbva/report.hpp"

using namespace cfbva;

TEST_CASE("number format") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1e-5) == "1.0000000000000001e-05");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "null");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "null");
  // 17 digits always round-trip.
  for (double x : {1.0 / 3.0, 2.0 / 7.0, 98.8431, -1e-17})
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("canonical dump sorts keys and is stable") {
  nlohmann::json a;
  a["zeta"] = 1.5;
  a["alpha"] = {{"b", 2}, {"a", std::numeric_limits<double>::quiet_NaN()}};
  a["list"] = {3, 0.25, "x"};
  const std::string text = dump_report(a);
  CHECK(text == "{\n"
                "  \"alpha\": {\n"
                "    \"a\": null,\n"
                "    \"b\": 2\n"
                "  },\n"
                "  \"list\": [\n"
                "    3,\n"
                "    0.25,\n"
                "    \"x\"\n"
                "  ],\n"
                "  \"zeta\": 1.5\n"
                "}\n");
  nlohmann::json b;
  b["list"] = {3, 0.25, "x"};
  b["alpha"] = {{"a", std::numeric_limits<double>::quiet_NaN()}, {"b", 2}};
  b["zeta"] = 1.5;
  CHECK(dump_report(b) == text);
}

TEST_CASE("csv rows") {
  std::ostringstream os;
  CsvWriter w(os, {"path", "time", "note"});
  w.row({0LL, 0.5, std::string("a")});
  w.row({12LL, std::numeric_limits<double>::quiet_NaN(), std::string("b")});
  CHECK(os.str() == "path,time,note\n0,0.5,a\n12,,b\n");
  CHECK_THROWS(w.row({1LL}));
}
