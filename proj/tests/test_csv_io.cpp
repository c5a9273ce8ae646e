#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "kdr/csv_io.hpp"
#include "kdr/synth.hpp"
#include "test_util.hpp"

using namespace kdr;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "test.csv");
}

}  // namespace

TEST(Csv, HeaderAndNamedResponse) {
  const CsvTable t = parse("x1,x2,y\n1,2,3\n4,5,6\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"x1", "x2", "y"}));
  const Dataset d = split_response(t, "y");
  EXPECT_EQ(d.x, (Eigen::MatrixXd(2, 2) << 1, 2, 4, 5).finished());
  EXPECT_EQ(d.y, (Eigen::MatrixXd(2, 1) << 3, 6).finished());
}

TEST(Csv, HeaderlessIndexedResponse) {
  const CsvTable t = parse("1.5,-2,0.25\n3,4e-3,7\n");
  EXPECT_TRUE(t.header.empty());
  const Dataset d = split_response(t, "0");
  EXPECT_EQ(d.y, (Eigen::MatrixXd(2, 1) << 1.5, 3).finished());
  EXPECT_EQ(d.x, (Eigen::MatrixXd(2, 2) << -2, 0.25, 4e-3, 7).finished());
}

TEST(Csv, WhitespaceAndBlankLines) {
  const CsvTable t = parse("a, b\r\n 1 , 2\r\n\n3,4\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.values, (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished());
}

TEST(Csv, NonNumericCellReportsLine) {
  try {
    (void)parse("x,y\n1,2\n3,abc\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
}

TEST(Csv, RaggedRowReportsLine) {
  try {
    (void)parse("1,2,3\n4,5\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW((void)parse("x,y\n"), ParseError);
  EXPECT_THROW((void)parse(""), ParseError);
}

TEST(Csv, MissingResponseColumn) {
  const CsvTable t = parse("x1,x2,y\n1,2,3\n");
  EXPECT_THROW(split_response(t, "z"), ParseError);
  EXPECT_THROW(split_response(t, "3"), ParseError);
}

TEST(Csv, RoundTripIsExact) {
  Rng rng = make_rng(1);
  Eigen::MatrixXd m = test::gaussian(20, 4, rng);
  m(0, 0) = 1e-300;
  m(1, 1) = -123456789.123456789;
  m(2, 2) = 0.1;
  std::ostringstream out;
  write_csv(out, m, {"a", "b", "c", "d"});
  const CsvTable back = parse(out.str());
  EXPECT_EQ(back.header, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(back.values, m);
}

TEST(Csv, DatasetFileRoundTrip) {
  GenSpec spec;
  spec.seed = 2;
  const Dataset d = generate(spec);
  const auto path = std::filesystem::temp_directory_path() / "kdr_csv_roundtrip.csv";
  {
    std::ofstream f(path);
    write_dataset_csv(f, d);
  }
  const Dataset back = read_csv(path.string(), "y");
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  std::filesystem::remove(path);
  EXPECT_THROW(read_csv((path.string() + ".missing"), "y"), Error);
}

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-1.5e-7), "-1.5e-07");
}

TEST(Manifest, OrderedKeyValueLines) {
  Manifest m;
  m.set("b", 2L);
  m.set("a", 0.5);
  m.set("flag", true);
  m.set("trace", join_doubles({1.0, 0.25}));
  std::ostringstream out;
  m.write(out);
  EXPECT_EQ(out.str(), "b=2\na=0.5\nflag=true\ntrace=1;0.25\n");
}
