#include "fracperc/io.hpp"
#include "fracperc/sampler.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace fracperc;
using namespace fracperc::io;

TEST(Io, DoublesRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Io, EstimateRows) {
  std::ostringstream os;
  write_estimate_header(os);
  montecarlo::EstimateRow row;
  row.M = 2;
  row.p = 0.5;
  row.n = 3;
  row.functional = montecarlo::Functional::V1;
  row.target = Target::C;
  row.estimate.add(1.0);
  row.estimate.add(2.0);
  write_estimate_row(os, row);
  row.rescaled_mean = 0.25;
  write_estimate_row(os, row);
  EXPECT_EQ(os.str(),
            "M,p,n,functional,target,mean,stderr,count,rescaled_mean\n"
            "2,0.5,3,V1,C,1.5,0.5,2,nan\n"
            "2,0.5,3,V1,C,1.5,0.5,2,0.25\n");
}

TEST(Io, WideTable) {
  WideTable t;
  t.header = {"p", "n=1"};
  t.rows = {{0.5, 0.25}};
  std::ostringstream os;
  t.write(os);
  EXPECT_EQ(os.str(), "p,n=1\n0.5,0.25\n");
}

TEST(Io, PbmRoundTrip) {
  const auto r = sample(make_params(3, 0.7), 4, 9, 0);
  std::ostringstream os;
  write_pbm(os, r.grid);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, 9), "P1\n81 81\n");
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) EXPECT_LE(line.size(), 70u);
  std::istringstream is(text);
  EXPECT_EQ(read_pbm(is), r.grid);
  std::istringstream bad("P4\n1 1\n");
  EXPECT_THROW(read_pbm(bad), std::runtime_error);
}

TEST(Io, ConfigHash) {
  EXPECT_EQ(config_hash(""), "cbf29ce484222325");
  EXPECT_EQ(config_hash("M = 2\n").size(), 16u);
  EXPECT_NE(config_hash("M = 2\n"), config_hash("M = 3\n"));
}
