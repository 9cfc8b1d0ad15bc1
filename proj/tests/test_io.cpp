// Copyright 2026 The grtc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "grtc/io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace grtc {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("grtc_io_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p;
  }

  fs::path dir_;
};

TEST_F(IoTest, SingleEntryWithShape) {
  auto obs = load_tns(write("a.tns", "1 1 1 5.0\n"), Shape({2, 2, 2}));
  ASSERT_EQ(obs.size(), 1);
  EXPECT_EQ(obs.shape(), Shape({2, 2, 2}));
  EXPECT_EQ(obs.value(0), 5.0);
  EXPECT_EQ(obs.index(0)[2], 0);
}

TEST_F(IoTest, ShapeInferredFromLargestIndex) {
  auto obs = load_tns(write("a.tns", "1 3 2 1\n2 1 1 -1.5\n"));
  EXPECT_EQ(obs.shape(), Shape({2, 3, 2}));
}

TEST_F(IoTest, HeaderShapeAndComments) {
  auto obs = load_tns(write("a.tns", "# shape 4 4 4\n# a comment\n\n2 2 2 1e-3\n"));
  EXPECT_EQ(obs.shape(), Shape({4, 4, 4}));
  EXPECT_EQ(obs.value(0), 1e-3);
}

TEST_F(IoTest, MalformedLinesReportLineNumber) {
  try {
    load_tns(write("a.tns", "1 1 1 1\n1 1 x 2\n"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  EXPECT_THROW(load_tns(write("b.tns", "0 1 1 1\n")), DataError);
  EXPECT_THROW(load_tns(write("c.tns", "1 1 1 1\n1 1 1\n")), DataError);
  EXPECT_THROW(load_tns(write("d.tns", "1 1 1 1\n1 1 1 2\n")), DataError);
  EXPECT_THROW(load_tns(write("e.tns", "3 1 1 1\n"), Shape({2, 2, 2})), DataError);
  EXPECT_THROW(load_tns(write("f.tns", "1 1 1 nan\n")), DataError);
  EXPECT_THROW(load_tns(dir_ / "missing.tns"), DataError);
}

TEST_F(IoTest, TnsRoundTripIsExact) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    auto obs = oracle::random_obs(Shape({7, 5, 3, 2}), 0.3, rng);
    fs::path p = dir_ / "rt.tns";
    save_tns(p, obs);
    EXPECT_EQ(load_tns(p), obs);
  }
}

TEST_F(IoTest, GraphRoundTripAndValidation) {
  std::mt19937_64 rng(2);
  auto g = oracle::random_graph(9, 0.4, rng);
  fs::path p = dir_ / "g.edges";
  save_graph(p, g);
  auto back = load_graph(p);
  EXPECT_EQ(back.nodes(), 9);
  EXPECT_EQ(Eigen::MatrixXd(back.weights()), Eigen::MatrixXd(g.weights()));
  EXPECT_THROW(load_graph(write("a", "1 2 1\n")), DataError);
  EXPECT_THROW(load_graph(write("b", "# nodes 3\n1 1 1\n")), DataError);
  EXPECT_THROW(load_graph(write("c", "# nodes 3\n1 2 -1\n")), DataError);
  EXPECT_THROW(load_graph(write("d", "# nodes 3\n1 2 1\n2 1 1\n")), DataError);
  EXPECT_THROW(load_graph(write("e", "# nodes 3\n1 4 1\n")), DataError);
  EXPECT_EQ(load_graph(write("f", "# nodes 3\n")).edge_count(), 0);
}

TEST_F(IoTest, FactorsRoundTripIsExact) {
  std::mt19937_64 rng(3);
  CPFactors<double> cp(oracle::random_factors(Shape({4, 3, 5}), 2, rng));
  fs::path p = dir_ / "f.txt";
  save_factors(p, cp);
  auto back = load_factors(p);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(back[i], cp[i]);
  EXPECT_THROW(load_factors(write("bad", "# cp order 2 rank 1\n# mode 1 rows 1\n1\n")), DataError);
}

TEST_F(IoTest, MatrixLoader) {
  auto m = load_matrix(write("m.txt", "# header\n1 2\n3 4\n5 6\n"));
  ASSERT_EQ(m.rows(), 3);
  EXPECT_EQ(m(2, 1), 6);
  EXPECT_THROW(load_matrix(write("r.txt", "1 2\n3\n")), DataError);
}

TEST_F(IoTest, TriplesBinBoundaries) {
  // Timestamps 0..70 in steps of 10 split into 7 bins of width 10; 70 joins the last bin.
  std::string content;
  for (int t = 0; t <= 7; ++t) content += "1 " + std::to_string(t + 1) + " " + std::to_string(10 * t) + " " +
                                          std::to_string(t) + "\n";
  auto obs = load_triples(write("r.txt", content), 7);
  EXPECT_EQ(obs.shape(), Shape({1, 8, 7}));
  for (Index e = 0; e < obs.size(); ++e) {
    const double v = obs.value(e);
    const Index expected_bin = std::min<Index>(static_cast<Index>(v), 6);
    EXPECT_EQ(obs.index(e)[2], expected_bin);
  }
}

TEST_F(IoTest, TriplesKeepLatestRatingPerCell) {
  auto obs = load_triples(write("r.txt", "1 1 0 1\n1 1 4 2\n1 1 3 3\n2 2 10 4\n"), 2);
  ASSERT_EQ(obs.size(), 2);
  EXPECT_EQ(obs.value(0), 2);
}

TEST_F(IoTest, AtomicWriteReplacesContent) {
  fs::path p = dir_ / "out.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  std::ifstream in(p);
  std::string s;
  in >> s;
  EXPECT_EQ(s, "two");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir_), fs::directory_iterator()), 1);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.1");
}

}  // namespace
}  // namespace grtc
