#include "trajstyle/trajectory/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "trajstyle/error.hpp"
#include "trajstyle/trajectory/csv.hpp"
#include "trajstyle/trajectory/generate.hpp"

namespace trajstyle::trajectory {
namespace {

using numkit::Rng;

Trajectory random_walk(Rng& rng, std::size_t m, double rate = 10.0) {
  Trajectory t;
  t.sample_rate = rate;
  Vec3 p{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
  for (std::size_t i = 0; i < m; ++i) {
    for (double& v : p) v += rng.uniform(-5, 5);
    t.samples.push_back(p);
  }
  return t;
}

// Distance of p from the line through a and b.
double off_line(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Vec3 w{p[0] - a[0], p[1] - a[1], p[2] - a[2]};
  const Vec3 c{d[1] * w[2] - d[2] * w[1], d[2] * w[0] - d[0] * w[2], d[0] * w[1] - d[1] * w[0]};
  const double dn = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) / dn;
}

TEST(Resample, SameRateIsIdentity) {
  Rng rng(1);
  const Trajectory t = random_walk(rng, 50);
  EXPECT_EQ(resample(t, 10.0), t);
}

TEST(Resample, StraightLineStaysCollinear) {
  Trajectory t;
  t.sample_rate = 20.0;
  for (int i = 0; i < 100; ++i) t.samples.push_back({3.0 * i, -1.5 * i + 7.0, 0.25 * i});
  const Trajectory r = resample(t, 10.0);
  ASSERT_EQ(r.size(), 50u);
  EXPECT_EQ(r.sample_rate, 10.0);
  EXPECT_EQ(r.samples.front(), t.samples.front());
  EXPECT_EQ(r.samples.back(), t.samples.back());
  for (const Vec3& p : r.samples) EXPECT_LT(off_line(t.samples.front(), t.samples.back(), p), 1e-9);
  // Interpolation oracle: sample i sits at source index i * 99 / 49.
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(r[i][0], 3.0 * i * 99.0 / 49.0, 1e-9);
}

TEST(Resample, TwoSamplesOverOneSecondGiveTenMillimetreTicks) {
  Trajectory t;
  t.sample_rate = 2.0;  // 2 samples spanning 1 s
  t.samples = {{0, 0, 0}, {90, 0, 0}};
  const Trajectory r = resample(t, 10.0);
  ASSERT_EQ(r.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(r[i][0], 10.0 * i, 1e-12);
    EXPECT_EQ(r[i][1], 0.0);
  }
  EXPECT_EQ(r.samples.back()[0], 90.0);
}

TEST(Resample, EndpointsExactForAnyRate) {
  Rng rng(2);
  for (double rate : {3.0, 7.5, 10.0, 33.0, 120.0}) {
    const Trajectory t = random_walk(rng, 2 + rng.below(80), rate);
    const Trajectory r = resample(t, 10.0);
    EXPECT_EQ(r.samples.front(), t.samples.front());
    EXPECT_EQ(r.samples.back(), t.samples.back());
  }
}

TEST(Resample, RejectsShortInput) {
  Trajectory t;
  t.samples = {{1, 2, 3}};
  EXPECT_THROW(resample(t, 10.0), ValueError);
  t.samples.push_back({1, 2, 3});
  EXPECT_THROW(resample(t, 0.0), ValueError);
}

TEST(PadOrSplit, FiftySamplesUnchanged) {
  Rng rng(3);
  const Trajectory t = random_walk(rng, 50);
  const auto segs = pad_or_split(t);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0], t);
}

TEST(PadOrSplit, ShortInputPaddedWithLastValue) {
  Rng rng(4);
  const Trajectory t = random_walk(rng, 30);
  const auto segs = pad_or_split(t);
  ASSERT_EQ(segs.size(), 1u);
  ASSERT_EQ(segs[0].size(), 50u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(segs[0][i], t[i]);
  for (std::size_t i = 30; i < 50; ++i) EXPECT_EQ(segs[0][i], t[29]);
}

TEST(PadOrSplit, LongInputCutIntoConsecutiveSegments) {
  Rng rng(5);
  const Trajectory t = random_walk(rng, 120);
  const auto segs = pad_or_split(t);
  ASSERT_EQ(segs.size(), 3u);
  for (const auto& s : segs) EXPECT_EQ(s.size(), 50u);
  for (std::size_t i = 0; i < 120; ++i) EXPECT_EQ(segs[i / 50][i % 50], t[i]);
  for (std::size_t i = 20; i < 50; ++i) EXPECT_EQ(segs[2][i], t[119]);
}

TEST(PadOrSplit, ConcatenateAndTrimRecoversInput) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory t = random_walk(rng, 1 + rng.below(260));
    std::vector<Vec3> joined;
    for (const auto& s : pad_or_split(t)) {
      EXPECT_EQ(s.size(), kSegmentLength);
      joined.insert(joined.end(), s.samples.begin(), s.samples.end());
    }
    joined.resize(t.size());
    EXPECT_EQ(joined, t.samples);
  }
}

TEST(PadOrSplit, Errors) {
  EXPECT_THROW(pad_or_split(Trajectory{}), ValueError);
  Trajectory t;
  t.samples = {{0, 0, 0}, {1, 1, 1}};
  t.sample_rate = 20.0;
  EXPECT_THROW(pad_or_split(t), ValueError);
}

TEST(Normalize, Definitions) {
  const WorkspaceConfig cfg;
  Trajectory constant;
  constant.samples.assign(50, {12.0, -4.0, 99.0});
  for (const Vec3& p : normalize(constant, cfg).samples) EXPECT_EQ(p, (Vec3{0, 0, 0}));

  Trajectory t;
  t.samples = {{10, 20, 30}, {310, 20, 30}};
  const Trajectory n = normalize(t, cfg);
  EXPECT_EQ(n[0], (Vec3{0, 0, 0}));
  EXPECT_EQ(n[1][0], 1.0);
}

TEST(Normalize, TranslationInvariantAndInvertible) {
  Rng rng(7);
  const WorkspaceConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const Trajectory t = random_walk(rng, 50);
    Trajectory shifted = t;
    // Power-of-two offsets keep the subtraction exact.
    const Vec3 c{64.0, -128.0, 32.0};
    for (Vec3& p : shifted.samples)
      for (int a = 0; a < 3; ++a) p[a] += c[a];
    const Trajectory n1 = normalize(t, cfg), n2 = normalize(shifted, cfg);
    for (std::size_t i = 0; i < 50; ++i)
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(n1[i][a], n2[i][a], 1e-15);
    const Trajectory back = denormalize(n1, t[0], cfg);
    for (std::size_t i = 0; i < 50; ++i)
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(back[i][a], t[i][a], 1e-12);
  }
}

TEST(Workspace, Validation) {
  WorkspaceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.rt = 0.0;
  EXPECT_THROW(cfg.validate(), ValueError);
  cfg.rt = 300.0;
  cfg.lo[1] = 400.0;
  EXPECT_THROW(cfg.validate(), ValueError);
}

TEST(Generate, LinearContentCollinearInBoundsAndSeeded) {
  const WorkspaceConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed), again(seed);
    const Trajectory t = random_linear_content(rng, cfg);
    ASSERT_EQ(t.size(), 50u);
    for (const Vec3& p : t.samples) {
      EXPECT_LT(off_line(t[0], t.back(), p), 1e-9);
      EXPECT_TRUE(cfg.contains(p));
    }
    EXPECT_EQ(random_linear_content(again, cfg), t);
  }
}

TEST(Generate, SyntheticDatasetValidAndDeterministic) {
  const WorkspaceConfig cfg;
  Rng a(11), b(11);
  const auto data = synthetic_dataset(a, 300, cfg);
  EXPECT_EQ(data, synthetic_dataset(b, 300, cfg));
  ASSERT_EQ(data.size(), 300u);
  for (const auto& t : data) {
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(t.size(), 50u);
    for (const Vec3& p : t.samples) EXPECT_TRUE(cfg.contains(p));
  }
  Rng c(1);
  EXPECT_THROW(synthetic_dataset(c, 0, cfg), ValueError);
}

TEST(Generate, JerkyStyleStepsStayWithinActionRange) {
  const WorkspaceConfig cfg;
  Rng rng(12);
  const Trajectory s = jerky_style(rng, cfg);
  ASSERT_EQ(s.size(), 50u);
  for (std::size_t i = 1; i < 50; ++i)
    for (int a = 0; a < 3; ++a) EXPECT_LE(std::abs(s[i][a] - s[i - 1][a]), 0.1 * cfg.rt);
}

TEST(Csv, RoundTripIsBitExact) {
  Rng rng(8);
  Trajectory t = random_walk(rng, 57);
  t.samples[3][1] = 1e-300;
  t.samples[4][2] = -0.1;
  std::stringstream ss;
  write_csv(t, ss);
  const Trajectory back = read_csv(ss);
  EXPECT_EQ(back.samples, t.samples);
  EXPECT_EQ(back.sample_rate, 10.0);

  const auto path = std::filesystem::temp_directory_path() / "trajstyle_csv_test.csv";
  write_csv(t, path);
  EXPECT_EQ(read_csv(path).samples, t.samples);
  std::filesystem::remove(path);
}

TEST(Csv, HeaderAndThreeColumnRows) {
  std::istringstream with_header("t,x,y,z\n0,1,2,3\n0.1,4,5,6\n");
  const Trajectory a = read_csv(with_header);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1], (Vec3{4, 5, 6}));

  std::istringstream bare("1,2,3\n\n4,5,6\n7,8,9\n");
  const Trajectory b = read_csv(bare);
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.sample_rate, 10.0);

  std::istringstream slow("0,0,0,0\n0.5,1,1,1\n1.0,2,2,2\n");
  EXPECT_EQ(read_csv(slow).sample_rate, 2.0);
}

TEST(Csv, ErrorsNameTheLine) {
  std::istringstream two_cols("t,x,y,z\n0,1,2,3\n0.1,4\n");
  try {
    read_csv(two_cols);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream words("1,2,3\n4,five,6\n");
  try {
    read_csv(words);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream one_row("x,y,z\n1,2,3\n");
  EXPECT_THROW(read_csv(one_row), ParseError);
  EXPECT_THROW(read_csv(std::filesystem::path("/nonexistent/none.csv")), Error);
}

}  // namespace
}  // namespace trajstyle::trajectory
