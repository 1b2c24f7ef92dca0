#include <gtest/gtest.h>

#include <cmath>

#include "tml/error.hpp"
#include "tml/geometry.hpp"
#include "tml/kv_config.hpp"
#include "tml/random.hpp"

using namespace tml;

TEST(Geometry, DistanceToSegmentCases) {
  EXPECT_DOUBLE_EQ(distance_to_segment({0, 1}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(distance_to_segment({3, 4}, {0, 0}, {0, 0}), 5.0);
  EXPECT_DOUBLE_EQ(distance_to_segment({5, 0}, {0, 0}, {2, 0}), 3.0);
  EXPECT_DOUBLE_EQ(distance_to_segment({-3, 4}, {0, 0}, {2, 0}), 5.0);
}

TEST(Geometry, RotateQuarterTurn) {
  const Vec2 r = rotate({1, 0}, M_PI / 2);
  EXPECT_NEAR(r.x, 0.0, 1e-15);
  EXPECT_NEAR(r.y, 1.0, 1e-15);
}

TEST(Random, SameSeedSameStream) {
  Rng a(42, 3, 7), b(42, 3, 7), c(42, 3, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Random, IndexStaysInRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.index(7), 7u);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Random, NormalMoments) {
  Rng r(9);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(s2 / n, 1.0, 0.04);
}

TEST(KeyValueConfig, ParsesScalarsListsAndComments) {
  const auto c = KeyValueConfig::parse(
      "# comment\n"
      "name = \"demo\"\n"
      "alpha = 0.25   # trailing\n"
      "count = -3\n"
      "flag = yes\n"
      "joints = [a, \"b\", c]\n"
      "limbs = [[0,1],[1,2]]\n");
  EXPECT_EQ(c.get_string("name"), "demo");
  EXPECT_DOUBLE_EQ(c.get_double("alpha"), 0.25);
  EXPECT_EQ(c.get_int("count"), -3);
  EXPECT_TRUE(c.get_bool("flag"));
  EXPECT_EQ(c.get_string_list("joints"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(c.get_int_matrix("limbs"), (std::vector<std::vector<std::int64_t>>{{0, 1}, {1, 2}}));
}

TEST(KeyValueConfig, RejectsMalformedInput) {
  EXPECT_THROW(KeyValueConfig::parse("novalue\n"), Error);
  EXPECT_THROW(KeyValueConfig::parse("x = 1.5abc\n").get_double("x"), Error);
  EXPECT_THROW(KeyValueConfig::parse("x = 1\n").get_double("y"), Error);
  EXPECT_THROW(KeyValueConfig::parse("b = maybe\n").get_bool("b"), Error);
  try {
    KeyValueConfig::load("/nonexistent/file.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}
