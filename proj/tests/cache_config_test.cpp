#include <gtest/gtest.h>

#include "colorsched/cache_config.hpp"
#include "colorsched/errors.hpp"

using namespace colorsched;

namespace {

cache_config make_cache(int ways, int pages) {
  cache_config c;
  c.ways = ways;
  c.cache_pages = pages;
  return c;
}

TEST(CacheConfig, NumColors) {
  EXPECT_EQ(num_colors(make_cache(2, 32)), 16);
  EXPECT_EQ(num_colors(make_cache(1, 1)), 1);
  EXPECT_EQ(num_colors(make_cache(4, 32)), 8);
}

TEST(CacheConfig, ValidateRejectsBadGeometry) {
  EXPECT_THROW(validate(make_cache(3, 32)), error);  // not divisible
  EXPECT_THROW(validate(make_cache(0, 32)), error);
  EXPECT_THROW(validate(make_cache(2, 0)), error);
  cache_config negative_penalty;
  negative_penalty.miss_penalty = -1;
  EXPECT_THROW(validate(negative_penalty), error);
  EXPECT_NO_THROW(validate(cache_config{}));
}

TEST(CacheConfig, PageColorIsIndexModuloColors) {
  const auto cache = make_cache(2, 32);  // 16 colors
  EXPECT_EQ(page_color(17, cache), 1);
  EXPECT_EQ(page_color(0, cache), 0);
  EXPECT_EQ(page_color(31, cache), 15);
}

TEST(CacheConfig, PageColorPeriodicInColorCount) {
  const auto cache = make_cache(2, 32);
  const int k = num_colors(cache);
  for (int p = 0; p < 100; ++p)
    EXPECT_EQ(page_color(p + k, cache), page_color(p, cache));
}

TEST(SMax, TakesMinOfPagesAndReserve) {
  const auto cache = make_cache(2, 32);
  EXPECT_EQ(s_max(8, cache, 8), 8);    // 8 <= 32 - 7
  EXPECT_EQ(s_max(2, cache, 8), 2);    // small task keeps its page count
  EXPECT_EQ(s_max(40, cache, 8), 25);  // 32 - 7, beyond the 16 colors
}

TEST(SMax, ErrorsWhenTasksOutnumberCachePages) {
  const auto cache = make_cache(2, 32);
  EXPECT_THROW(s_max(4, cache, 33), error);  // reserve would be 0
  EXPECT_EQ(s_max(4, cache, 32), 1);         // reserve exactly 1
}

TEST(SMax, NeverExceedsPageCount) {
  const auto cache = make_cache(2, 32);
  for (int pages = 1; pages <= 40; ++pages)
    for (int n = 1; n <= 16; ++n) {
      const int v = s_max(pages, cache, n);
      EXPECT_GE(v, 1);
      EXPECT_LE(v, pages);
      EXPECT_LE(v, cache.cache_pages);
    }
}

}  // namespace
