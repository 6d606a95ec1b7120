#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "colorsched/errors.hpp"
#include "colorsched/heuristics.hpp"
#include "colorsched/synthetic.hpp"

using namespace colorsched;

namespace {

std::vector<int> vec(const coloring& c) { return c.color_of_page; }

TEST(FairColoring, GroupsThenWraps) {
  EXPECT_EQ(vec(fair_coloring(4, 2)), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(vec(fair_coloring(3, 1)), (std::vector<int>{0, 0, 0}));
  // group size floor(5/2) = 2; the leftover fifth page wraps to color 0
  EXPECT_EQ(vec(fair_coloring(5, 2)), (std::vector<int>{0, 0, 1, 1, 0}));
}

TEST(FairColoring, UsesExactlyBudgetColors) {
  for (int pages = 1; pages <= 10; ++pages)
    for (int j = 1; j <= pages; ++j) {
      const auto col = fair_coloring(pages, j);
      std::set<int> used(col.color_of_page.begin(), col.color_of_page.end());
      EXPECT_EQ(static_cast<int>(used.size()), j)
          << "pages=" << pages << " j=" << j;
      for (const int c : col.color_of_page) {
        EXPECT_GE(c, 0);
        EXPECT_LT(c, j);
      }
    }
}

TEST(FairColoring, RejectsBudgetOutOfRange) {
  EXPECT_THROW(fair_coloring(4, 0), error);
  EXPECT_THROW(fair_coloring(4, 5), error);
}

TEST(PageScores, WeighsByPowerOfTenOfNesting) {
  EXPECT_EQ(pow10_weight(0), 1u);
  EXPECT_EQ(pow10_weight(2), 100u);
  EXPECT_THROW(pow10_weight(19), error);

  // One 4-instr block two loops deep on page 1, one 1-instr block at top
  // level on page 0, and a 2-instr block one loop deep plus a 3-instr
  // top-level block on page 2: scores 1, 400, 23.
  task_program prog;
  prog.task_id = "scores";
  prog.page_count = 3;
  prog.blocks = {{"entry", 0, 0, 0, 1},
                 {"outer", 2, 1, 1, 2},
                 {"inner", 1, 2, 2, 4},
                 {"tail", 2, 3, 3, 3}};
  prog.edges = {{"entry", "outer"},
                {"outer", "inner"},
                {"inner", "inner"},
                {"inner", "outer"},
                {"outer", "tail"}};
  prog.entry = "entry";
  prog.exit = "tail";
  prog.loops = {{"outer", 2, {{"inner", "outer"}}},
                {"inner", 2, {{"inner", "inner"}}}};
  validate(prog);

  const auto scores = page_scores(prog);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0].score, 1u);    // 1 instr at depth 0
  EXPECT_EQ(scores[1].score, 400u);  // 4 instr at depth 2
  EXPECT_EQ(scores[2].score, 23u);   // 2 instr at depth 1 + 3 at depth 0
}

TEST(FederatedColoring, IsolatesTopScoredPages) {
  std::vector<page_score> scores{{0, 10}, {1, 1000}, {2, 10}, {3, 1}};
  EXPECT_EQ(vec(federated_coloring(scores, 2)),
            (std::vector<int>{1, 0, 1, 1}));
  EXPECT_EQ(vec(federated_coloring(scores, 1)),
            (std::vector<int>{0, 0, 0, 0}));
}

TEST(FederatedColoring, TiesBrokenByPageIndex) {
  std::vector<page_score> scores{{0, 5}, {1, 5}};
  EXPECT_EQ(vec(federated_coloring(scores, 2)), (std::vector<int>{0, 1}));
}

TEST(FederatedColoring, UsesExactlyBudgetColors) {
  std::vector<page_score> scores{{0, 9}, {1, 7}, {2, 8}, {3, 1}, {4, 2}};
  for (int j = 1; j <= 5; ++j) {
    const auto col = federated_coloring(scores, j);
    std::set<int> used(col.color_of_page.begin(), col.color_of_page.end());
    EXPECT_EQ(static_cast<int>(used.size()), j);
  }
}

TEST(FederatedColoring, RejectsBrokenScoreLists) {
  EXPECT_THROW(federated_coloring({{0, 1}, {0, 2}}, 1), error);  // dup page
  EXPECT_THROW(federated_coloring({{0, 1}, {5, 2}}, 1), error);  // gap
}

TEST(RandomColoring, DeterministicAndInRange) {
  EXPECT_EQ(vec(random_coloring(3, 1, 123)), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(vec(random_coloring(10, 4, 42)), vec(random_coloring(10, 4, 42)));
  EXPECT_NE(vec(random_coloring(10, 4, 42)), vec(random_coloring(10, 4, 43)));
  const auto col = random_coloring(100, 4, 42);
  for (const int c : col.color_of_page) {
    EXPECT_GE(c, 0);
    EXPECT_LT(c, 4);
  }
}

TEST(Heuristics, NamesRoundTrip) {
  for (const auto h :
       {heuristic::fair, heuristic::federated, heuristic::random})
    EXPECT_EQ(parse_heuristic(heuristic_name(h)), h);
  EXPECT_THROW(parse_heuristic("greedy"), error);
}

}  // namespace
