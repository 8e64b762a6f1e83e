#include "dpinfer/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dpinfer/csv.hpp"
#include "dpinfer/rng.hpp"

namespace dpinfer {
namespace {

TEST(Aggregate, CountsInFirstAppearanceOrder) {
  const std::vector<UnitRecord> recs{{"A", 1}, {"A", 0}, {"B", 1}};
  const auto c = aggregate(recs);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.groups()[0].label, "A");
  EXPECT_EQ(c.groups()[0].successes, 1u);
  EXPECT_EQ(c.groups()[0].trials, 2u);
  EXPECT_EQ(c.groups()[1].label, "B");
  EXPECT_EQ(c.groups()[1].successes, 1u);
  EXPECT_EQ(c.groups()[1].trials, 1u);
  EXPECT_EQ(c.total_n(), 3u);
}

TEST(Aggregate, SingleRecord) {
  const std::vector<UnitRecord> recs{{"A", 1}};
  const auto c = aggregate(recs);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.groups()[0].successes, 1u);
  EXPECT_EQ(c.total_n(), 1u);
}

TEST(Aggregate, MatchesIndependentTally) {
  std::mt19937_64 rng(8);
  const std::vector<std::string> labels{"x", "y", "z", "w"};
  std::vector<UnitRecord> recs;
  std::map<std::string, std::pair<int, int>> tally;
  for (int i = 0; i < 1000; ++i) {
    const auto& label = labels[rng() % labels.size()];
    const int y = static_cast<int>(rng() % 2);
    recs.push_back({label, y});
    tally[label].first += y;
    tally[label].second += 1;
  }
  const auto c = aggregate(recs);
  EXPECT_EQ(c.total_n(), 1000u);
  for (const auto& g : c.groups()) {
    EXPECT_EQ(g.successes, static_cast<std::uint64_t>(tally[g.label].first));
    EXPECT_EQ(g.trials, static_cast<std::uint64_t>(tally[g.label].second));
  }
  // Counts do not depend on record order.
  std::reverse(recs.begin(), recs.end());
  const auto r = aggregate(recs);
  for (const auto& g : r.groups()) {
    EXPECT_EQ(g.successes, static_cast<std::uint64_t>(tally[g.label].first));
  }
}

TEST(Aggregate, RejectsBadInput) {
  EXPECT_THROW(aggregate(std::vector<UnitRecord>{}), Error);
  EXPECT_THROW(aggregate(std::vector<UnitRecord>{{"A", 2}}), Error);
  EXPECT_THROW(aggregate(std::vector<UnitRecord>{{"", 1}}), Error);
}

TEST(GroupedCounts, Invariants) {
  EXPECT_THROW(GroupedCounts({{"A", 1, 0}}), Error);
  EXPECT_THROW(GroupedCounts({{"A", 3, 2}}), Error);
  EXPECT_THROW(GroupedCounts({{"A", 1, 2}, {"A", 1, 2}}), Error);
  EXPECT_THROW(GroupedCounts(std::vector<GroupCount>{}), Error);
  EXPECT_EQ(GroupedCounts({{"A", 1, 2}, {"B", 0, 5}}).total_n(), 7u);
}

TEST(EstimateMeans, PlugInFormula) {
  const auto m = estimate_means(GroupedCounts({{"A", 10, 100}, {"B", 5, 100}}));
  EXPECT_DOUBLE_EQ(m.s_hat[0], 0.10);
  EXPECT_DOUBLE_EQ(m.s_hat[1], 0.05);
  EXPECT_DOUBLE_EQ(m.p_hat[0], 0.5);
  EXPECT_DOUBLE_EQ(m.p_hat[1], 0.5);
  EXPECT_NEAR(m.sigma2[0], 0.18, 1e-15);
  EXPECT_NEAR(m.sigma2[1], 0.095, 1e-15);
  EXPECT_EQ(m.n, 200u);
  EXPECT_TRUE(m.diagnostics.empty());
}

TEST(EstimateMeans, DegenerateRatesWarn) {
  const auto m = estimate_means(GroupedCounts({{"A", 0, 50}, {"B", 25, 50}}));
  EXPECT_EQ(m.sigma2[0], 0.0);
  ASSERT_EQ(m.diagnostics.size(), 1u);
  EXPECT_EQ(m.diagnostics[0].code, "degenerate_variance");
  EXPECT_NE(m.diagnostics[0].message.find("'A'"), std::string::npos);

  const auto one = estimate_means(GroupedCounts({{"A", 40, 40}}));
  EXPECT_EQ(one.s_hat[0], 1.0);
  EXPECT_TRUE(has_diagnostic(one.diagnostics, "degenerate_variance"));
}

TEST(EstimateMeans, ContinuityCorrectionOnlyTouchesVariance) {
  const auto m = estimate_means(GroupedCounts({{"A", 0, 50}, {"B", 25, 50}}), {true});
  EXPECT_EQ(m.s_hat[0], 0.0);
  const double s = 0.5 / 51.0;
  EXPECT_NEAR(m.sigma2[0], s * (1.0 - s) / 0.5, 1e-15);
}

TEST(EstimateMeans, SharesSumToOne) {
  const auto m = estimate_means(GroupedCounts({{"A", 1, 3}, {"B", 2, 7}, {"C", 5, 11}}));
  double total = 0.0;
  for (double p : m.p_hat) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

// sqrt(N) (s_hat - s) should have variance s(1-s)/p under the sampling model.
TEST(EstimateMeans, MonteCarloVarianceMatchesPlugInFormula) {
  const std::vector<double> s{0.10, 0.30};
  const std::vector<double> p{0.4, 0.6};
  const std::uint64_t n = 4000;
  const int reps = 20000;
  std::vector<std::vector<double>> z(2);
  for (int r = 0; r < reps; ++r) {
    auto rng = make_stream(77, static_cast<std::uint64_t>(r));
    std::binomial_distribution<std::uint64_t> first(n, p[0]);
    const std::uint64_t n0 = first(rng);
    const std::uint64_t sizes[2] = {n0, n - n0};
    for (int g = 0; g < 2; ++g) {
      std::binomial_distribution<std::uint64_t> b(sizes[g], s[g]);
      const double rate = static_cast<double>(b(rng)) / static_cast<double>(sizes[g]);
      z[g].push_back(std::sqrt(static_cast<double>(n)) * (rate - s[g]));
    }
  }
  for (int g = 0; g < 2; ++g) {
    double mean = 0.0;
    for (double v : z[g]) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : z[g]) var += (v - mean) * (v - mean);
    var /= (reps - 1);
    const double expected = s[g] * (1.0 - s[g]) / p[g];
    EXPECT_NEAR(var / expected, 1.0, 0.05) << "group " << g;
  }
}

TEST(Csv, ReadsUnitLevel) {
  std::istringstream in("group,outcome\nA,1\nA,0\r\nB,1\n\n");
  const auto recs = csv::read_units(in);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[1].group, "A");
  EXPECT_EQ(recs[1].outcome, 0);
}

TEST(Csv, ReadsAggregate) {
  std::istringstream in("\xEF\xBB\xBFgroup,successes,trials\nA,10,100\nB,5,100\n");
  const auto c = csv::read_aggregate(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.groups()[1].successes, 5u);
  EXPECT_EQ(c.total_n(), 200u);
}

TEST(Csv, ReadsCensored) {
  std::istringstream in("group,applications,hired\nA,3,1\nB,1,0\n");
  const auto recs = csv::read_censored(in);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].applications, 3u);
  EXPECT_EQ(recs[0].hired, 1);
}

std::string error_of(const std::string& text, int which) {
  std::istringstream in(text);
  try {
    if (which == 0) csv::read_units(in);
    if (which == 1) csv::read_aggregate(in);
    if (which == 2) csv::read_censored(in);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
    return e.what();
  }
  return {};
}

TEST(Csv, ErrorsNameTheRow) {
  EXPECT_NE(error_of("", 0).find("empty"), std::string::npos);
  EXPECT_NE(error_of("group,outcome\n", 0).find("no data rows"), std::string::npos);
  EXPECT_NE(error_of("group,outcome\nA,1\nA,2\n", 0).find("line 3"), std::string::npos);
  EXPECT_NE(error_of("group,outcome\nA,B,1\n", 0).find("commas"), std::string::npos);
  EXPECT_NE(error_of("group,outcome\n\"A,B\",1\n", 0).find("line 2"), std::string::npos);
  EXPECT_NE(error_of("grp,outcome\nA,1\n", 0).find("header"), std::string::npos);
  EXPECT_NE(error_of("group,successes,trials\nA,1,0\n", 1).find("zero trials"), std::string::npos);
  EXPECT_NE(error_of("group,successes,trials\nA,3,2\n", 1).find("line 2"), std::string::npos);
  EXPECT_NE(error_of("group,successes,trials\nA,-1,2\n", 1).find("successes"), std::string::npos);
  EXPECT_NE(error_of("group,applications,hired\nA,0,1\n", 2).find("at least 1"), std::string::npos);
  EXPECT_NE(error_of("group,applications,hired\nA,2,3\n", 2).find("hired"), std::string::npos);
}

TEST(Csv, DetectsLayoutFromHeader) {
  EXPECT_EQ(csv::detect_layout(csv::peek_header("group,outcome\nA,1\n")), csv::Layout::unit);
  EXPECT_EQ(csv::detect_layout(csv::peek_header("\n group, successes, trials\n")),
            csv::Layout::aggregate);
  EXPECT_EQ(csv::detect_layout(csv::peek_header("group,applications,hired\n")),
            csv::Layout::censored);
  EXPECT_FALSE(csv::detect_layout(csv::peek_header("a,b\n")).has_value());
}

}  // namespace
}  // namespace dpinfer
