#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "doctest.h"
#include "topicfuse/errors.hpp"
#include "topicfuse/evaluation.hpp"
#include "topicfuse/rng.hpp"

using namespace topicfuse;
using boost::multiprecision::cpp_rational;

namespace {

PredictionSet predict_ids(const std::string& doc_id, const std::vector<int>& ids) {
  PredictionSet p;
  p.doc_id = doc_id;
  for (int id : ids) p.topics.emplace_back(topic_names()[static_cast<size_t>(id)], 1.0);
  p.is_emerging = ids.empty();
  return p;
}

// Weighted aggregates recomputed from raw counts in exact rational
// arithmetic; the independent oracle for the floating-point path.
struct RationalAggregates {
  cpp_rational precision{0};
  cpp_rational recall{0};
  cpp_rational f1{0};
};

RationalAggregates rational_weighted(const std::vector<ClassMetrics>& per_class) {
  cpp_rational total{0};
  for (const auto& m : per_class) total += cpp_rational(m.tp + m.fn);
  RationalAggregates agg;
  for (const auto& m : per_class) {
    const cpp_rational support(m.tp + m.fn);
    if (support == 0) continue;
    const cpp_rational w = support / total;
    const cpp_rational p = (m.tp + m.fp) == 0
                               ? cpp_rational(0)
                               : cpp_rational(m.tp) / cpp_rational(m.tp + m.fp);
    const cpp_rational r = support == 0 ? cpp_rational(0) : cpp_rational(m.tp) / support;
    const cpp_rational f = (p + r) == 0 ? cpp_rational(0) : 2 * p * r / (p + r);
    agg.precision += w * p;
    agg.recall += w * r;
    agg.f1 += w * f;
  }
  return agg;
}

double to_double(const cpp_rational& q) { return static_cast<double>(q); }

}  // namespace

TEST_CASE("perfect predictions score one on every supported class") {
  std::vector<PredictionSet> preds;
  std::vector<std::vector<int>> gold;
  preds.push_back(predict_ids("a", {0, 3}));
  gold.push_back({0, 3});
  preds.push_back(predict_ids("b", {5}));
  gold.push_back({5});
  preds.push_back(predict_ids("c", {0}));
  gold.push_back({0});

  for (int c : {0, 3, 5}) {
    const ClassMetrics m = per_class_counts(preds, gold, c);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.support == m.tp);
  }
  const ClassMetrics unsupported = per_class_counts(preds, gold, 7);
  CHECK(unsupported.support == 0);
  CHECK(unsupported.f1 == 0.0);
}

TEST_CASE("a class never predicted keeps zero f1 and full false negatives") {
  std::vector<PredictionSet> preds;
  std::vector<std::vector<int>> gold;
  for (int i = 0; i < 4; ++i) {
    preds.push_back(predict_ids("d" + std::to_string(i), {1}));
    gold.push_back({9});
  }
  const ClassMetrics m = per_class_counts(preds, gold, 9);
  CHECK(m.tp == 0);
  CHECK(m.fn == 4);
  CHECK(m.support == 4);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("confusion counts reproduce the hand-evaluated harmonic mean") {
  // Class 2: two true positives, one false positive, two false negatives.
  std::vector<PredictionSet> preds;
  std::vector<std::vector<int>> gold;
  preds.push_back(predict_ids("1", {2}));
  gold.push_back({2});
  preds.push_back(predict_ids("2", {2}));
  gold.push_back({2});
  preds.push_back(predict_ids("3", {2}));
  gold.push_back({4});
  preds.push_back(predict_ids("4", {}));
  gold.push_back({2});
  preds.push_back(predict_ids("5", {4}));
  gold.push_back({2});

  const ClassMetrics m = per_class_counts(preds, gold, 2);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 2);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("emerging predictions contribute no positives to any class") {
  std::vector<PredictionSet> preds;
  std::vector<std::vector<int>> gold;
  PredictionSet emerging;
  emerging.doc_id = "e";
  emerging.is_emerging = true;
  preds.push_back(emerging);
  gold.push_back({3});

  const ClassMetrics m = per_class_counts(preds, gold, 3);
  CHECK(m.tp == 0);
  CHECK(m.fn == 1);
  for (int c = 0; c < kTopicCount; ++c) {
    const ClassMetrics any = per_class_counts(preds, gold, c);
    CHECK(any.fp == 0);
    CHECK(any.tp == 0);
  }
}

TEST_CASE("misaligned prediction and gold lists are rejected") {
  std::vector<PredictionSet> preds(2);
  std::vector<std::vector<int>> gold(3);
  CHECK_THROWS_AS(per_class_counts(preds, gold, 0), Error);
  try {
    per_class_counts(preds, gold, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("support weighting reproduces the worked aggregate") {
  std::vector<ClassMetrics> per_class;
  per_class.push_back(metrics_from_counts(0, 3, 0, 0));  // f1 = 1.0, support 3
  per_class.push_back(metrics_from_counts(1, 1, 2, 0));  // p = 1/3, r = 1, f1 = 0.5, support 1
  REQUIRE(per_class[0].f1 == 1.0);
  REQUIRE(per_class[1].f1 == doctest::Approx(0.5).epsilon(1e-12));

  const Aggregates agg = weighted_metrics(per_class);
  CHECK(agg.f1 == doctest::Approx(0.875).epsilon(1e-12));
}

TEST_CASE("uniform class scores pass through the weighting unchanged") {
  std::vector<ClassMetrics> per_class;
  per_class.push_back(metrics_from_counts(0, 2, 2, 2));  // p=r=f1=0.5
  per_class.push_back(metrics_from_counts(1, 5, 5, 5));
  per_class.push_back(metrics_from_counts(2, 1, 1, 1));
  const Aggregates agg = weighted_metrics(per_class);
  CHECK(agg.f1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(agg.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(agg.recall == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a single supported class passes its own scores through") {
  std::vector<ClassMetrics> per_class;
  per_class.push_back(metrics_from_counts(0, 0, 3, 0));  // support 0, ignored
  per_class.push_back(metrics_from_counts(1, 2, 1, 2));
  const Aggregates agg = weighted_metrics(per_class);
  CHECK(agg.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(agg.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("weighting with no supported class at all is an error") {
  std::vector<ClassMetrics> per_class;
  per_class.push_back(metrics_from_counts(0, 0, 5, 0));
  try {
    weighted_metrics(per_class);
    FAIL("expected zero total support");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroTotalSupport);
  }
}

TEST_CASE("relative improvements reproduce the published deltas") {
  // score pairs and the published percentage, tolerance half of the last
  // printed digit (inputs are two-decimal roundings).
  struct Row {
    double from, to, published_pct;
  };
  const Row rows[] = {
      {0.53, 0.64, 20.75},  // weighted F1, attention-only baseline to full model
      {0.58, 0.64, 10.34},  // weighted F1, rules baseline to full model
      {0.49, 0.55, 12.24},  // precision, linear fusion to attention fusion
      {0.59, 0.64, 8.47},   // weighted F1, linear fusion to attention fusion
      {0.81, 0.83, 2.47},   // recall, linear fusion to attention fusion
  };
  for (const Row& row : rows) {
    const double pct = relative_improvement(row.from, row.to) * 100.0;
    CHECK(std::fabs(pct - row.published_pct) < 0.005);
  }
}

TEST_CASE("relative improvement is signed and exactly zero on equal scores") {
  CHECK(relative_improvement(0.5, 0.5) == 0.0);
  CHECK(relative_improvement(0.5, 0.6) > 0.0);
  CHECK(relative_improvement(0.6, 0.5) < 0.0);
  CHECK(relative_improvement(0.5, 0.6) ==
        doctest::Approx(-relative_improvement(0.5, 0.4)).epsilon(1e-12));
  try {
    relative_improvement(0.0, 0.5);
    FAIL("expected division by zero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionByZero);
  }
}

TEST_CASE("weighted aggregates match the exact rational oracle on random configurations") {
  Rng rng(20260818);
  for (int config = 0; config < 1000; ++config) {
    std::vector<ClassMetrics> per_class;
    bool any_support = false;
    for (int c = 0; c < kTopicCount; ++c) {
      const long tp = static_cast<long>(rng.below(50));
      const long fp = static_cast<long>(rng.below(50));
      const long fn = static_cast<long>(rng.below(50));
      any_support = any_support || (tp + fn) > 0;
      per_class.push_back(metrics_from_counts(c, tp, fp, fn));
    }
    if (!any_support) {
      per_class[0] = metrics_from_counts(0, 1, 0, 0);
    }

    const Aggregates agg = weighted_metrics(per_class);
    const RationalAggregates oracle = rational_weighted(per_class);
    CHECK(std::fabs(agg.precision - to_double(oracle.precision)) < 1e-9);
    CHECK(std::fabs(agg.recall - to_double(oracle.recall)) < 1e-9);
    CHECK(std::fabs(agg.f1 - to_double(oracle.f1)) < 1e-9);
  }
}

TEST_CASE("class order cannot change the weighted aggregates") {
  Rng rng(4242);
  for (int round = 0; round < 200; ++round) {
    std::vector<ClassMetrics> per_class;
    for (int c = 0; c < kTopicCount; ++c) {
      per_class.push_back(metrics_from_counts(c, static_cast<long>(rng.below(20)),
                                              static_cast<long>(rng.below(20)),
                                              static_cast<long>(rng.below(20))));
    }
    per_class[3] = metrics_from_counts(3, 2, 1, 1);  // guarantees support

    const Aggregates before = weighted_metrics(per_class);
    std::vector<ClassMetrics> shuffled = per_class;
    rng.shuffle(shuffled);
    const Aggregates after = weighted_metrics(shuffled);
    CHECK(before.f1 == doctest::Approx(after.f1).epsilon(1e-12));
    CHECK(before.precision == doctest::Approx(after.precision).epsilon(1e-12));
    CHECK(before.recall == doctest::Approx(after.recall).epsilon(1e-12));
  }
}

TEST_CASE("the weighted f1 lies within the span of supported class scores") {
  Rng rng(909);
  for (int round = 0; round < 500; ++round) {
    std::vector<ClassMetrics> per_class;
    double lo = 1.0, hi = 0.0;
    bool any = false;
    for (int c = 0; c < kTopicCount; ++c) {
      const ClassMetrics m = metrics_from_counts(c, static_cast<long>(rng.below(10)),
                                                 static_cast<long>(rng.below(10)),
                                                 static_cast<long>(rng.below(10)));
      if (m.support > 0) {
        lo = std::min(lo, m.f1);
        hi = std::max(hi, m.f1);
        any = true;
      }
      per_class.push_back(m);
    }
    if (!any) continue;
    const Aggregates agg = weighted_metrics(per_class);
    CHECK(agg.f1 >= lo - 1e-12);
    CHECK(agg.f1 <= hi + 1e-12);
  }
}

TEST_CASE("full evaluation carries counts, rates, and identities") {
  std::vector<PredictionSet> preds;
  std::vector<std::vector<int>> gold;
  preds.push_back(predict_ids("b", {0}));
  gold.push_back({0});
  preds.push_back(predict_ids("a", {}));
  gold.push_back({3});
  preds.push_back(predict_ids("c", {5, 7}));
  gold.push_back({5});

  const EvalReport report = evaluate_predictions(5, 0.5, preds, gold);
  CHECK(report.variant == 5);
  CHECK(report.n == 3);
  CHECK(report.per_class.size() == static_cast<size_t>(kTopicCount));
  CHECK(report.emerging_rate == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const std::vector<std::string> expected_ids = {"a", "b", "c"};
  CHECK(report.doc_ids == expected_ids);

  const nlohmann::json j = report_to_json(report);
  CHECK(j["variant"] == 5);
  CHECK(j["n"] == 3);
  CHECK(j["per_class"].size() == 27);
  CHECK(j["weighted"].contains("f1"));
  CHECK(j["micro"].contains("precision"));
  CHECK(j.contains("emerging_rate"));
}

TEST_CASE("micro metrics pool counts before the ratios") {
  std::vector<ClassMetrics> per_class;
  per_class.push_back(metrics_from_counts(0, 2, 1, 0));
  per_class.push_back(metrics_from_counts(1, 0, 1, 2));
  const Aggregates micro = micro_metrics(per_class);
  CHECK(micro.precision == doctest::Approx(2.0 / 4.0).epsilon(1e-12));
  CHECK(micro.recall == doctest::Approx(2.0 / 4.0).epsilon(1e-12));
  CHECK(micro.f1 == doctest::Approx(0.5).epsilon(1e-12));
}

namespace {

EvalReport synthetic_report(int variant, double p, double r, double f1,
                            std::vector<std::string> ids) {
  EvalReport report;
  report.variant = variant;
  report.weighted.precision = p;
  report.weighted.recall = r;
  report.weighted.f1 = f1;
  report.doc_ids = std::move(ids);
  return report;
}

}  // namespace

TEST_CASE("the comparison report reproduces the published pairwise improvements") {
  std::map<int, EvalReport> results;
  results[4] = synthetic_report(4, 0.49, 0.81, 0.59, {"x", "y"});
  results[5] = synthetic_report(5, 0.55, 0.83, 0.64, {"x", "y"});

  const nlohmann::json j = comparison_report_json(results);
  REQUIRE(j["rows"].size() == 2);
  bool found = false;
  for (const auto& entry : j["improvements"]) {
    if (entry["from"] == 4 && entry["to"] == 5) {
      found = true;
      CHECK(std::fabs(entry["precision"].get<double>() * 100.0 - 12.24) < 0.005);
      CHECK(std::fabs(entry["recall"].get<double>() * 100.0 - 2.47) < 0.005);
      CHECK(std::fabs(entry["f1"].get<double>() * 100.0 - 8.47) < 0.005);
    }
  }
  CHECK(found);

  const std::string text = comparison_report_text(results);
  CHECK(text.find("variant") != std::string::npos);
  CHECK(text.find("relative improvement of variant 5") != std::string::npos);
  CHECK(text.find("+12.24%") != std::string::npos);
  CHECK(text.find("+8.47%") != std::string::npos);
  CHECK(text.find("+2.47%") != std::string::npos);
}

TEST_CASE("a single-variant comparison renders one row and no improvement block") {
  std::map<int, EvalReport> results;
  results[2] = synthetic_report(2, 0.44, 0.79, 0.53, {"x"});
  const nlohmann::json j = comparison_report_json(results);
  CHECK(j["rows"].size() == 1);
  CHECK(j["improvements"].empty());
  const std::string text = comparison_report_text(results);
  CHECK(text.find("relative improvement") == std::string::npos);
}

TEST_CASE("comparing reports from different test sets is rejected") {
  std::map<int, EvalReport> results;
  results[1] = synthetic_report(1, 0.7, 0.5, 0.58, {"x", "y"});
  results[5] = synthetic_report(5, 0.5, 0.8, 0.64, {"x", "z"});
  try {
    comparison_report_json(results);
    FAIL("expected inconsistent test sets");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentTestSets);
  }
  try {
    comparison_report_text(results);
    FAIL("expected inconsistent test sets");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentTestSets);
  }
}
