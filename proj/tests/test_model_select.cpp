#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "vrtc/errors.hpp"
#include "vrtc/model_select.hpp"
#include "vrtc/rng.hpp"

using namespace vrtc;

namespace {

// Class 0 in [0,1), class 1 in [2,3) on the informative columns; the rest
// is shared noise in [0,3).
void labeled_blobs(int n_per_class, int d, int informative, uint64_t seed, Matrix& x,
                   std::vector<int>& y) {
  Rng rng(seed);
  x.clear();
  y.clear();
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      std::vector<double> row(d);
      for (int j = 0; j < d; ++j)
        row[j] = j < informative ? rng.next_uniform(2.0 * c, 2.0 * c + 1.0)
                                 : rng.next_uniform(0.0, 3.0);
      x.push_back(std::move(row));
      y.push_back(c);
    }
  }
}

std::vector<double> sorted_rowsums(const Matrix& a, const Matrix& b) {
  std::vector<double> s;
  for (const Matrix* m : {&a, &b})
    for (const auto& row : *m) {
      double t = 0;
      for (double v : row) t += v;
      s.push_back(t);
    }
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

TEST_CASE("confusion metrics match the hand-computed table") {
  EvalReport r = metrics_from_confusion({390, 2, 4, 399});
  CHECK(r.total == 795);
  CHECK(r.accuracy == doctest::Approx(789.0 / 795.0).epsilon(1e-12));
  CHECK(r.vr.precision == doctest::Approx(399.0 / 401.0).epsilon(1e-12));
  CHECK(r.vr.recall == doctest::Approx(399.0 / 403.0).epsilon(1e-12));
  CHECK(r.vr.support == 403);
  CHECK(r.nonvr.precision == doctest::Approx(390.0 / 394.0).epsilon(1e-12));
  CHECK(r.nonvr.recall == doctest::Approx(390.0 / 392.0).epsilon(1e-12));
  CHECK(r.nonvr.support == 392);
  for (const ClassMetrics* m : {&r.vr, &r.nonvr}) {
    const double f1 = 2.0 * m->precision * m->recall / (m->precision + m->recall);
    CHECK(m->f1 == doctest::Approx(f1).epsilon(1e-12));
  }
}

TEST_CASE("confusion metrics define 0/0 as zero") {
  EvalReport r = metrics_from_confusion({0, 0, 5, 0});  // nothing predicted positive
  CHECK(r.vr.precision == 0.0);
  CHECK(r.vr.recall == 0.0);
  CHECK(r.vr.f1 == 0.0);
  CHECK(r.accuracy == 0.0);
  EvalReport empty = metrics_from_confusion({0, 0, 0, 0});
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.total == 0);
}

TEST_CASE("stratified split keeps class shares and every row") {
  Matrix x;
  std::vector<int> y;
  labeled_blobs(100, 3, 3, 5, x, y);
  SplitResult s = stratified_split(x, y, 0.7, 1);
  CHECK(s.train_x.size() == 140);
  CHECK(s.val_x.size() == 60);
  for (int c = 0; c < 2; ++c) {
    CHECK(std::count(s.train_y.begin(), s.train_y.end(), c) == 70);
    CHECK(std::count(s.val_y.begin(), s.val_y.end(), c) == 30);
  }
  CHECK(sorted_rowsums(s.train_x, s.val_x) == sorted_rowsums(x, {}));

  SplitResult again = stratified_split(x, y, 0.7, 1);
  CHECK(again.train_x == s.train_x);
  CHECK(again.val_y == s.val_y);
  SplitResult other = stratified_split(x, y, 0.7, 2);
  CHECK(other.train_x != s.train_x);

  std::vector<int> lone = y;
  for (auto& v : lone) v = 1;
  lone[0] = 0;  // class 0 has a single row
  CHECK_THROWS_AS((void)stratified_split(x, lone, 0.7, 1), ContractError);
  CHECK_THROWS_AS((void)stratified_split(x, y, 0.0, 1), ContractError);
  CHECK_THROWS_AS((void)stratified_split(x, y, 1.0, 1), ContractError);
}

TEST_CASE("stratified split per-class counts round to the requested share") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n0 = 5 + static_cast<int>(rng.next_below(36));
    const int n1 = 5 + static_cast<int>(rng.next_below(36));
    const double frac = 0.5 + 0.1 * static_cast<double>(rng.next_below(4));
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < n0 + n1; ++i) {
      x.push_back({rng.next_unit()});
      y.push_back(i < n0 ? 0 : 1);
    }
    SplitResult s = stratified_split(x, y, frac, trial);
    for (int c = 0; c < 2; ++c) {
      const int n = c == 0 ? n0 : n1;
      auto want = static_cast<int64_t>(std::llround(frac * n));
      want = std::clamp<int64_t>(want, 1, n - 1);
      CHECK(std::count(s.train_y.begin(), s.train_y.end(), c) == want);
      CHECK(std::count(s.val_y.begin(), s.val_y.end(), c) == n - want);
    }
  }
}

TEST_CASE("kfold indices partition rows with balanced sizes") {
  auto f9 = kfold_indices(9, 3, 1);
  REQUIRE(f9.size() == 3);
  for (const auto& f : f9) CHECK(f.size() == 3);

  auto f10 = kfold_indices(10, 3, 1);
  CHECK(f10[0].size() == 4);
  CHECK(f10[1].size() == 3);
  CHECK(f10[2].size() == 3);

  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t n = 6 + rng.next_below(60);
    const int k = 2 + static_cast<int>(rng.next_below(4));
    auto folds = kfold_indices(n, k, trial);
    std::set<size_t> seen;
    for (const auto& f : folds) {
      CHECK((f.size() == n / k || f.size() == n / k + 1));
      seen.insert(f.begin(), f.end());
    }
    CHECK(seen.size() == n);
    CHECK(*seen.rbegin() == n - 1);
  }

  CHECK_THROWS_AS((void)kfold_indices(5, 1, 0), ContractError);
  CHECK_THROWS_AS((void)kfold_indices(2, 3, 0), ContractError);
}

TEST_CASE("stratified kfold balances classes inside each fold") {
  std::vector<int> y(15);
  for (size_t i = 0; i < y.size(); ++i) y[i] = i < 6 ? 0 : 1;
  auto folds = stratified_kfold(y, 3, 4);
  REQUIRE(folds.size() == 3);
  std::set<size_t> seen;
  for (const auto& f : folds) {
    int c0 = 0, c1 = 0;
    for (size_t i : f) (y[i] == 0 ? c0 : c1)++;
    CHECK(c0 == 2);
    CHECK(c1 == 3);
    seen.insert(f.begin(), f.end());
  }
  CHECK(seen.size() == y.size());

  std::vector<int> tiny = {0, 0, 1, 1, 1};
  CHECK_THROWS_AS((void)stratified_kfold(tiny, 3, 0), ContractError);
}

TEST_CASE("default grids enumerate the documented candidate counts") {
  CHECK(default_grid(Family::Lr).candidates.size() == 4);
  CHECK(default_grid(Family::Knn).candidates.size() == 4);
  CHECK(default_grid(Family::Dt).candidates.size() == 4);
  CHECK(default_grid(Family::Rf).candidates.size() == 12);

  GridSpec nb = default_grid(Family::Nb);
  REQUIRE(nb.candidates.size() == 100);
  CHECK(nb.candidates.front().var_smoothing == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nb.candidates.back().var_smoothing == doctest::Approx(1e-9).epsilon(1e-12));
  for (size_t i = 1; i < nb.candidates.size(); ++i)
    CHECK(nb.candidates[i].var_smoothing < nb.candidates[i - 1].var_smoothing);

  for (Family f : {Family::Lr, Family::Knn, Family::Dt, Family::Rf, Family::Nb})
    CHECK(default_grid(f).cv_folds == 3);
}

TEST_CASE("grid search picks the candidate that can actually split") {
  Matrix x;
  std::vector<int> y;
  labeled_blobs(30, 2, 2, 7, x, y);

  GridSpec spec;
  spec.family = Family::Dt;
  HyperParams stunted;
  stunted.family = Family::Dt;
  stunted.min_samples_split = 1000;  // root can never split: majority stump
  HyperParams healthy;
  healthy.family = Family::Dt;
  healthy.min_samples_split = 2;
  healthy.max_depth = 5;
  spec.candidates = {stunted, healthy};

  GridSearchResult r = grid_search(x, y, spec, 3);
  CHECK(r.best_index == 1);
  CHECK(r.best_score > 0.9);
  REQUIRE(r.table.size() == 2);
  CHECK(r.table[0].mean_score < 0.7);
  for (const CvRow& row : r.table) {
    REQUIRE(row.fold_scores.size() == 3);
    double m = 0;
    for (double s : row.fold_scores) m += s;
    m /= 3.0;
    CHECK(row.mean_score == doctest::Approx(m).epsilon(1e-12));
    CHECK(r.best_score >= row.mean_score);
  }

  // refit model predicts the training set well
  CHECK(accuracy_score(r.model, x, y) > 0.95);

  // equal candidates: strict improvement keeps the first
  spec.candidates = {healthy, healthy};
  CHECK(grid_search(x, y, spec, 3).best_index == 0);

  spec.candidates.clear();
  CHECK_THROWS_AS((void)grid_search(x, y, spec, 3), ContractError);
}

TEST_CASE("grid search is deterministic in its seed") {
  Matrix x;
  std::vector<int> y;
  labeled_blobs(25, 3, 1, 13, x, y);
  GridSpec spec = default_grid(Family::Dt);
  GridSearchResult a = grid_search(x, y, spec, 5);
  GridSearchResult b = grid_search(x, y, spec, 5);
  CHECK(a.best_index == b.best_index);
  REQUIRE(a.table.size() == b.table.size());
  for (size_t i = 0; i < a.table.size(); ++i)
    CHECK(a.table[i].fold_scores == b.table[i].fold_scores);
}

TEST_CASE("permutation importance flags the label leak and clears the noise") {
  Matrix x;
  std::vector<int> y;
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const int label = static_cast<int>(rng.next_below(2));
    std::vector<double> row(5);
    row[0] = label;  // leaked label
    for (int j = 1; j < 5; ++j) row[j] = rng.next_unit();
    x.push_back(std::move(row));
    y.push_back(label);
  }
  HyperParams p;
  p.family = Family::Dt;
  p.min_samples_split = 2;
  TrainedModel m = train_tree(x, y, p);

  auto imp = permutation_importance(m, x, y, 10, 23);
  REQUIRE(imp.size() == 5);
  CHECK(imp[0].feature == 0);  // sorted descending: leak first
  CHECK(imp[0].importance >= 0.4);
  for (size_t i = 1; i < imp.size(); ++i) CHECK(imp[i].importance <= 0.02);

  // features the tree never split on move nothing: drop is exactly zero
  const auto& dt = std::get<DtModel>(m.impl);
  std::set<int> used;
  for (const TreeNode& n : dt.nodes)
    if (n.feature >= 0) used.insert(n.feature);
  for (const auto& e : imp)
    if (!used.count(e.feature)) CHECK(e.importance == 0.0);

  auto again = permutation_importance(m, x, y, 10, 23);
  for (size_t i = 0; i < imp.size(); ++i) {
    CHECK(again[i].feature == imp[i].feature);
    CHECK(again[i].importance == imp[i].importance);
  }

  CHECK_THROWS_AS((void)permutation_importance(m, x, y, 0, 1), ContractError);
}

TEST_CASE("feature selection keeps strictly positive importances in index order") {
  std::vector<ImportanceEntry> imp = {
      {3, "d", 0.5}, {0, "a", 1e-18}, {1, "b", 0.0}, {2, "c", -0.1}};
  CHECK(select_features(imp) == std::vector<int>{0, 3});

  std::vector<ImportanceEntry> dead = {{0, "a", 0.0}, {1, "b", -0.2}};
  CHECK_THROWS_AS((void)select_features(dead), ContractError);
}

TEST_CASE("report writers emit a stable byte-for-byte layout") {
  EvalReport r = metrics_from_confusion({390, 2, 4, 399});
  std::ostringstream text;
  write_report_text(text, r);
  const std::string expect_text =
      "samples 795\n"
      "accuracy 0.9924528301886792\n"
      "confusion_tn 390\n"
      "confusion_fp 2\n"
      "confusion_fn 4\n"
      "confusion_tp 399\n"
      "class nonvr precision 0.9898477157360406 recall 0.9948979591836735 f1 "
      "0.9923664122137404 support 392\n"
      "class vr precision 0.9950124688279302 recall 0.9900744416873449 f1 "
      "0.9925373134328358 support 403\n";
  CHECK(text.str() == expect_text);

  std::ostringstream csv;
  std::vector<std::string> comments = {"fixture"};
  write_report_csv(csv, r, comments);
  std::ostringstream csv2;
  write_report_csv(csv2, r, comments);
  CHECK(csv.str() == csv2.str());
  CHECK(csv.str().rfind("# fixture\n", 0) == 0);
  CHECK(csv.str().find("class,precision,recall,f1,support\n") != std::string::npos);
  CHECK(csv.str().find("vr,0.9950124688279302,") != std::string::npos);
}

TEST_CASE("dataset_to_matrix rejects unlabeled rows") {
  FeatureVector ok;
  ok.values.fill(1.0);
  ok.label = 1;
  FeatureVector unlabeled = ok;
  unlabeled.label = std::nullopt;
  Matrix x;
  std::vector<int> y;
  std::vector<FeatureVector> rows = {ok, ok};
  dataset_to_matrix(rows, x, y);
  CHECK(x.size() == 2);
  CHECK(x[0].size() == kFeatureCount);
  CHECK(y == std::vector<int>{1, 1});

  rows.push_back(unlabeled);
  CHECK_THROWS_AS(dataset_to_matrix(rows, x, y), ContractError);
}

TEST_CASE("run_pipeline selects informative columns and evaluates the refit model") {
  Matrix x;
  std::vector<int> y;
  labeled_blobs(60, 6, 2, 29, x, y);
  PipelineResult r = run_pipeline(x, y, Family::Dt, 7, 5);

  CHECK(r.report.accuracy >= 0.9);
  CHECK(!r.kept.empty());
  CHECK(std::is_sorted(r.kept.begin(), r.kept.end()));
  // the informative columns dominate the importance ranking
  CHECK((r.importances[0].feature == 0 || r.importances[0].feature == 1));
  CHECK(r.model.input_width == 6);
  CHECK_NOTHROW((void)predict(r.model, x[0]));

  PipelineResult again = run_pipeline(x, y, Family::Dt, 7, 5);
  CHECK(again.kept == r.kept);
  std::ostringstream a, b;
  write_report_text(a, r.report);
  write_report_text(b, again.report);
  CHECK(a.str() == b.str());
}
