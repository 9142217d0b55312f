#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vrtc/classifiers.hpp"
#include "vrtc/feature_extract.hpp"

namespace vrtc {

// Labeled feature rows as matrices; unlabeled rows are rejected.
void dataset_to_matrix(std::span<const FeatureVector> rows, Matrix& x, std::vector<int>& y);

struct SplitResult {
  Matrix train_x;
  std::vector<int> train_y;
  Matrix val_x;
  std::vector<int> val_y;
};

// Per-class shuffle, train share rounded to nearest per class. Classes with
// fewer than two rows cannot appear on both sides and are rejected.
SplitResult stratified_split(const Matrix& x, const std::vector<int>& y, double train_fraction,
                             uint64_t seed);

// Contiguous chunks of a seeded permutation; the first n % k folds get the
// extra element.
std::vector<std::vector<size_t>> kfold_indices(size_t n, int k, uint64_t seed);

// Class-balanced folds: each class is chunked separately and fold f takes
// chunk f of every class.
std::vector<std::vector<size_t>> stratified_kfold(const std::vector<int>& y, int k,
                                                  uint64_t seed);

struct GridSpec {
  Family family = Family::Dt;
  std::vector<HyperParams> candidates;
  int cv_folds = 3;
};

// The candidate grids actually searched, in deterministic listing order.
GridSpec default_grid(Family family);

struct CvRow {
  HyperParams params;
  std::vector<double> fold_scores;
  double mean_score = 0;
};

struct GridSearchResult {
  HyperParams best;
  int best_index = 0;
  double best_score = 0;
  std::vector<CvRow> table;
  TrainedModel model;  // refit on all rows with the winning parameters
};

GridSearchResult grid_search(const Matrix& x, const std::vector<int>& y, const GridSpec& spec,
                             uint64_t seed);

struct ImportanceEntry {
  int feature = 0;
  std::string name;
  double importance = 0;
};

// Mean accuracy drop over n_repeats independent column shuffles, sorted by
// importance descending (feature index breaks ties).
std::vector<ImportanceEntry> permutation_importance(const TrainedModel& model, const Matrix& x,
                                                    const std::vector<int>& y, int n_repeats,
                                                    uint64_t seed);

// Indices (ascending) of features with strictly positive importance.
std::vector<int> select_features(std::span<const ImportanceEntry> importances);

struct Confusion {
  int64_t tn = 0, fp = 0, fn = 0, tp = 0;
};

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  int64_t support = 0;
};

struct EvalReport {
  Confusion confusion;
  ClassMetrics nonvr;
  ClassMetrics vr;
  double accuracy = 0;
  int64_t total = 0;
};

EvalReport metrics_from_confusion(const Confusion& c);
EvalReport evaluate(const TrainedModel& model, const Matrix& x, const std::vector<int>& y);

double accuracy_score(const TrainedModel& model, const Matrix& x, const std::vector<int>& y);

void write_report_text(std::ostream& out, const EvalReport& report);
// class,precision,recall,f1,support rows; accuracy and confusion counts ride
// along as comment lines.
void write_report_csv(std::ostream& out, const EvalReport& report,
                      std::span<const std::string> comment_lines = {});

struct PipelineResult {
  GridSearchResult grid;
  std::vector<ImportanceEntry> importances;
  std::vector<int> kept;  // raw feature indices surviving selection
  TrainedModel model;     // refit on kept columns, aimed at full-width rows
  EvalReport report;      // validation-set evaluation of the final model
};

// Split, grid search on train, permutation importance on validation,
// positive-importance selection, reduced refit, final evaluation.
PipelineResult run_pipeline(const Matrix& x, const std::vector<int>& y, Family family,
                            uint64_t seed, int n_repeats = 10, double train_fraction = 0.7);

}  // namespace vrtc
