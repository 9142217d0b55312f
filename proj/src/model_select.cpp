#include "vrtc/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "vrtc/errors.hpp"
#include "vrtc/rng.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

void dataset_to_matrix(std::span<const FeatureVector> rows, Matrix& x, std::vector<int>& y) {
  x.clear();
  y.clear();
  x.reserve(rows.size());
  y.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].label)
      throw ContractError("row " + std::to_string(i) + " has no label");
    x.emplace_back(rows[i].values.begin(), rows[i].values.end());
    y.push_back(*rows[i].label);
  }
}

namespace {

void check_labels(const std::vector<int>& y) {
  for (int label : y)
    if (label != 0 && label != 1)
      throw ContractError("label " + std::to_string(label) + " outside {0,1}");
}

std::array<std::vector<size_t>, 2> indices_by_class(const std::vector<int>& y) {
  std::array<std::vector<size_t>, 2> idx;
  for (size_t i = 0; i < y.size(); ++i) idx[y[i]].push_back(i);
  return idx;
}

}  // namespace

SplitResult stratified_split(const Matrix& x, const std::vector<int>& y, double train_fraction,
                             uint64_t seed) {
  if (x.size() != y.size()) throw ContractError("row/label count mismatch");
  if (!(train_fraction > 0 && train_fraction < 1))
    throw ContractError("train_fraction must be in (0,1)");
  check_labels(y);

  auto idx = indices_by_class(y);
  for (int c = 0; c < 2; ++c)
    if (idx[c].size() < 2)
      throw ContractError("class " + std::to_string(c) + " has fewer than 2 rows");

  SplitResult out;
  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(c)}));
    shuffle(idx[c], rng);
    const auto count = static_cast<double>(idx[c].size());
    auto take = static_cast<size_t>(std::llround(train_fraction * count));
    // both sides must keep every class; extreme fractions are pulled back in
    take = std::clamp<size_t>(take, 1, idx[c].size() - 1);
    for (size_t i = 0; i < idx[c].size(); ++i) {
      if (i < take) {
        out.train_x.push_back(x[idx[c][i]]);
        out.train_y.push_back(c);
      } else {
        out.val_x.push_back(x[idx[c][i]]);
        out.val_y.push_back(c);
      }
    }
  }
  return out;
}

std::vector<std::vector<size_t>> kfold_indices(size_t n, int k, uint64_t seed) {
  if (k < 2) throw ContractError("cross-validation needs k >= 2");
  if (static_cast<size_t>(k) > n)
    throw ContractError("k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " rows");
  Rng rng(seed);
  const std::vector<size_t> perm = random_permutation(n, rng);
  std::vector<std::vector<size_t>> folds(k);
  const size_t base = n / k, extra = n % k;
  size_t at = 0;
  for (int f = 0; f < k; ++f) {
    const size_t len = base + (static_cast<size_t>(f) < extra ? 1 : 0);
    folds[f].assign(perm.begin() + at, perm.begin() + at + len);
    at += len;
  }
  return folds;
}

std::vector<std::vector<size_t>> stratified_kfold(const std::vector<int>& y, int k,
                                                  uint64_t seed) {
  if (k < 2) throw ContractError("cross-validation needs k >= 2");
  check_labels(y);
  const auto idx = indices_by_class(y);
  for (int c = 0; c < 2; ++c)
    if (idx[c].size() < static_cast<size_t>(k))
      throw ContractError("k=" + std::to_string(k) + " exceeds class " + std::to_string(c) +
                          " size " + std::to_string(idx[c].size()));

  std::vector<std::vector<size_t>> folds(k);
  for (int c = 0; c < 2; ++c) {
    std::vector<size_t> order = idx[c];
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(c)}));
    shuffle(order, rng);
    const size_t n = order.size(), base = n / k, extra = n % k;
    size_t at = 0;
    for (int f = 0; f < k; ++f) {
      const size_t len = base + (static_cast<size_t>(f) < extra ? 1 : 0);
      folds[f].insert(folds[f].end(), order.begin() + at, order.begin() + at + len);
      at += len;
    }
  }
  return folds;
}

GridSpec default_grid(Family family) {
  GridSpec spec;
  spec.family = family;
  spec.cv_folds = 3;
  HyperParams p;
  p.family = family;
  switch (family) {
    case Family::Lr:
      for (const char* solver : {"liblinear", "saga"})
        for (double c : {0.1, 1.0}) {
          p.solver_tag = solver;
          p.c = c;
          spec.candidates.push_back(p);
        }
      break;
    case Family::Knn:
      for (int k : {5, 10})
        for (KnnWeights w : {KnnWeights::Uniform, KnnWeights::Distance}) {
          p.n_neighbors = k;
          p.weights = w;
          spec.candidates.push_back(p);
        }
      break;
    case Family::Dt:
      for (int mss : {5, 8})
        for (int md : {5, 10}) {
          p.min_samples_split = mss;
          p.max_depth = md;
          spec.candidates.push_back(p);
        }
      break;
    case Family::Rf:
      for (int trees : {5, 20, 50})
        for (int mss : {5, 8})
          for (int md : {5, 10}) {
            p.n_estimators = trees;
            p.min_samples_split = mss;
            p.max_depth = md;
            spec.candidates.push_back(p);
          }
      break;
    case Family::Nb:
      // logspace(0, -9, 100): exponents evenly spaced from 0 down to -9
      for (int i = 0; i < 100; ++i) {
        p.var_smoothing = std::pow(10.0, -9.0 * static_cast<double>(i) / 99.0);
        spec.candidates.push_back(p);
      }
      break;
  }
  return spec;
}

namespace {

double fraction_correct(const std::vector<int>& predicted, const std::vector<int>& actual) {
  int64_t hits = 0;
  for (size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == actual[i];
  return actual.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(actual.size());
}

}  // namespace

GridSearchResult grid_search(const Matrix& x, const std::vector<int>& y, const GridSpec& spec,
                             uint64_t seed) {
  if (spec.candidates.empty()) throw ContractError("grid has no candidates");
  if (spec.cv_folds < 2) throw ContractError("cross-validation needs k >= 2");

  const auto folds = stratified_kfold(y, spec.cv_folds, derive_seed(seed, {0}));

  GridSearchResult out;
  out.table.reserve(spec.candidates.size());
  double best = -1;
  int best_index = -1;

  for (size_t ci = 0; ci < spec.candidates.size(); ++ci) {
    const HyperParams& params = spec.candidates[ci];
    CvRow row;
    row.params = params;
    for (size_t f = 0; f < folds.size(); ++f) {
      Matrix train_x, val_x;
      std::vector<int> train_y, val_y;
      for (size_t g = 0; g < folds.size(); ++g) {
        for (size_t i : folds[g]) {
          if (g == f) {
            val_x.push_back(x[i]);
            val_y.push_back(y[i]);
          } else {
            train_x.push_back(x[i]);
            train_y.push_back(y[i]);
          }
        }
      }
      TrainedModel model;
      try {
        model = train_model(train_x, train_y, params, derive_seed(seed, {1, ci, f}));
      } catch (const ContractError& e) {
        throw ContractError("candidate " + params.describe() + ": " + e.what());
      }
      row.fold_scores.push_back(fraction_correct(predict_batch(model, val_x), val_y));
    }
    row.mean_score = std::accumulate(row.fold_scores.begin(), row.fold_scores.end(), 0.0) /
                     static_cast<double>(row.fold_scores.size());
    if (row.mean_score > best) {  // strict: ties keep the earliest candidate
      best = row.mean_score;
      best_index = static_cast<int>(ci);
    }
    out.table.push_back(std::move(row));
  }

  out.best = spec.candidates[best_index];
  out.best_index = best_index;
  out.best_score = best;
  out.model = train_model(x, y, out.best, derive_seed(seed, {2}));
  return out;
}

double accuracy_score(const TrainedModel& model, const Matrix& x, const std::vector<int>& y) {
  return fraction_correct(predict_batch(model, x), y);
}

std::vector<ImportanceEntry> permutation_importance(const TrainedModel& model, const Matrix& x,
                                                    const std::vector<int>& y, int n_repeats,
                                                    uint64_t seed) {
  if (x.size() < 2) throw ContractError("permutation importance needs >= 2 rows");
  if (n_repeats < 1) throw ContractError("n_repeats must be >= 1");
  const size_t n = x.size(), d = x[0].size();
  const double baseline = accuracy_score(model, x, y);
  const auto names = feature_names();

  Matrix work = x;
  std::vector<ImportanceEntry> out(d);
  for (size_t j = 0; j < d; ++j) {
    double drop_sum = 0;
    for (int r = 0; r < n_repeats; ++r) {
      Rng rng(derive_seed(seed, {static_cast<uint64_t>(j), static_cast<uint64_t>(r)}));
      const std::vector<size_t> perm = random_permutation(n, rng);
      for (size_t i = 0; i < n; ++i) work[i][j] = x[perm[i]][j];
      // mean of per-repeat drops so an untouched column scores exactly zero
      drop_sum += baseline - accuracy_score(model, work, y);
    }
    for (size_t i = 0; i < n; ++i) work[i][j] = x[i][j];
    out[j].feature = static_cast<int>(j);
    out[j].name = j < names.size() ? names[j] : "f" + std::to_string(j);
    out[j].importance = drop_sum / n_repeats;
  }

  std::stable_sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    return a.importance > b.importance;
  });
  return out;
}

std::vector<int> select_features(std::span<const ImportanceEntry> importances) {
  std::vector<int> kept;
  for (const auto& e : importances)
    if (e.importance > 0) kept.push_back(e.feature);
  if (kept.empty()) throw ContractError("no informative features: every importance is <= 0");
  std::sort(kept.begin(), kept.end());
  return kept;
}

EvalReport metrics_from_confusion(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  r.total = c.tn + c.fp + c.fn + c.tp;
  const auto rate = [](int64_t num, int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  const auto f1 = [](double p, double rec) { return p + rec == 0 ? 0.0 : 2 * p * rec / (p + rec); };

  r.accuracy = rate(c.tn + c.tp, r.total);
  r.nonvr.precision = rate(c.tn, c.tn + c.fn);
  r.nonvr.recall = rate(c.tn, c.tn + c.fp);
  r.nonvr.f1 = f1(r.nonvr.precision, r.nonvr.recall);
  r.nonvr.support = c.tn + c.fp;
  r.vr.precision = rate(c.tp, c.tp + c.fp);
  r.vr.recall = rate(c.tp, c.tp + c.fn);
  r.vr.f1 = f1(r.vr.precision, r.vr.recall);
  r.vr.support = c.fn + c.tp;
  return r;
}

EvalReport evaluate(const TrainedModel& model, const Matrix& x, const std::vector<int>& y) {
  if (x.size() != y.size()) throw ContractError("row/label count mismatch");
  if (x.empty()) throw ContractError("evaluation set is empty");
  check_labels(y);
  const std::vector<int> predicted = predict_batch(model, x);
  Confusion c;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1)
      (predicted[i] == 1 ? c.tp : c.fn)++;
    else
      (predicted[i] == 1 ? c.fp : c.tn)++;
  }
  return metrics_from_confusion(c);
}

void write_report_text(std::ostream& out, const EvalReport& r) {
  out << "samples " << r.total << '\n';
  out << "accuracy " << format_double(r.accuracy) << '\n';
  out << "confusion_tn " << r.confusion.tn << '\n';
  out << "confusion_fp " << r.confusion.fp << '\n';
  out << "confusion_fn " << r.confusion.fn << '\n';
  out << "confusion_tp " << r.confusion.tp << '\n';
  const auto line = [&](const char* name, const ClassMetrics& m) {
    out << "class " << name << " precision " << format_double(m.precision) << " recall "
        << format_double(m.recall) << " f1 " << format_double(m.f1) << " support " << m.support
        << '\n';
  };
  line("nonvr", r.nonvr);
  line("vr", r.vr);
}

void write_report_csv(std::ostream& out, const EvalReport& r,
                      std::span<const std::string> comment_lines) {
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "# accuracy " << format_double(r.accuracy) << " samples " << r.total << '\n';
  out << "# confusion tn=" << r.confusion.tn << " fp=" << r.confusion.fp
      << " fn=" << r.confusion.fn << " tp=" << r.confusion.tp << '\n';
  out << "class,precision,recall,f1,support\n";
  const auto line = [&](const char* name, const ClassMetrics& m) {
    out << name << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ','
        << format_double(m.f1) << ',' << m.support << '\n';
  };
  line("nonvr", r.nonvr);
  line("vr", r.vr);
}

PipelineResult run_pipeline(const Matrix& x, const std::vector<int>& y, Family family,
                            uint64_t seed, int n_repeats, double train_fraction) {
  PipelineResult out;
  SplitResult split = stratified_split(x, y, train_fraction, derive_seed(seed, {0}));
  out.grid = grid_search(split.train_x, split.train_y, default_grid(family),
                         derive_seed(seed, {1}));
  out.importances = permutation_importance(out.grid.model, split.val_x, split.val_y, n_repeats,
                                           derive_seed(seed, {2}));
  out.kept = select_features(out.importances);

  Matrix reduced;
  reduced.reserve(split.train_x.size());
  for (const auto& row : split.train_x) {
    std::vector<double> slim;
    slim.reserve(out.kept.size());
    for (int j : out.kept) slim.push_back(row[j]);
    reduced.push_back(std::move(slim));
  }
  out.model = train_model(reduced, split.train_y, out.grid.best, derive_seed(seed, {3}));
  set_projection(out.model, out.kept, static_cast<int>(x[0].size()));
  out.report = evaluate(out.model, split.val_x, split.val_y);
  return out;
}

}  // namespace vrtc
