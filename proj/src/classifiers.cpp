#include "vrtc/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vrtc/errors.hpp"
#include "vrtc/rng.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

const char* to_string(Family f) {
  switch (f) {
    case Family::Lr: return "lr";
    case Family::Knn: return "knn";
    case Family::Dt: return "dt";
    case Family::Rf: return "rf";
    case Family::Nb: return "nb";
  }
  return "?";
}

Family family_from_string(const std::string& text) {
  if (text == "lr") return Family::Lr;
  if (text == "knn") return Family::Knn;
  if (text == "dt") return Family::Dt;
  if (text == "rf") return Family::Rf;
  if (text == "nb") return Family::Nb;
  throw ParseError("unknown model family \"" + text + "\"");
}

std::string HyperParams::describe() const {
  switch (family) {
    case Family::Lr:
      return std::string("lr c=") + format_double(c) + " solver=" + solver_tag;
    case Family::Knn:
      return "knn n_neighbors=" + std::to_string(n_neighbors) +
             " weights=" + (weights == KnnWeights::Uniform ? "uniform" : "distance");
    case Family::Dt:
      return "dt max_depth=" + std::to_string(max_depth) +
             " min_samples_split=" + std::to_string(min_samples_split);
    case Family::Rf:
      return "rf n_estimators=" + std::to_string(n_estimators) +
             " max_depth=" + std::to_string(max_depth) +
             " min_samples_split=" + std::to_string(min_samples_split);
    case Family::Nb:
      return std::string("nb var_smoothing=") + format_double(var_smoothing);
  }
  return "?";
}

namespace {

void check_xy(const Matrix& x, const std::vector<int>& y) {
  if (x.empty()) throw ContractError("training set is empty");
  const size_t d = x[0].size();
  if (d == 0) throw ContractError("training rows have zero features");
  for (const auto& row : x)
    if (row.size() != d) throw ContractError("training rows have inconsistent widths");
  if (y.size() != x.size())
    throw ContractError("label count " + std::to_string(y.size()) + " does not match row count " +
                        std::to_string(x.size()));
  for (int label : y)
    if (label != 0 && label != 1)
      throw ContractError("label " + std::to_string(label) + " outside {0,1}");
}

std::vector<int> identity_columns(size_t d) {
  std::vector<int> cols(d);
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double softplus(double t) { return t > 30 ? t : std::log1p(std::exp(t)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Regularized logistic loss: sum_i log(1+exp(-s_i z_i)) + |w|^2 / (2c),
// bias excluded from the penalty.
double lr_objective(const Matrix& xs, const std::vector<int>& y, std::span<const double> w,
                    double b, double c) {
  double loss = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double z = dot(w, xs[i]) + b;
    loss += softplus(y[i] == 1 ? -z : z);
  }
  double reg = 0;
  for (double wj : w) reg += wj * wj;
  return loss + reg / (2.0 * c);
}

}  // namespace

StandardScaler fit_scaler(const Matrix& x) {
  if (x.empty()) throw ContractError("cannot fit scaler on empty matrix");
  const size_t n = x.size(), d = x[0].size();
  StandardScaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (const auto& row : x)
    for (size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  for (size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(n);
  for (const auto& row : x)
    for (size_t j = 0; j < d; ++j) {
      const double dev = row[j] - s.mean[j];
      s.std[j] += dev * dev;
    }
  for (size_t j = 0; j < d; ++j) {
    s.std[j] = std::sqrt(s.std[j] / static_cast<double>(n));
    if (s.std[j] == 0.0) s.std[j] = 1.0;
  }
  return s;
}

std::vector<double> StandardScaler::transform_row(std::span<const double> row) const {
  if (row.size() != mean.size()) throw ContractError("scaler width mismatch");
  std::vector<double> out(row.size());
  for (size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / std[j];
  return out;
}

Matrix StandardScaler::transform(const Matrix& x) const {
  Matrix out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(transform_row(row));
  return out;
}

std::vector<double> StandardScaler::inverse_row(std::span<const double> row) const {
  if (row.size() != mean.size()) throw ContractError("scaler width mismatch");
  std::vector<double> out(row.size());
  for (size_t j = 0; j < row.size(); ++j) out[j] = row[j] * std[j] + mean[j];
  return out;
}

Matrix apply_scaler(const StandardScaler& scaler, const Matrix& x) { return scaler.transform(x); }

TrainedModel train_logreg(const Matrix& x, const std::vector<int>& y, const HyperParams& p) {
  check_xy(x, y);
  if (!(p.c > 0)) throw ContractError("lr requires c > 0");
  const size_t n = x.size(), d = x[0].size();

  LrModel m;
  m.scaler = fit_scaler(x);
  m.c = p.c;
  m.solver_tag = p.solver_tag;
  const Matrix xs = m.scaler.transform(x);

  std::vector<double> w(d, 0.0);
  double b = 0;
  double obj = lr_objective(xs, y, w, b, p.c);
  double step = 1.0;
  std::vector<double> gw(d), wn(d);

  for (int iter = 0; iter < 5000; ++iter) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0;
    for (size_t i = 0; i < n; ++i) {
      const double r = sigmoid(dot(w, xs[i]) + b) - y[i];
      for (size_t j = 0; j < d; ++j) gw[j] += r * xs[i][j];
      gb += r;
    }
    for (size_t j = 0; j < d; ++j) gw[j] += w[j] / p.c;

    double ginf = std::fabs(gb);
    double g2 = gb * gb;
    for (double g : gw) {
      ginf = std::max(ginf, std::fabs(g));
      g2 += g * g;
    }
    if (ginf < 1e-6) break;

    // Backtracking line search (Armijo) with warm-started step size.
    bool moved = false;
    double bn = 0, objn = 0;
    while (step >= 1e-16) {
      for (size_t j = 0; j < d; ++j) wn[j] = w[j] - step * gw[j];
      bn = b - step * gb;
      objn = lr_objective(xs, y, wn, bn, p.c);
      if (objn <= obj - 1e-4 * step * g2) {
        moved = true;
        break;
      }
      step /= 2;
    }
    if (!moved) break;  // step underflow: no descent direction progress left
    w.swap(wn);
    b = bn;
    obj = objn;
    step = std::min(step * 2, 1e6);
  }

  m.weights = std::move(w);
  m.bias = b;

  TrainedModel tm;
  tm.family = Family::Lr;
  tm.input_width = static_cast<int>(d);
  tm.columns = identity_columns(d);
  tm.impl = std::move(m);
  return tm;
}

TrainedModel train_knn(const Matrix& x, const std::vector<int>& y, const HyperParams& p) {
  check_xy(x, y);
  if (p.n_neighbors < 1) throw ContractError("knn requires n_neighbors >= 1");
  if (static_cast<size_t>(p.n_neighbors) > x.size())
    throw ContractError("n_neighbors " + std::to_string(p.n_neighbors) + " exceeds " +
                        std::to_string(x.size()) + " training rows");
  KnnModel m;
  m.scaler = fit_scaler(x);
  m.train_x = m.scaler.transform(x);
  m.train_y = y;
  m.k = p.n_neighbors;
  m.weights = p.weights;

  TrainedModel tm;
  tm.family = Family::Knn;
  tm.input_width = static_cast<int>(x[0].size());
  tm.columns = identity_columns(x[0].size());
  tm.impl = std::move(m);
  return tm;
}

namespace {

double gini(int64_t c0, int64_t c1) {
  const double n = static_cast<double>(c0 + c1);
  if (n == 0) return 0;
  const double p0 = c0 / n, p1 = c1 / n;
  return 1.0 - (p0 * p0 + p1 * p1);
}

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  int max_depth;
  int min_samples_split;
  Rng* rng = nullptr;  // non-null enables per-split feature bagging
  int bag_size = 0;
  std::vector<TreeNode> nodes;
  std::vector<int> feature_pool;

  TreeBuilder(const Matrix& x_, const std::vector<int>& y_, int max_depth_, int mss)
      : x(x_), y(y_), max_depth(max_depth_), min_samples_split(mss) {}

  std::vector<int> pick_features() {
    const int d = static_cast<int>(x[0].size());
    if (rng == nullptr || bag_size >= d) {
      std::vector<int> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    if (feature_pool.empty()) {
      feature_pool.resize(d);
      std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }
    for (int i = 0; i < bag_size; ++i) {
      const auto j = i + static_cast<int>(rng->next_below(static_cast<uint64_t>(d - i)));
      std::swap(feature_pool[i], feature_pool[j]);
    }
    std::vector<int> bag(feature_pool.begin(), feature_pool.begin() + bag_size);
    std::sort(bag.begin(), bag.end());
    return bag;
  }

  int build(std::vector<size_t>& idx, int depth) {
    int64_t c0 = 0, c1 = 0;
    for (size_t i : idx) (y[i] == 1 ? c1 : c0)++;

    const int me = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[me].count0 = c0;
    nodes[me].count1 = c1;
    nodes[me].label = c1 > c0 ? 1 : 0;

    if (c0 == 0 || c1 == 0 || depth >= max_depth ||
        idx.size() < static_cast<size_t>(min_samples_split))
      return me;

    const double parent = gini(c0, c1);
    const auto n = static_cast<double>(idx.size());
    double best_gain = 0;
    int best_feature = -1;
    double best_threshold = 0;

    std::vector<size_t> order = idx;
    for (int f : pick_features()) {
      std::sort(order.begin(), order.end(),
                [&](size_t a, size_t b) { return x[a][f] < x[b][f]; });
      int64_t l0 = 0, l1 = 0;
      for (size_t i = 0; i + 1 < order.size(); ++i) {
        (y[order[i]] == 1 ? l1 : l0)++;
        const double a = x[order[i]][f], b = x[order[i + 1]][f];
        if (!(a < b)) continue;
        const double mid = a + (b - a) / 2;
        if (!(a < mid && mid <= b)) continue;  // midpoint rounded onto an endpoint
        const double nl = static_cast<double>(l0 + l1);
        const double gain =
            parent - (nl * gini(l0, l1) + (n - nl) * gini(c0 - l0, c1 - l1)) / n;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = f;
          best_threshold = mid;
        }
      }
    }

    if (best_feature < 0) return me;

    std::vector<size_t> left, right;
    left.reserve(idx.size());
    right.reserve(idx.size());
    for (size_t i : idx)
      (x[i][best_feature] < best_threshold ? left : right).push_back(i);

    nodes[me].feature = best_feature;
    nodes[me].threshold = best_threshold;
    const int l = build(left, depth + 1);
    nodes[me].left = l;
    const int r = build(right, depth + 1);
    nodes[me].right = r;
    return me;
  }
};

int dt_predict_row(const DtModel& m, std::span<const double> row) {
  int node = 0;
  while (m.nodes[node].feature >= 0) {
    const TreeNode& t = m.nodes[node];
    node = row[t.feature] < t.threshold ? t.left : t.right;
  }
  return m.nodes[node].label;
}

DtModel build_tree(const Matrix& x, const std::vector<int>& y, std::vector<size_t> idx,
                   int max_depth, int min_samples_split, Rng* rng, int bag_size) {
  TreeBuilder builder(x, y, max_depth, min_samples_split);
  builder.rng = rng;
  builder.bag_size = bag_size;
  builder.build(idx, 0);
  DtModel m;
  m.nodes = std::move(builder.nodes);
  m.max_depth = max_depth;
  m.min_samples_split = min_samples_split;
  return m;
}

}  // namespace

TrainedModel train_tree(const Matrix& x, const std::vector<int>& y, const HyperParams& p) {
  check_xy(x, y);
  if (p.max_depth < 1) throw ContractError("dt requires max_depth >= 1");
  if (p.min_samples_split < 2) throw ContractError("dt requires min_samples_split >= 2");
  std::vector<size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), size_t{0});

  TrainedModel tm;
  tm.family = Family::Dt;
  tm.input_width = static_cast<int>(x[0].size());
  tm.columns = identity_columns(x[0].size());
  tm.impl = build_tree(x, y, std::move(idx), p.max_depth, p.min_samples_split, nullptr, 0);
  return tm;
}

TrainedModel train_forest(const Matrix& x, const std::vector<int>& y, const HyperParams& p,
                          uint64_t seed) {
  check_xy(x, y);
  if (p.n_estimators < 1) throw ContractError("rf requires n_estimators >= 1");
  if (p.max_depth < 1) throw ContractError("rf requires max_depth >= 1");
  if (p.min_samples_split < 2) throw ContractError("rf requires min_samples_split >= 2");
  const size_t n = x.size(), d = x[0].size();
  const int bag = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  RfModel m;
  m.params = p;
  m.seed = seed;
  m.trees.reserve(p.n_estimators);
  for (int t = 0; t < p.n_estimators; ++t) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(t)}));
    std::vector<size_t> idx(n);
    if (p.bootstrap) {
      for (size_t i = 0; i < n; ++i) idx[i] = rng.next_below(n);
    } else {
      std::iota(idx.begin(), idx.end(), size_t{0});
    }
    m.trees.push_back(build_tree(x, y, std::move(idx), p.max_depth, p.min_samples_split,
                                 p.bootstrap ? &rng : nullptr, p.bootstrap ? bag : 0));
  }

  TrainedModel tm;
  tm.family = Family::Rf;
  tm.input_width = static_cast<int>(d);
  tm.columns = identity_columns(d);
  tm.impl = std::move(m);
  return tm;
}

TrainedModel train_gnb(const Matrix& x, const std::vector<int>& y, double var_smoothing) {
  check_xy(x, y);
  if (!(var_smoothing >= 0)) throw ContractError("nb requires var_smoothing >= 0");
  const size_t n = x.size(), d = x[0].size();

  std::array<int64_t, 2> counts{0, 0};
  for (int label : y) counts[label]++;
  for (int c = 0; c < 2; ++c)
    if (counts[c] == 0)
      throw ContractError("class " + std::to_string(c) + " absent from training labels");

  NbModel m;
  m.var_smoothing = var_smoothing;
  for (int c = 0; c < 2; ++c) {
    m.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    m.means[c].assign(d, 0.0);
    m.vars[c].assign(d, 0.0);
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) m.means[y[i]][j] += x[i][j];
  for (int c = 0; c < 2; ++c)
    for (size_t j = 0; j < d; ++j) m.means[c][j] /= static_cast<double>(counts[c]);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) {
      const double dev = x[i][j] - m.means[y[i]][j];
      m.vars[y[i]][j] += dev * dev;
    }
  for (int c = 0; c < 2; ++c)
    for (size_t j = 0; j < d; ++j) m.vars[c][j] /= static_cast<double>(counts[c]);

  // Additive smoothing proportional to the largest overall feature variance.
  double max_var = 0;
  for (size_t j = 0; j < d; ++j) {
    double mean = 0;
    for (size_t i = 0; i < n; ++i) mean += x[i][j];
    mean /= static_cast<double>(n);
    double var = 0;
    for (size_t i = 0; i < n; ++i) {
      const double dev = x[i][j] - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(n);
    max_var = std::max(max_var, var);
  }
  m.epsilon = max_var > 0 ? var_smoothing * max_var : var_smoothing;
  for (int c = 0; c < 2; ++c)
    for (size_t j = 0; j < d; ++j) m.vars[c][j] += m.epsilon;

  TrainedModel tm;
  tm.family = Family::Nb;
  tm.input_width = static_cast<int>(d);
  tm.columns = identity_columns(d);
  tm.impl = std::move(m);
  return tm;
}

TrainedModel train_model(const Matrix& x, const std::vector<int>& y, const HyperParams& p,
                         uint64_t seed) {
  switch (p.family) {
    case Family::Lr: return train_logreg(x, y, p);
    case Family::Knn: return train_knn(x, y, p);
    case Family::Dt: return train_tree(x, y, p);
    case Family::Rf: return train_forest(x, y, p, seed);
    case Family::Nb: return train_gnb(x, y, p.var_smoothing);
  }
  throw ContractError("unknown model family");
}

void set_projection(TrainedModel& model, std::vector<int> columns, int raw_width) {
  if (columns.empty()) throw ContractError("projection keeps no columns");
  if (static_cast<int>(columns.size()) != model.input_width)
    throw ContractError("projection width " + std::to_string(columns.size()) +
                        " does not match fitted width " + std::to_string(model.input_width));
  for (int c : columns)
    if (c < 0 || c >= raw_width)
      throw ContractError("projection column " + std::to_string(c) + " outside raw width " +
                          std::to_string(raw_width));
  model.columns = std::move(columns);
  model.input_width = raw_width;
}

namespace {

int lr_predict_row(const LrModel& m, std::span<const double> row) {
  const std::vector<double> scaled = m.scaler.transform_row(row);
  const double z = dot(m.weights, scaled) + m.bias;
  return z > 0 ? 1 : 0;
}

int knn_predict_row(const KnnModel& m, std::span<const double> row) {
  const std::vector<double> q = m.scaler.transform_row(row);
  const size_t n = m.train_x.size();
  std::vector<std::pair<double, size_t>> dist(n);
  for (size_t i = 0; i < n; ++i) {
    double s = 0;
    for (size_t j = 0; j < q.size(); ++j) {
      const double dev = q[j] - m.train_x[i][j];
      s += dev * dev;
    }
    dist[i] = {std::sqrt(s), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + m.k, dist.end());

  if (m.weights == KnnWeights::Uniform) {
    int votes1 = 0;
    for (int i = 0; i < m.k; ++i) votes1 += m.train_y[dist[i].second];
    return 2 * votes1 > m.k ? 1 : 0;
  }

  // Inverse-distance weights; exact matches outvote everything else.
  int zero1 = 0, zeros = 0;
  double w0 = 0, w1 = 0;
  for (int i = 0; i < m.k; ++i) {
    const auto [dd, ii] = dist[i];
    if (dd == 0.0) {
      zeros++;
      zero1 += m.train_y[ii];
    } else {
      (m.train_y[ii] == 1 ? w1 : w0) += 1.0 / dd;
    }
  }
  if (zeros > 0) return 2 * zero1 > zeros ? 1 : 0;
  return w1 > w0 ? 1 : 0;
}

int rf_predict_row(const RfModel& m, std::span<const double> row) {
  int votes1 = 0;
  for (const DtModel& t : m.trees) votes1 += dt_predict_row(t, row);
  return 2 * votes1 > static_cast<int>(m.trees.size()) ? 1 : 0;
}

int nb_predict_row(const NbModel& m, std::span<const double> row) {
  const std::array<double, 2> logp = gnb_log_posteriors(m, row);
  return logp[1] > logp[0] ? 1 : 0;
}

}  // namespace

std::array<double, 2> gnb_log_posteriors(const NbModel& m, std::span<const double> row) {
  if (row.size() != m.means[0].size())
    throw ContractError("gnb_log_posteriors expects " + std::to_string(m.means[0].size()) +
                        " features, got " + std::to_string(row.size()));
  std::array<double, 2> logp{};
  for (int c = 0; c < 2; ++c) {
    double lp = std::log(m.priors[c]);
    for (size_t j = 0; j < row.size(); ++j) {
      const double var = m.vars[c][j];
      const double dev = row[j] - m.means[c][j];
      lp += -0.5 * std::log(2.0 * M_PI * var) - dev * dev / (2.0 * var);
    }
    logp[c] = lp;
  }
  return logp;
}

int predict(const TrainedModel& model, std::span<const double> row) {
  if (row.size() != static_cast<size_t>(model.input_width))
    throw ContractError("predict expects " + std::to_string(model.input_width) +
                        " features, got " + std::to_string(row.size()));
  std::vector<double> projected(model.columns.size());
  for (size_t i = 0; i < model.columns.size(); ++i) projected[i] = row[model.columns[i]];

  return std::visit(
      [&](const auto& impl) -> int {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LrModel>) return lr_predict_row(impl, projected);
        if constexpr (std::is_same_v<T, KnnModel>) return knn_predict_row(impl, projected);
        if constexpr (std::is_same_v<T, DtModel>) return dt_predict_row(impl, projected);
        if constexpr (std::is_same_v<T, RfModel>) return rf_predict_row(impl, projected);
        if constexpr (std::is_same_v<T, NbModel>) return nb_predict_row(impl, projected);
      },
      model.impl);
}

std::vector<int> predict_batch(const TrainedModel& model, const Matrix& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(predict(model, row));
  return out;
}

}  // namespace vrtc
