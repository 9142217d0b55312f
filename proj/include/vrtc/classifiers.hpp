#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vrtc {

using Matrix = std::vector<std::vector<double>>;  // row-major

enum class Family { Lr, Knn, Dt, Rf, Nb };

const char* to_string(Family f);
Family family_from_string(const std::string& text);  // lr/knn/dt/rf/nb

enum class KnnWeights { Uniform, Distance };

// One flat parameter record; each family reads only its own fields.
struct HyperParams {
  Family family = Family::Dt;
  double c = 1.0;                        // lr: inverse regularization strength
  std::string solver_tag = "liblinear";  // lr: recorded only, one optimizer
  int n_neighbors = 5;                   // knn
  KnnWeights weights = KnnWeights::Uniform;
  int max_depth = 10;                    // dt / rf
  int min_samples_split = 5;             // dt / rf
  int n_estimators = 50;                 // rf
  bool bootstrap = true;                 // rf degenerate-forest test hook
  double var_smoothing = 1e-9;           // nb
  std::string describe() const;
};

// Per-column standardization fitted on training rows only. Zero-variance
// columns get std 1 so they transform to zero instead of NaN.
struct StandardScaler {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> transform_row(std::span<const double> row) const;
  Matrix transform(const Matrix& x) const;
  std::vector<double> inverse_row(std::span<const double> row) const;
};

StandardScaler fit_scaler(const Matrix& x);
Matrix apply_scaler(const StandardScaler& scaler, const Matrix& x);

struct LrModel {
  StandardScaler scaler;
  std::vector<double> weights;
  double bias = 0;
  double c = 1.0;
  std::string solver_tag;
};

struct KnnModel {
  StandardScaler scaler;
  Matrix train_x;  // scaled
  std::vector<int> train_y;
  int k = 5;
  KnnWeights weights = KnnWeights::Uniform;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  int label = 0;
  int64_t count0 = 0;
  int64_t count1 = 0;
};

struct DtModel {
  std::vector<TreeNode> nodes;  // node 0 is the root
  int max_depth = 10;
  int min_samples_split = 5;
};

struct RfModel {
  std::vector<DtModel> trees;
  HyperParams params;
  uint64_t seed = 0;
};

struct NbModel {
  std::array<double, 2> priors{};
  std::array<std::vector<double>, 2> means;
  std::array<std::vector<double>, 2> vars;  // smoothed
  double var_smoothing = 1e-9;
  double epsilon = 0;  // the additive smoothing actually applied
};

// columns projects a raw input row (input_width wide) onto the columns the
// underlying model was fitted on; identity unless feature selection ran.
struct TrainedModel {
  Family family = Family::Dt;
  int input_width = 0;
  std::vector<int> columns;
  std::variant<LrModel, KnnModel, DtModel, RfModel, NbModel> impl;
};

TrainedModel train_logreg(const Matrix& x, const std::vector<int>& y, const HyperParams& p);
TrainedModel train_knn(const Matrix& x, const std::vector<int>& y, const HyperParams& p);
TrainedModel train_tree(const Matrix& x, const std::vector<int>& y, const HyperParams& p);
TrainedModel train_forest(const Matrix& x, const std::vector<int>& y, const HyperParams& p,
                          uint64_t seed);
TrainedModel train_gnb(const Matrix& x, const std::vector<int>& y, double var_smoothing);

// Unnormalized log posteriors {class 0, class 1} for one row.
std::array<double, 2> gnb_log_posteriors(const NbModel& m, std::span<const double> row);

// Uniform dispatch; seed feeds the forest's bootstrap/feature-bag draws.
TrainedModel train_model(const Matrix& x, const std::vector<int>& y, const HyperParams& p,
                         uint64_t seed);

// Re-aims a model fitted on a column subset at full-width input rows.
void set_projection(TrainedModel& model, std::vector<int> columns, int raw_width);

int predict(const TrainedModel& model, std::span<const double> row);
std::vector<int> predict_batch(const TrainedModel& model, const Matrix& rows);

// Versioned self-describing text format; loading reproduces identical
// predictions (doubles stored in shortest exact decimal form).
void save_model(std::ostream& out, const TrainedModel& model,
                std::span<const std::string> comment_lines = {});
void save_model_file(const std::string& path, const TrainedModel& model,
                     std::span<const std::string> comment_lines = {});
TrainedModel load_model(std::istream& in);
TrainedModel load_model_file(const std::string& path);

}  // namespace vrtc
