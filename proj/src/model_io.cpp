#include <fstream>
#include <sstream>

#include "vrtc/classifiers.hpp"
#include "vrtc/errors.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

namespace {

constexpr const char* kMagic = "vrtc-model v1";

void write_vec(std::ostream& out, const char* name, const std::vector<double>& v) {
  out << name << ' ' << v.size();
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

void write_nodes(std::ostream& out, const DtModel& m) {
  for (size_t i = 0; i < m.nodes.size(); ++i) {
    const TreeNode& t = m.nodes[i];
    out << "node " << i << ' ' << t.feature << ' ' << format_double(t.threshold) << ' '
        << t.left << ' ' << t.right << ' ' << t.label << ' ' << t.count0 << ' ' << t.count1
        << '\n';
  }
}

struct Reader {
  explicit Reader(std::istream& in_) : in(in_) {}
  std::istream& in;
  int line_no = 0;
  std::string line;
  std::istringstream tokens;

  std::string where() const { return "model line " + std::to_string(line_no); }

  void next_line() {
    if (!std::getline(in, line)) throw ParseError("model truncated after line " + std::to_string(line_no));
    ++line_no;
    tokens.clear();
    tokens.str(line);
  }

  std::string token() {
    std::string t;
    if (!(tokens >> t)) throw ParseError(where() + ": missing field");
    return t;
  }

  void expect(const std::string& want) {
    const std::string got = token();
    if (got != want)
      throw ParseError(where() + ": expected \"" + want + "\", got \"" + got + "\"");
  }

  void end_of_line() {
    std::string extra;
    if (tokens >> extra) throw ParseError(where() + ": unexpected trailing field \"" + extra + "\"");
  }

  double num() { return parse_double(token(), where()); }
  int64_t integer() { return parse_int(token(), where()); }
  uint64_t unsigned64() { return parse_u64(token(), where()); }

  std::vector<double> vec(const std::string& name) {
    next_line();
    expect(name);
    const int64_t count = integer();
    if (count < 0) throw ParseError(where() + ": negative count");
    std::vector<double> v(count);
    for (auto& x : v) x = num();
    end_of_line();
    return v;
  }
};

DtModel read_nodes(Reader& r, int64_t count, int max_depth, int min_samples_split) {
  if (count < 1) throw ParseError(r.where() + ": tree needs at least one node");
  DtModel m;
  m.max_depth = max_depth;
  m.min_samples_split = min_samples_split;
  m.nodes.resize(count);
  for (int64_t i = 0; i < count; ++i) {
    r.next_line();
    r.expect("node");
    if (r.integer() != i) throw ParseError(r.where() + ": node index out of sequence");
    TreeNode& t = m.nodes[i];
    t.feature = static_cast<int>(r.integer());
    t.threshold = r.num();
    t.left = static_cast<int>(r.integer());
    t.right = static_cast<int>(r.integer());
    t.label = static_cast<int>(r.integer());
    t.count0 = r.integer();
    t.count1 = r.integer();
    r.end_of_line();
    if (t.label != 0 && t.label != 1) throw ParseError(r.where() + ": node label outside {0,1}");
    const bool leaf = t.feature < 0;
    if (leaf ? (t.left != -1 || t.right != -1)
             : (t.left < 0 || t.left >= count || t.right < 0 || t.right >= count))
      throw ParseError(r.where() + ": bad child links");
  }
  return m;
}

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model,
                std::span<const std::string> comment_lines) {
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << kMagic << '\n';
  out << "family " << to_string(model.family) << '\n';
  out << "input_width " << model.input_width << '\n';
  out << "columns " << model.columns.size();
  for (int c : model.columns) out << ' ' << c;
  out << '\n';

  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LrModel>) {
          out << "lr c " << format_double(impl.c) << " solver " << impl.solver_tag << '\n';
          write_vec(out, "scaler_mean", impl.scaler.mean);
          write_vec(out, "scaler_std", impl.scaler.std);
          write_vec(out, "weights", impl.weights);
          out << "bias " << format_double(impl.bias) << '\n';
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          out << "knn k " << impl.k << " weights "
              << (impl.weights == KnnWeights::Uniform ? "uniform" : "distance") << " rows "
              << impl.train_x.size() << " cols " << impl.scaler.mean.size() << '\n';
          write_vec(out, "scaler_mean", impl.scaler.mean);
          write_vec(out, "scaler_std", impl.scaler.std);
          for (size_t i = 0; i < impl.train_x.size(); ++i) {
            out << "row";
            for (double v : impl.train_x[i]) out << ' ' << format_double(v);
            out << ' ' << impl.train_y[i] << '\n';
          }
        } else if constexpr (std::is_same_v<T, DtModel>) {
          out << "dt max_depth " << impl.max_depth << " min_samples_split "
              << impl.min_samples_split << " nodes " << impl.nodes.size() << '\n';
          write_nodes(out, impl);
        } else if constexpr (std::is_same_v<T, RfModel>) {
          out << "rf n_estimators " << impl.params.n_estimators << " max_depth "
              << impl.params.max_depth << " min_samples_split " << impl.params.min_samples_split
              << " bootstrap " << (impl.params.bootstrap ? 1 : 0) << " seed " << impl.seed
              << " trees " << impl.trees.size() << '\n';
          for (size_t t = 0; t < impl.trees.size(); ++t) {
            out << "tree " << t << " nodes " << impl.trees[t].nodes.size() << '\n';
            write_nodes(out, impl.trees[t]);
          }
        } else if constexpr (std::is_same_v<T, NbModel>) {
          out << "nb var_smoothing " << format_double(impl.var_smoothing) << " epsilon "
              << format_double(impl.epsilon) << '\n';
          out << "priors " << format_double(impl.priors[0]) << ' '
              << format_double(impl.priors[1]) << '\n';
          write_vec(out, "mean0", impl.means[0]);
          write_vec(out, "var0", impl.vars[0]);
          write_vec(out, "mean1", impl.means[1]);
          write_vec(out, "var1", impl.vars[1]);
        }
      },
      model.impl);
  out << "end\n";
}

TrainedModel load_model(std::istream& in) {
  Reader r(in);

  // provenance comments may precede the magic line
  do {
    r.next_line();
  } while (!r.line.empty() && r.line[0] == '#');
  if (r.line != kMagic)
    throw ParseError(r.where() + ": not a model file (expected \"" + kMagic + "\")");

  TrainedModel model;
  r.next_line();
  r.expect("family");
  model.family = family_from_string(r.token());
  r.end_of_line();

  r.next_line();
  r.expect("input_width");
  model.input_width = static_cast<int>(r.integer());
  r.end_of_line();
  if (model.input_width < 1) throw ParseError(r.where() + ": input_width must be >= 1");

  r.next_line();
  r.expect("columns");
  const int64_t ncols = r.integer();
  if (ncols < 1) throw ParseError(r.where() + ": columns count must be >= 1");
  model.columns.resize(ncols);
  for (auto& c : model.columns) {
    c = static_cast<int>(r.integer());
    if (c < 0 || c >= model.input_width)
      throw ParseError(r.where() + ": column " + std::to_string(c) + " outside input width");
  }
  r.end_of_line();
  const auto fitted_width = static_cast<size_t>(ncols);

  r.next_line();
  switch (model.family) {
    case Family::Lr: {
      r.expect("lr");
      r.expect("c");
      LrModel m;
      m.c = r.num();
      r.expect("solver");
      m.solver_tag = r.token();
      r.end_of_line();
      m.scaler.mean = r.vec("scaler_mean");
      m.scaler.std = r.vec("scaler_std");
      m.weights = r.vec("weights");
      r.next_line();
      r.expect("bias");
      m.bias = r.num();
      r.end_of_line();
      if (m.scaler.mean.size() != fitted_width || m.scaler.std.size() != fitted_width ||
          m.weights.size() != fitted_width)
        throw ParseError(r.where() + ": lr payload width mismatch");
      model.impl = std::move(m);
      break;
    }
    case Family::Knn: {
      r.expect("knn");
      r.expect("k");
      KnnModel m;
      m.k = static_cast<int>(r.integer());
      r.expect("weights");
      const std::string w = r.token();
      if (w == "uniform")
        m.weights = KnnWeights::Uniform;
      else if (w == "distance")
        m.weights = KnnWeights::Distance;
      else
        throw ParseError(r.where() + ": unknown knn weights \"" + w + "\"");
      r.expect("rows");
      const int64_t rows = r.integer();
      r.expect("cols");
      const int64_t cols = r.integer();
      r.end_of_line();
      if (rows < 1 || cols < 1 || static_cast<size_t>(cols) != fitted_width)
        throw ParseError(r.where() + ": knn payload width mismatch");
      if (m.k < 1 || m.k > rows) throw ParseError(r.where() + ": k outside stored row count");
      m.scaler.mean = r.vec("scaler_mean");
      m.scaler.std = r.vec("scaler_std");
      if (m.scaler.mean.size() != fitted_width || m.scaler.std.size() != fitted_width)
        throw ParseError(r.where() + ": knn scaler width mismatch");
      m.train_x.resize(rows);
      m.train_y.resize(rows);
      for (int64_t i = 0; i < rows; ++i) {
        r.next_line();
        r.expect("row");
        m.train_x[i].resize(cols);
        for (auto& v : m.train_x[i]) v = r.num();
        const int64_t label = r.integer();
        r.end_of_line();
        if (label != 0 && label != 1) throw ParseError(r.where() + ": row label outside {0,1}");
        m.train_y[i] = static_cast<int>(label);
      }
      model.impl = std::move(m);
      break;
    }
    case Family::Dt: {
      r.expect("dt");
      r.expect("max_depth");
      const int max_depth = static_cast<int>(r.integer());
      r.expect("min_samples_split");
      const int mss = static_cast<int>(r.integer());
      r.expect("nodes");
      const int64_t count = r.integer();
      r.end_of_line();
      model.impl = read_nodes(r, count, max_depth, mss);
      break;
    }
    case Family::Rf: {
      r.expect("rf");
      r.expect("n_estimators");
      RfModel m;
      m.params.family = Family::Rf;
      m.params.n_estimators = static_cast<int>(r.integer());
      r.expect("max_depth");
      m.params.max_depth = static_cast<int>(r.integer());
      r.expect("min_samples_split");
      m.params.min_samples_split = static_cast<int>(r.integer());
      r.expect("bootstrap");
      const int64_t flag = r.integer();
      if (flag != 0 && flag != 1) throw ParseError(r.where() + ": bootstrap flag outside {0,1}");
      m.params.bootstrap = flag == 1;
      r.expect("seed");
      m.seed = r.unsigned64();
      r.expect("trees");
      const int64_t trees = r.integer();
      r.end_of_line();
      if (trees < 1) throw ParseError(r.where() + ": forest needs at least one tree");
      m.trees.reserve(trees);
      for (int64_t t = 0; t < trees; ++t) {
        r.next_line();
        r.expect("tree");
        if (r.integer() != t) throw ParseError(r.where() + ": tree index out of sequence");
        r.expect("nodes");
        const int64_t count = r.integer();
        r.end_of_line();
        m.trees.push_back(read_nodes(r, count, m.params.max_depth, m.params.min_samples_split));
      }
      model.impl = std::move(m);
      break;
    }
    case Family::Nb: {
      r.expect("nb");
      r.expect("var_smoothing");
      NbModel m;
      m.var_smoothing = r.num();
      r.expect("epsilon");
      m.epsilon = r.num();
      r.end_of_line();
      r.next_line();
      r.expect("priors");
      m.priors[0] = r.num();
      m.priors[1] = r.num();
      r.end_of_line();
      m.means[0] = r.vec("mean0");
      m.vars[0] = r.vec("var0");
      m.means[1] = r.vec("mean1");
      m.vars[1] = r.vec("var1");
      for (int c = 0; c < 2; ++c)
        if (m.means[c].size() != fitted_width || m.vars[c].size() != fitted_width)
          throw ParseError(r.where() + ": nb payload width mismatch");
      model.impl = std::move(m);
      break;
    }
  }

  r.next_line();
  r.expect("end");
  r.end_of_line();
  return model;
}

void save_model_file(const std::string& path, const TrainedModel& model,
                     std::span<const std::string> comment_lines) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  save_model(out, model, comment_lines);
  if (!out) throw IoError("write failed for " + path);
}

TrainedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_model(in);
}

}  // namespace vrtc
