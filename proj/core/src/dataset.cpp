#include "alr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alr/error.hpp"
#include "csv.hpp"

namespace alr {
namespace {

std::vector<std::string> default_names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        std::ostringstream os;
        os << what << " entry (" << r << ", " << c << ") is not finite";
        throw DataError(os.str());
      }
    }
  }
}

}  // namespace

Dataset::Dataset(Matrix features, Matrix labels, std::vector<std::string> feature_names,
                 std::vector<std::string> task_names,
                 std::optional<std::vector<std::string>> group, std::string group_name)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      task_names_(std::move(task_names)),
      group_(std::move(group)),
      group_name_(std::move(group_name)) {
  if (features_.rows() < 1) throw DataError("dataset needs at least one sample");
  if (features_.cols() < 1) throw DataError("dataset needs at least one feature");
  if (labels_.cols() < 1) throw DataError("dataset needs at least one task");
  if (labels_.rows() != features_.rows()) {
    throw DataError("feature and label row counts differ");
  }
  require_finite(features_, "feature");
  require_finite(labels_, "label");
  if (feature_names_.empty()) feature_names_ = default_names("f", dims());
  if (task_names_.empty()) task_names_ = default_names("t", tasks());
  if (feature_names_.size() != dims()) throw DataError("feature_names must have d entries");
  if (task_names_.size() != tasks()) throw DataError("task_names must have P entries");
  if (group_ && group_->size() != size()) throw DataError("group tags must have N entries");
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Matrix f(static_cast<Eigen::Index>(rows.size()), features_.cols());
  Matrix l(static_cast<Eigen::Index>(rows.size()), labels_.cols());
  std::optional<std::vector<std::string>> g;
  if (group_) g.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw std::out_of_range("subset row index out of range");
    const auto r = static_cast<Eigen::Index>(rows[i]);
    f.row(static_cast<Eigen::Index>(i)) = features_.row(r);
    l.row(static_cast<Eigen::Index>(i)) = labels_.row(r);
    if (g) g->push_back((*group_)[rows[i]]);
  }
  return Dataset(std::move(f), std::move(l), feature_names_, task_names_, std::move(g),
                 group_name_);
}

Dataset Dataset::with_features(Matrix features) const {
  if (features.rows() != features_.rows() || features.cols() != features_.cols()) {
    throw std::invalid_argument("with_features: shape mismatch");
  }
  return Dataset(std::move(features), labels_, feature_names_, task_names_, group_, group_name_);
}

Dataset Dataset::with_labels(Matrix labels) const {
  if (labels.rows() != labels_.rows() || labels.cols() != labels_.cols()) {
    throw std::invalid_argument("with_labels: shape mismatch");
  }
  return Dataset(features_, std::move(labels), feature_names_, task_names_, group_, group_name_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
         a.labels_.cols() == b.labels_.cols() && a.features_ == b.features_ &&
         a.labels_ == b.labels_ && a.feature_names_ == b.feature_names_ &&
         a.task_names_ == b.task_names_ && a.group_ == b.group_;
}

// ---------------------------------------------------------------------------
// Normalization

Dataset NormalizationParams::apply(const Dataset& data) const {
  if (static_cast<std::size_t>(mean.size()) != data.dims() ||
      static_cast<std::size_t>(stddev.size()) != data.dims()) {
    throw std::invalid_argument("normalization parameters do not match feature count");
  }
  Matrix f = data.features();
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    f.col(c) = (f.col(c).array() - mean(c)) / stddev(c);
  }
  return data.with_features(std::move(f));
}

std::string NormalizationParams::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    j[names[i]] = {{"mean", mean(c)}, {"std", stddev(c)}};
  }
  return j.dump(2);
}

NormalizationParams NormalizationParams::from_json(const std::string& text) {
  const auto j = nlohmann::ordered_json::parse(text);
  NormalizationParams p;
  p.mean.resize(static_cast<Eigen::Index>(j.size()));
  p.stddev.resize(static_cast<Eigen::Index>(j.size()));
  Eigen::Index c = 0;
  for (const auto& [name, entry] : j.items()) {
    p.names.push_back(name);
    p.mean(c) = entry.at("mean").get<double>();
    p.stddev(c) = entry.at("std").get<double>();
    ++c;
  }
  return p;
}

NormalizedDataset normalize_features(const Dataset& data) {
  if (data.size() < 2) throw std::invalid_argument("normalize_features needs N >= 2");
  const Matrix& x = data.features();
  const auto n = static_cast<double>(data.size());
  NormalizationParams params;
  params.names = data.feature_names();
  params.mean.resize(x.cols());
  params.stddev.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto col = x.col(c);
    if ((col.array() == col(0)).all()) {
      params.mean(c) = col(0);
      params.stddev(c) = 1.0;
      continue;
    }
    const double m = col.mean();
    const double ss = (col.array() - m).square().sum();
    params.mean(c) = m;
    params.stddev(c) = std::sqrt(ss / (n - 1.0));
  }
  Dataset normalized = params.apply(data);
  return {std::move(normalized), std::move(params)};
}

// ---------------------------------------------------------------------------
// CSV

Dataset load_csv(const std::filesystem::path& path, std::size_t task_count,
                 const std::optional<std::string>& group_column) {
  if (task_count < 1) throw ConfigError("task count must be positive");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  const auto header = csv::split_record(line);

  std::optional<std::size_t> group_col;
  if (group_column) {
    const auto it = std::find(header.begin(), header.end(), *group_column);
    if (it == header.end()) {
      throw DataError(path.string() + ": group column \"" + *group_column +
                      "\" not found in header");
    }
    group_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!group_col || c != *group_col) numeric_cols.push_back(c);
  }
  if (numeric_cols.size() < task_count + 1) {
    std::ostringstream os;
    os << path.string() << ": need at least " << task_count + 1 << " numeric columns, found "
       << numeric_cols.size();
    throw DataError(os.str());
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> tags;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_record(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ": line " << line_no << " has " << fields.size()
         << " fields, header has " << header.size();
      throw DataError(os.str());
    }
    std::vector<double> values;
    values.reserve(numeric_cols.size());
    for (std::size_t c : numeric_cols) {
      const auto v = csv::parse_double(fields[c]);
      if (!v || !std::isfinite(*v)) {
        std::ostringstream os;
        os << path.string() << ": line " << line_no << ", column " << c + 1 << " (\""
           << header[c] << "\"): " << (v ? "non-finite" : "non-numeric") << " value \""
           << fields[c] << "\"";
        throw DataError(os.str());
      }
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
    if (group_col) tags.push_back(fields[*group_col]);
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");

  const std::size_t d = numeric_cols.size() - task_count;
  Matrix features(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  Matrix labels(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(task_count));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < numeric_cols.size(); ++c) {
      const auto ri = static_cast<Eigen::Index>(r);
      if (c < d) {
        features(ri, static_cast<Eigen::Index>(c)) = rows[r][c];
      } else {
        labels(ri, static_cast<Eigen::Index>(c - d)) = rows[r][c];
      }
    }
  }
  std::vector<std::string> feature_names;
  std::vector<std::string> task_names;
  for (std::size_t c = 0; c < numeric_cols.size(); ++c) {
    (c < d ? feature_names : task_names).push_back(header[numeric_cols[c]]);
  }
  std::optional<std::vector<std::string>> group;
  if (group_col) group = std::move(tags);
  return Dataset(std::move(features), std::move(labels), std::move(feature_names),
                 std::move(task_names), std::move(group),
                 group_column.value_or("group"));
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  std::vector<std::string> header;
  for (const auto& n : data.feature_names()) header.push_back(csv::escape(n));
  if (data.has_group()) header.push_back(csv::escape(data.group_name()));
  for (const auto& n : data.task_names()) header.push_back(csv::escape(n));
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < data.features().cols(); ++c) {
      out << (c ? "," : "") << csv::format_double(data.features()(ri, c));
    }
    if (data.has_group()) out << ',' << csv::escape((*data.group())[r]);
    for (Eigen::Index c = 0; c < data.labels().cols(); ++c) {
      out << ',' << csv::format_double(data.labels()(ri, c));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Splitting

std::size_t pool_size_for(std::size_t n, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
}

SplitIndices split_indices(std::size_t n, const SplitConfig& cfg) {
  const std::size_t pool = pool_size_for(n, cfg.train_fraction);
  if (pool < 1 || pool >= n) {
    std::ostringstream os;
    os << "degenerate split: " << n << " samples at fraction " << cfg.train_fraction
       << " gives a pool of " << pool;
    throw ConfigError(os.str());
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);
  SplitIndices out;
  out.pool.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(pool), order.end());
  std::sort(out.pool.begin(), out.pool.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTestSplit split_train_test(const Dataset& data, const SplitConfig& cfg) {
  auto idx = split_indices(data.size(), cfg);
  Dataset pool = data.subset(idx.pool);
  Dataset test = data.subset(idx.test);
  return {std::move(pool), std::move(test), std::move(idx)};
}

// ---------------------------------------------------------------------------
// Synthetic data

SyntheticDataset gen_synthetic(std::size_t n, std::size_t d, std::size_t p, double noise_std,
                               std::uint64_t seed) {
  if (n < 1 || d < 1 || p < 1) throw ConfigError("gen_synthetic: n, d, p must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("gen_synthetic: noise_std must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Vector> coefficients(p, Vector(static_cast<Eigen::Index>(d)));
  for (auto& beta : coefficients) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = normal(rng);
  }
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix x(rows, static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = normal(rng);
  }
  Matrix y(rows, static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < p; ++t) {
      const auto tc = static_cast<Eigen::Index>(t);
      y(r, tc) = x.row(r).dot(coefficients[t]) + noise_std * normal(rng);
    }
  }
  return {Dataset(std::move(x), std::move(y)), std::move(coefficients)};
}

}  // namespace alr
