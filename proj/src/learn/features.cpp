#include "hdyn/learn/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hdyn/common/errors.hpp"

namespace hdyn {

std::vector<int> group_channels(ChannelGroup group) {
  switch (group) {
    case ChannelGroup::Joints123: return {0, 1, 2};
    case ChannelGroup::Joint4: return {3};
    case ChannelGroup::Joint5: return {4};
    case ChannelGroup::Joint6: return {5};
  }
  return {};
}

int values_per_stamp(ChannelGroup group) { return group == ChannelGroup::Joints123 ? 9 : 8; }

std::string to_string(ChannelGroup group) {
  switch (group) {
    case ChannelGroup::Joints123: return "joints123";
    case ChannelGroup::Joint4: return "joint4";
    case ChannelGroup::Joint5: return "joint5";
    case ChannelGroup::Joint6: return "joint6";
  }
  return "?";
}

ChannelGroup group_from_string(const std::string& name) {
  for (ChannelGroup g : {ChannelGroup::Joints123, ChannelGroup::Joint4, ChannelGroup::Joint5,
                         ChannelGroup::Joint6}) {
    if (to_string(g) == name) return g;
  }
  throw ContractError("unknown channel group '" + name + "'");
}

void Dataset::validate() const {
  require(features.rows() == labels.rows(), "Dataset: feature and label rows differ");
  require(features.allFinite() && labels.allFinite(), "Dataset: non-finite values");
  if (!normalization.empty()) {
    require(normalization.mean.size() == features.cols() && normalization.std.size() == features.cols(),
            "Dataset: normalization size mismatch");
  }
}

void window_features(const TrajectoryLog& log, ChannelGroup group, int window_len, Eigen::Index k,
                     double* out) {
  const Eigen::Index first = k - window_len + 1;
  for (Eigen::Index s = first; s <= k; ++s) {
    if (group == ChannelGroup::Joints123) {
      for (int j = 0; j < 3; ++j) *out++ = log.theta(j, s);
      for (int j = 0; j < 3; ++j) *out++ = log.theta_dot(j, s);
      for (int j = 0; j < 3; ++j) *out++ = log.theta_ddot(j, s);
    } else {
      const int joint = group_channels(group)[0];
      for (int j = 0; j < 6; ++j) *out++ = log.theta(j, s);
      *out++ = log.theta_dot(joint, s);
      *out++ = log.theta_ddot(joint, s);
    }
  }
}

Dataset build_features(const std::vector<TrajectoryLog>& logs, ChannelGroup group, int window_len) {
  require(window_len >= 1, "build_features: window length must be >= 1");
  require(!logs.empty(), "build_features: no logs");
  Eigen::Index rows = 0;
  for (const auto& log : logs) {
    require(log.n_joints() >= 6, "build_features: logs must carry six joints");
    require(log.n_samples() >= window_len,
            "build_features: log has " + std::to_string(log.n_samples()) +
                " samples, fewer than the window length " + std::to_string(window_len));
    rows += log.n_samples() - window_len + 1;
  }
  const std::vector<int> channels = group_channels(group);
  const Eigen::Index cols = static_cast<Eigen::Index>(values_per_stamp(group)) * window_len;
  // Fill row-major, then hand over column-major for column scans.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(rows, cols);
  Dataset ds;
  ds.labels.resize(rows, static_cast<Eigen::Index>(channels.size()));
  Eigen::Index r = 0;
  for (const auto& log : logs) {
    for (Eigen::Index k = window_len - 1; k < log.n_samples(); ++k, ++r) {
      window_features(log, group, window_len, k, x.row(r).data());
      for (std::size_t c = 0; c < channels.size(); ++c) {
        ds.labels(r, static_cast<Eigen::Index>(c)) = log.has_torques ? log.tau_measured(channels[c], k) : 0.0;
      }
    }
  }
  ds.features = x;
  return ds;
}

Dataset build_features(const TrajectoryLog& log, ChannelGroup group, int window_len) {
  return build_features(std::vector<TrajectoryLog>{log}, group, window_len);
}

Normalization fit_normalization(const Eigen::MatrixXd& features) {
  require(features.rows() >= 1, "fit_normalization: empty feature matrix");
  Normalization stats;
  stats.mean = features.colwise().mean().transpose();
  stats.std.resize(features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double var = (features.col(c).array() - stats.mean[c]).square().mean();
    stats.std[c] = std::sqrt(var);
  }
  return stats;
}

namespace {

bool passes_through(double std) { return !(std > 1e-12); }

}  // namespace

void apply_normalization(const Normalization& stats, Eigen::MatrixXd& features) {
  require(stats.mean.size() == features.cols(), "apply_normalization: column count mismatch");
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    if (passes_through(stats.std[c])) continue;
    features.col(c) = (features.col(c).array() - stats.mean[c]) / stats.std[c];
  }
}

void invert_normalization(const Normalization& stats, Eigen::MatrixXd& features) {
  require(stats.mean.size() == features.cols(), "invert_normalization: column count mismatch");
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    if (passes_through(stats.std[c])) continue;
    features.col(c) = features.col(c).array() * stats.std[c] + stats.mean[c];
  }
}

Dataset normalize(const Dataset& ds) {
  Dataset out = ds;
  out.normalization = fit_normalization(ds.features);
  apply_normalization(out.normalization, out.features);
  return out;
}

Dataset denormalize(const Dataset& ds) {
  require(!ds.normalization.empty(), "denormalize: dataset is not normalized");
  Dataset out = ds;
  invert_normalization(ds.normalization, out.features);
  out.normalization = {};
  return out;
}

LogSplit split_blocks(const std::vector<TrajectoryLog>& logs, double train_fraction) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "split_blocks: fraction must be in (0, 1)");
  require(!logs.empty(), "split_blocks: no logs");
  LogSplit split;
  if (logs.size() == 1) {
    const Eigen::Index n = logs[0].n_samples();
    const auto cut = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(n)));
    require(cut >= 1 && cut < n, "split_blocks: log too short to split");
    split.train.push_back(logs[0].slice(0, cut));
    split.validation.push_back(logs[0].slice(cut, n));
    return split;
  }
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(logs.size())));
  cut = std::clamp<std::size_t>(cut, 1, logs.size() - 1);
  split.train.assign(logs.begin(), logs.begin() + static_cast<std::ptrdiff_t>(cut));
  split.validation.assign(logs.begin() + static_cast<std::ptrdiff_t>(cut), logs.end());
  return split;
}

Dataset select_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.normalization = ds.normalization;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.columns());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()), ds.labels.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < ds.rows(), "select_rows: row index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
    out.labels.row(static_cast<Eigen::Index>(i)) = ds.labels.row(rows[i]);
  }
  return out;
}

DatasetSplit split_rows(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "split_rows: fraction must be in (0, 1)");
  require(ds.rows() >= 2, "split_rows: need at least two rows");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
  cut = std::clamp<std::size_t>(cut, 1, order.size() - 1);
  std::vector<Eigen::Index> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<Eigen::Index> valid(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(train.begin(), train.end());
  std::sort(valid.begin(), valid.end());
  return {select_rows(ds, train), select_rows(ds, valid)};
}

}  // namespace hdyn
