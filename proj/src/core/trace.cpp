#include "core/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace stlmpc {

namespace {

constexpr double kStdFloorThreshold = 1e-8;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::parse, path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
  }
}

}  // namespace

NormStats compute_norm_stats(const std::vector<Vec>& rows) {
  if (rows.size() < 2) fail(ErrorCode::dimension, "compute_norm_stats: need at least 2 rows");
  const std::size_t dim = rows.front().size();
  if (dim == 0) fail(ErrorCode::dimension, "compute_norm_stats: zero-dimensional rows");
  for (const Vec& r : rows) {
    if (r.size() != dim) fail(ErrorCode::dimension, "compute_norm_stats: ragged rows");
  }

  NormStats stats;
  stats.mean.assign(dim, 0.0);
  stats.std.assign(dim, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const Vec& r : rows) {
    for (std::size_t i = 0; i < dim; ++i) stats.mean[i] += r[i];
  }
  for (std::size_t i = 0; i < dim; ++i) stats.mean[i] /= n;
  for (const Vec& r : rows) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = r[i] - stats.mean[i];
      stats.std[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    stats.std[i] = std::sqrt(stats.std[i] / n);
    if (stats.std[i] < kStdFloorThreshold) stats.std[i] = 1.0;
  }
  return stats;
}

Vec normalize(const Vec& v, const NormStats& stats) {
  if (v.size() != stats.mean.size()) {
    fail(ErrorCode::dimension, "normalize: vector length " + std::to_string(v.size()) +
                                   " != stats length " + std::to_string(stats.mean.size()));
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - stats.mean[i]) / stats.std[i];
  return out;
}

Vec denormalize(const Vec& v, const NormStats& stats) {
  if (v.size() != stats.mean.size()) {
    fail(ErrorCode::dimension, "denormalize: vector length " + std::to_string(v.size()) +
                                   " != stats length " + std::to_string(stats.mean.size()));
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * stats.std[i] + stats.mean[i];
  return out;
}

void validate_transition_dims(const Dataset& dataset) {
  if (dataset.transitions.empty()) return;
  const std::size_t sdim = dataset.transitions.front().state.size();
  const std::size_t adim = dataset.transitions.front().action.size();
  for (const Transition& tr : dataset.transitions) {
    if (tr.state.size() != sdim || tr.next_state.size() != sdim || tr.action.size() != adim) {
      fail(ErrorCode::dimension, "dataset transitions are dimensionally inconsistent");
    }
  }
}

std::pair<std::vector<Transition>, std::vector<Transition>> split(const Dataset& dataset,
                                                                  std::uint64_t seed) {
  if (!(dataset.split_fraction > 0.0 && dataset.split_fraction < 1.0)) {
    fail(ErrorCode::invalid_argument, "split_fraction must lie in (0,1)");
  }
  const std::size_t n = dataset.transitions.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(mix_seed(seed, 0x517));
  std::shuffle(idx.begin(), idx.end(), rng);

  const auto n_train =
      static_cast<std::size_t>(std::ceil(dataset.split_fraction * static_cast<double>(n)));
  std::vector<Transition> train, val;
  train.reserve(n_train);
  val.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : val).push_back(dataset.transitions[idx[i]]);
  }
  return {std::move(train), std::move(val)};
}

void save_dataset_csv(const Dataset& dataset, const std::string& path) {
  validate_transition_dims(dataset);
  if (dataset.transitions.empty()) fail(ErrorCode::invalid_argument, "refusing to save empty dataset");
  std::ofstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open for writing: " + path);

  const std::size_t sdim = dataset.transitions.front().state.size();
  const std::size_t adim = dataset.transitions.front().action.size();
  for (std::size_t i = 0; i < sdim; ++i) f << "s" << i << ",";
  for (std::size_t i = 0; i < adim; ++i) f << "a" << i << ",";
  for (std::size_t i = 0; i < sdim; ++i) f << "sp" << i << (i + 1 < sdim ? "," : "");
  f << "\n";

  for (const Transition& tr : dataset.transitions) {
    std::string line;
    for (double v : tr.state) line += format_double(v) + ",";
    for (double v : tr.action) line += format_double(v) + ",";
    for (std::size_t i = 0; i < sdim; ++i) {
      line += format_double(tr.next_state[i]);
      if (i + 1 < sdim) line += ",";
    }
    f << line << "\n";
  }
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open dataset: " + path);
  std::string line;
  if (!std::getline(f, line)) fail(ErrorCode::parse, path + ": empty file");

  const auto header = split_line(line, ',');
  std::size_t sdim = 0, adim = 0, spdim = 0;
  for (const std::string& h : header) {
    if (h.rfind("sp", 0) == 0) {
      ++spdim;
    } else if (h.rfind('s', 0) == 0) {
      ++sdim;
    } else if (h.rfind('a', 0) == 0) {
      ++adim;
    } else {
      fail(ErrorCode::parse, path + ": unexpected dataset column '" + h + "'");
    }
  }
  if (sdim == 0 || adim == 0 || sdim != spdim) {
    fail(ErrorCode::parse, path + ": malformed dataset header");
  }

  Dataset ds;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line, ',');
    if (cells.size() != sdim + adim + spdim) {
      fail(ErrorCode::parse, path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(sdim + adim + spdim) + " columns, got " +
                                 std::to_string(cells.size()));
    }
    Transition tr;
    std::size_t c = 0;
    for (std::size_t i = 0; i < sdim; ++i) tr.state.push_back(parse_double(cells[c++], path, lineno));
    for (std::size_t i = 0; i < adim; ++i) tr.action.push_back(parse_double(cells[c++], path, lineno));
    for (std::size_t i = 0; i < spdim; ++i)
      tr.next_state.push_back(parse_double(cells[c++], path, lineno));
    ds.transitions.push_back(std::move(tr));
  }
  return ds;
}

void save_trace_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open for writing: " + path);
  for (std::size_t i = 0; i < traj.names.size(); ++i) {
    f << traj.names[i] << (i + 1 < traj.names.size() ? "," : "");
  }
  f << "\n";
  for (const Vec& s : traj.samples) {
    if (s.size() != traj.names.size()) fail(ErrorCode::dimension, "trace sample/name length mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
      f << format_double(s[i]) << (i + 1 < s.size() ? "," : "");
    }
    f << "\n";
  }
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

Trajectory load_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open trace: " + path);
  std::string line;
  if (!std::getline(f, line)) fail(ErrorCode::parse, path + ": empty file");
  Trajectory traj;
  traj.names = split_line(line, ',');
  if (traj.names.empty() || traj.names.front().empty()) {
    fail(ErrorCode::parse, path + ": missing header row");
  }
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line, ',');
    if (cells.size() != traj.names.size()) {
      fail(ErrorCode::parse, path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(traj.names.size()) + " columns");
    }
    Vec s;
    s.reserve(cells.size());
    for (const std::string& cell : cells) s.push_back(parse_double(cell, path, lineno));
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.empty()) fail(ErrorCode::parse, path + ": trace has no samples");
  return traj;
}

}  // namespace stlmpc
