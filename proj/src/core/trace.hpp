#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"

namespace stlmpc {

/// Time-indexed sequence of named state samples; the signal that formulas
/// are evaluated over.
struct Trajectory {
  std::vector<std::string> names;
  std::vector<Vec> samples;
  double dt = 1.0;

  std::size_t length() const { return samples.size(); }
  std::size_t dim() const { return names.size(); }
};

struct Transition {
  Vec state;
  Vec action;
  Vec next_state;
};

struct Dataset {
  std::vector<Transition> transitions;
  double split_fraction = 0.9;

  std::size_t size() const { return transitions.size(); }
};

/// Per-dimension mean / standard deviation used to rescale model inputs
/// and targets.
struct NormStats {
  Vec mean;
  Vec std;
};

/// Population mean and standard deviation per dimension. Dimensions whose
/// std falls below 1e-8 get std 1.0 so constant columns stay usable.
NormStats compute_norm_stats(const std::vector<Vec>& rows);

Vec normalize(const Vec& v, const NormStats& stats);
Vec denormalize(const Vec& v, const NormStats& stats);

/// Deterministic seeded shuffle-and-split; train receives
/// ceil(split_fraction * N) transitions.
std::pair<std::vector<Transition>, std::vector<Transition>> split(const Dataset& dataset,
                                                                  std::uint64_t seed);

void validate_transition_dims(const Dataset& dataset);

// CSV persistence. Datasets use the header s0..s{n-1},a0..a{m-1},sp0..sp{n-1};
// traces use their dimension names as the header.
void save_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

void save_trace_csv(const Trajectory& traj, const std::string& path);
Trajectory load_trace_csv(const std::string& path);

}  // namespace stlmpc
