#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "yun/records.hpp"

namespace yun {

/// Planted-signal synthetic users. Each view of each user independently
/// carries class evidence with probability equal to that view's signal
/// strength, and neutral filler otherwise. Evidence covers both tasks.
struct SyntheticSpec {
  std::size_t num_users = 200;
  /// description, location, tweets, network
  std::array<double, 4> signal = {0.5, 0.3, 0.5, 0.5};
  std::size_t vocab_size = 200;        // neutral filler words
  std::size_t tokens_per_class = 4;    // evidence tokens per class, task and text view
  std::size_t hubs_per_community = 3;  // external accounts per (type, motivation) community
  std::size_t community_mentions = 2;  // same-community users an informative user mentions
  std::size_t noise_accounts = 100;    // pool of unrelated external accounts
  double missing_rate = 0.1;           // null description/location among non-evidence users
  std::array<double, kNumClasses> type_priors = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, kNumClasses> motivation_priors = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<UserRecord> generate_synthetic(const SyntheticSpec& spec);

}  // namespace yun
