#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "cbg/learning.hpp"

namespace cbg {

// Explicit payoff tensor for a small game. Pure profiles are indexed
// lexicographically with player 0 varying fastest.
struct NormalFormGame {
  int n_players = 0;
  std::vector<int> strategies_per_player;
  std::vector<double> payoffs;  // profile_index * n_players + player

  std::int64_t n_profiles() const;
  std::int64_t profile_index(const PureProfile& profile) const;
  PureProfile profile_at(std::int64_t index) const;
  // Advances a profile to its lexicographic successor in place.
  void next_profile(PureProfile& profile) const;
  double payoff(std::int64_t profile_idx, int player) const {
    return payoffs[profile_idx * n_players + player];
  }
  double payoff(const PureProfile& profile, int player) const {
    return payoffs[profile_index(profile) * n_players + player];
  }
};

// Pairing of each cluster with its two players in the twins game.
struct TwinsLabeling {
  std::vector<std::array<int, 2>> players;
  int n_clusters() const { return static_cast<int>(players.size()); }
};

// Cluster distributions seen by `focal_player` (one of cluster's twins) under
// a pure twins-game profile: the focal player's own cluster is a point mass
// on its twin's strategy; any other cluster is a point mass if its twins
// agree and half/half otherwise. Independent of the focal player's own entry.
ClusterDistributions twins_instantiation(const TwinsLabeling& labeling, int n_strategies,
                                         int cluster, const PureProfile& twin_profile,
                                         int focal_player);

// The 2K-player game in which every cluster is represented by a twin pair.
std::pair<NormalFormGame, TwinsLabeling> build_twins_game(const ClusterModel& model);

// The K-player reduction with one player per cluster (no twin).
NormalFormGame build_kplayer_game(const ClusterModel& model);

// Hierarchical reduction of the bar game into `groups` equally sized groups,
// each constrained to one strategy; payoffs come from the full game.
NormalFormGame build_wel_game(const SantaFeSpec& spec, int groups);

}  // namespace cbg
