#pragma once

#include <cmath>
#include <vector>

#include "cbg/games.hpp"
#include "cbg/learning.hpp"
#include "cbg/reduced.hpp"
#include "cbg/rng.hpp"

namespace test_helpers {

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Vendor spec with explicit matrices; agent types default to a single type.
inline cbg::VendorGameSpec make_vendor(int n_agents, int n_locations,
                                       std::vector<double> interaction,
                                       std::vector<double> bias) {
  cbg::VendorGameSpec spec;
  spec.n_types = 1;
  spec.type_matrix = {-1.0};
  spec.n_locations = n_locations;
  spec.sigma2 = 0.0;
  spec.interaction = std::move(interaction);
  spec.bias = std::move(bias);
  spec.agent_type.assign(n_agents, 0);
  return spec;
}

inline cbg::NormalFormGame random_game(int n_players, int n_strategies, cbg::Rng& rng,
                                       double lo = -5.0, double hi = 5.0) {
  cbg::NormalFormGame game;
  game.n_players = n_players;
  game.strategies_per_player.assign(n_players, n_strategies);
  std::uniform_real_distribution<double> draw(lo, hi);
  game.payoffs.resize(game.n_profiles() * n_players);
  for (double& v : game.payoffs) v = draw(rng);
  return game;
}

// Random regressors plus a consistent clustering over `n_agents`, handy for
// building twins and k-player games directly.
inline cbg::ClusterModel random_model(int k, int n_strategies, int n_agents, cbg::Rng& rng,
                                      double lo = -5.0, double hi = 5.0) {
  cbg::ClusterModel model;
  model.clustering.k = k;
  model.clustering.assignment.resize(n_agents);
  for (int a = 0; a < n_agents; ++a) model.clustering.assignment[a] = a % k;
  model.regressors.k = k;
  model.regressors.n_strategies = n_strategies;
  int monomials = 1;
  for (int i = 0; i < k; ++i) monomials *= n_strategies;
  std::uniform_real_distribution<double> draw(lo, hi);
  model.regressors.coef.assign(static_cast<std::size_t>(k) * n_strategies,
                               std::vector<double>(monomials + 1, 0.0));
  for (auto& row : model.regressors.coef) {
    for (double& v : row) v = draw(rng);
  }
  return model;
}

}  // namespace test_helpers
