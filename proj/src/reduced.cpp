#include "cbg/reduced.hpp"

#include <string>

#include "cbg/errors.hpp"

namespace cbg {

std::int64_t NormalFormGame::n_profiles() const {
  std::int64_t p = 1;
  for (int s : strategies_per_player) p *= s;
  return p;
}

std::int64_t NormalFormGame::profile_index(const PureProfile& profile) const {
  std::int64_t idx = 0;
  for (int p = n_players - 1; p >= 0; --p) idx = idx * strategies_per_player[p] + profile[p];
  return idx;
}

PureProfile NormalFormGame::profile_at(std::int64_t index) const {
  PureProfile profile(n_players);
  for (int p = 0; p < n_players; ++p) {
    profile[p] = static_cast<int>(index % strategies_per_player[p]);
    index /= strategies_per_player[p];
  }
  return profile;
}

void NormalFormGame::next_profile(PureProfile& profile) const {
  for (int p = 0; p < n_players; ++p) {
    if (++profile[p] < strategies_per_player[p]) return;
    profile[p] = 0;
  }
}

ClusterDistributions twins_instantiation(const TwinsLabeling& labeling, int n_strategies,
                                         int cluster, const PureProfile& twin_profile,
                                         int focal_player) {
  const int K = labeling.n_clusters();
  if (static_cast<int>(twin_profile.size()) != 2 * K) {
    throw InvalidInputError("twin profile must have one entry per twin player");
  }
  if (cluster < 0 || cluster >= K) throw InvalidInputError("cluster index out of range");
  const auto [own, own_twin] = labeling.players[cluster];
  if (focal_player != own && focal_player != own_twin) {
    throw InvalidInputError("focal player does not belong to the given cluster");
  }
  ClusterDistributions dists;
  dists.k = K;
  dists.n_strategies = n_strategies;
  dists.p.assign(static_cast<std::size_t>(K) * n_strategies, 0.0);
  for (int j = 0; j < K; ++j) {
    const auto [first, second] = labeling.players[j];
    if (j == cluster) {
      // The twin stands for the whole cluster; the focal player's own
      // strategy never enters.
      const int twin = focal_player == first ? second : first;
      dists.p[j * n_strategies + twin_profile[twin]] = 1.0;
    } else {
      const int s1 = twin_profile[first];
      const int s2 = twin_profile[second];
      if (s1 == s2) {
        dists.p[j * n_strategies + s1] = 1.0;
      } else {
        dists.p[j * n_strategies + s1] = 0.5;
        dists.p[j * n_strategies + s2] = 0.5;
      }
    }
  }
  return dists;
}

std::pair<NormalFormGame, TwinsLabeling> build_twins_game(const ClusterModel& model) {
  const int K = model.regressors.k;
  const int S = model.regressors.n_strategies;
  TwinsLabeling labeling;
  labeling.players.resize(K);
  for (int i = 0; i < K; ++i) labeling.players[i] = {2 * i, 2 * i + 1};

  NormalFormGame game;
  game.n_players = 2 * K;
  game.strategies_per_player.assign(2 * K, S);
  const std::int64_t profiles = game.n_profiles();
  game.payoffs.resize(profiles * game.n_players);

  PureProfile profile(game.n_players, 0);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    for (int p = 0; p < game.n_players; ++p) {
      const int cluster = p / 2;
      const ClusterDistributions dists =
          twins_instantiation(labeling, S, cluster, profile, p);
      game.payoffs[idx * game.n_players + p] =
          predict_payoff(model.regressors, cluster, profile[p], dists);
    }
    game.next_profile(profile);
  }
  return {std::move(game), std::move(labeling)};
}

NormalFormGame build_kplayer_game(const ClusterModel& model) {
  const int K = model.regressors.k;
  const int S = model.regressors.n_strategies;
  NormalFormGame game;
  game.n_players = K;
  game.strategies_per_player.assign(K, S);
  const std::int64_t profiles = game.n_profiles();
  game.payoffs.resize(profiles * K);

  ClusterDistributions dists;
  dists.k = K;
  dists.n_strategies = S;
  PureProfile profile(K, 0);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    dists.p.assign(static_cast<std::size_t>(K) * S, 0.0);
    for (int j = 0; j < K; ++j) dists.p[j * S + profile[j]] = 1.0;
    for (int i = 0; i < K; ++i) {
      game.payoffs[idx * K + i] = predict_payoff(model.regressors, i, profile[i], dists);
    }
    game.next_profile(profile);
  }
  return game;
}

NormalFormGame build_wel_game(const SantaFeSpec& spec, int groups) {
  if (groups < 1 || spec.n_agents % groups != 0) {
    throw InvalidInputError("group count " + std::to_string(groups) + " does not divide " +
                            std::to_string(spec.n_agents) + " agents");
  }
  const int per_group = spec.n_agents / groups;
  NormalFormGame game;
  game.n_players = groups;
  game.strategies_per_player.assign(groups, 2);
  const std::int64_t profiles = game.n_profiles();
  game.payoffs.resize(profiles * groups);

  PureProfile group_profile(groups, 0);
  PureProfile full(spec.n_agents);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    for (int a = 0; a < spec.n_agents; ++a) full[a] = group_profile[a / per_group];
    const std::vector<double> payoffs = santafe_payoffs(spec, full);
    for (int g = 0; g < groups; ++g) {
      game.payoffs[idx * groups + g] = payoffs[g * per_group];  // identical within a group
    }
    game.next_profile(group_profile);
  }
  return game;
}

}  // namespace cbg
