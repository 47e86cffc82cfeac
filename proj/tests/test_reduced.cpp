#include <doctest.h>

#include <cmath>
#include <vector>

#include "cbg/errors.hpp"
#include "cbg/reduced.hpp"
#include "helpers.hpp"

using namespace cbg;
using test_helpers::close;

namespace {

constexpr int L = 0;
constexpr int R = 1;

// Independent route to a twin player's payoff: build the instantiated
// distributions from the stated rules and expand the regression equation
// term by term.
double oracle_twins_payoff(const RegressorSet& reg, const PureProfile& profile, int player) {
  const int K = reg.k;
  const int S = reg.n_strategies;
  const int cluster = player / 2;
  const int twin = player % 2 == 0 ? player + 1 : player - 1;
  std::vector<std::vector<double>> p(K, std::vector<double>(S, 0.0));
  for (int j = 0; j < K; ++j) {
    if (j == cluster) {
      p[j][profile[twin]] = 1.0;
    } else {
      p[j][profile[2 * j]] += 0.5;
      p[j][profile[2 * j + 1]] += 0.5;
    }
  }
  const std::vector<double>& eq = reg.equation(cluster, profile[player]);
  double total = eq.back();
  std::vector<int> joint(K, 0);
  while (true) {
    double prob = 1.0;
    int idx = 0;
    for (int j = 0; j < K; ++j) {
      prob *= p[j][joint[j]];
      idx = idx * S + joint[j];
    }
    total += eq[idx] * prob;
    int j = K - 1;
    for (; j >= 0; --j) {
      if (++joint[j] < S) break;
      joint[j] = 0;
    }
    if (j < 0) break;
  }
  return total;
}

}  // namespace

TEST_CASE("instantiation: focal twin sees its twin as the whole cluster") {
  TwinsLabeling labeling{{{0, 1}, {2, 3}}};
  const PureProfile lrll{L, R, L, L};
  // focal player 0 of cluster 0: own cluster follows the twin playing R
  const ClusterDistributions as_a = twins_instantiation(labeling, 2, 0, lrll, 0);
  CHECK(as_a.at(0, R) == 1.0);
  CHECK(as_a.at(0, L) == 0.0);
  CHECK(as_a.at(1, L) == 1.0);
  // focal player 2 of cluster 1: the disagreeing pair splits half and half
  const ClusterDistributions as_b = twins_instantiation(labeling, 2, 1, lrll, 2);
  CHECK(as_b.at(0, L) == 0.5);
  CHECK(as_b.at(0, R) == 0.5);
  CHECK(as_b.at(1, L) == 1.0);
}

TEST_CASE("instantiation: agreeing twins are point masses everywhere") {
  TwinsLabeling labeling{{{0, 1}, {2, 3}}};
  const PureProfile rrll{R, R, L, L};
  for (int focal : {0, 1}) {
    const ClusterDistributions d = twins_instantiation(labeling, 2, 0, rrll, focal);
    CHECK(d.at(0, R) == 1.0);
    CHECK(d.at(1, L) == 1.0);
  }
}

TEST_CASE("instantiation: never depends on the focal player's own strategy") {
  TwinsLabeling labeling{{{0, 1}, {2, 3}}};
  Rng rng = make_rng(12);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 30; ++rep) {
    PureProfile profile(4);
    for (int& s : profile) s = coin(rng);
    for (int player = 0; player < 4; ++player) {
      const int cluster = player / 2;
      PureProfile flipped = profile;
      flipped[player] = 1 - flipped[player];
      const ClusterDistributions a = twins_instantiation(labeling, 2, cluster, profile, player);
      const ClusterDistributions b = twins_instantiation(labeling, 2, cluster, flipped, player);
      CHECK(a.p == b.p);
    }
  }
}

TEST_CASE("twins game: the LRLR row matches the hand-derived expressions") {
  Rng rng = make_rng(14);
  const ClusterModel model = test_helpers::random_model(2, 2, 4, rng);
  const auto [game, labeling] = build_twins_game(model);
  REQUIRE(game.n_players == 4);
  const auto& reg = model.regressors;
  auto coef = [&](int cluster, int s, int sa, int sb) {
    return reg.equation(cluster, s)[RegressorSet::profile_coef_index({sa, sb}, 2)];
  };
  auto offset = [&](int cluster, int s) { return reg.equation(cluster, s).back(); };

  const PureProfile lrlr{L, R, L, R};
  const double pay_a = (coef(0, L, R, L) + coef(0, L, R, R)) / 2 + offset(0, L);
  const double pay_a2 = (coef(0, R, L, L) + coef(0, R, L, R)) / 2 + offset(0, R);
  const double pay_b = (coef(1, L, L, R) + coef(1, L, R, R)) / 2 + offset(1, L);
  const double pay_b2 = (coef(1, R, L, L) + coef(1, R, R, L)) / 2 + offset(1, R);
  CHECK(close(game.payoff(lrlr, 0), pay_a, 1e-12));
  CHECK(close(game.payoff(lrlr, 1), pay_a2, 1e-12));
  CHECK(close(game.payoff(lrlr, 2), pay_b, 1e-12));
  CHECK(close(game.payoff(lrlr, 3), pay_b2, 1e-12));
}

TEST_CASE("twins game: single cluster reduces to a 2-player table") {
  Rng rng = make_rng(15);
  const ClusterModel model = test_helpers::random_model(1, 2, 2, rng);
  const auto [game, labeling] = build_twins_game(model);
  REQUIRE(game.n_players == 2);
  const auto& reg = model.regressors;
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      const PureProfile profile{s, t};
      const double expected = reg.equation(0, s)[t] + reg.equation(0, s).back();
      CHECK(close(game.payoff(profile, 0), expected, 1e-12));
    }
  }
}

TEST_CASE("twins game: full tensor matches the oracle") {
  Rng rng = make_rng(16);
  for (int rep = 0; rep < 5; ++rep) {
    const ClusterModel model = test_helpers::random_model(2, 2, 4, rng);
    const auto [game, labeling] = build_twins_game(model);
    for (std::int64_t idx = 0; idx < game.n_profiles(); ++idx) {
      const PureProfile profile = game.profile_at(idx);
      for (int player = 0; player < 4; ++player) {
        CHECK(close(game.payoff(idx, player),
                    oracle_twins_payoff(model.regressors, profile, player), 1e-12));
      }
    }
  }
}

TEST_CASE("twins game: swapping a twin pair swaps exactly their payoffs") {
  Rng rng = make_rng(17);
  const ClusterModel model = test_helpers::random_model(3, 2, 6, rng);
  const auto [game, labeling] = build_twins_game(model);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    PureProfile profile(6);
    for (int& s : profile) s = coin(rng);
    for (int cluster = 0; cluster < 3; ++cluster) {
      const auto [first, second] = labeling.players[cluster];
      PureProfile swapped = profile;
      std::swap(swapped[first], swapped[second]);
      for (int player = 0; player < 6; ++player) {
        const double original = game.payoff(profile, player);
        if (player == first) {
          CHECK(close(original, game.payoff(swapped, second), 1e-12));
        } else if (player == second) {
          CHECK(close(original, game.payoff(swapped, first), 1e-12));
        } else {
          CHECK(close(original, game.payoff(swapped, player), 1e-12));
        }
      }
    }
  }
}

TEST_CASE("k-player game: single cluster is the diagonal of the twins table") {
  Rng rng = make_rng(18);
  const ClusterModel model = test_helpers::random_model(1, 3, 2, rng);
  const NormalFormGame game = build_kplayer_game(model);
  REQUIRE(game.n_players == 1);
  for (int s = 0; s < 3; ++s) {
    const int idx = RegressorSet::profile_coef_index({s}, 3);
    const double expected =
        model.regressors.equation(0, s)[idx] + model.regressors.equation(0, s).back();
    CHECK(close(game.payoff(PureProfile{s}, 0), expected, 1e-12));
  }
}

TEST_CASE("k-player game: agrees with the twins game on doubled profiles") {
  Rng rng = make_rng(19);
  for (int rep = 0; rep < 5; ++rep) {
    const ClusterModel model = test_helpers::random_model(2, 2, 4, rng);
    const NormalFormGame reduced = build_kplayer_game(model);
    const auto [twins, labeling] = build_twins_game(model);
    for (std::int64_t idx = 0; idx < reduced.n_profiles(); ++idx) {
      const PureProfile cluster_profile = reduced.profile_at(idx);
      PureProfile doubled(4);
      for (int i = 0; i < 2; ++i) {
        doubled[labeling.players[i][0]] = cluster_profile[i];
        doubled[labeling.players[i][1]] = cluster_profile[i];
      }
      for (int i = 0; i < 2; ++i) {
        for (int t : labeling.players[i]) {
          CHECK(close(reduced.payoff(idx, i), twins.payoff(doubled, t), 1e-12));
        }
      }
    }
  }
}

TEST_CASE("k-player game: tensor matches direct prediction") {
  Rng rng = make_rng(20);
  const ClusterModel model = test_helpers::random_model(2, 2, 4, rng);
  const NormalFormGame game = build_kplayer_game(model);
  for (std::int64_t idx = 0; idx < game.n_profiles(); ++idx) {
    const PureProfile profile = game.profile_at(idx);
    ClusterDistributions d{2, 2, {0, 0, 0, 0}};
    d.p.assign(4, 0.0);
    d.p[0 * 2 + profile[0]] = 1.0;
    d.p[1 * 2 + profile[1]] = 1.0;
    for (int i = 0; i < 2; ++i) {
      CHECK(close(game.payoff(idx, i),
                  predict_payoff(model.regressors, i, profile[i], d), 1e-12));
    }
  }
}

TEST_CASE("wel game: two groups of five reproduce the bar outcomes") {
  const SantaFeSpec spec{10, 0.6, 4.0, -6.0, 0.0};
  const NormalFormGame game = build_wel_game(spec, 2);
  REQUIRE(game.n_players == 2);
  // one group visits: 5 attendees fit under capacity 6
  CHECK(game.payoff(PureProfile{1, 0}, 0) == 4.0);
  CHECK(game.payoff(PureProfile{1, 0}, 1) == 0.0);
  // both groups visit: 10 attendees over capacity
  CHECK(game.payoff(PureProfile{1, 1}, 0) == -6.0);
  CHECK(game.payoff(PureProfile{1, 1}, 1) == -6.0);
}

TEST_CASE("wel game: five groups enumerate the even attendances") {
  const SantaFeSpec spec{10, 0.4, 4.0, -6.0, 0.0};
  const NormalFormGame game = build_wel_game(spec, 5);
  REQUIRE(game.n_players == 5);
  for (std::int64_t idx = 0; idx < game.n_profiles(); ++idx) {
    const PureProfile profile = game.profile_at(idx);
    int visiting_groups = 0;
    for (int s : profile) visiting_groups += s;
    const int attendance = 2 * visiting_groups;
    const double visit_value = attendance <= 4 ? 4.0 : -6.0;
    for (int g = 0; g < 5; ++g) {
      CHECK(game.payoff(idx, g) == (profile[g] == 1 ? visit_value : 0.0));
    }
  }
}

TEST_CASE("wel game: group count must divide the agents") {
  const SantaFeSpec spec{10, 0.5, 4.0, -6.0, 0.0};
  CHECK_THROWS_AS(build_wel_game(spec, 3), InvalidInputError);
}

TEST_CASE("wel game: two-group tensor only sees the half-capacity split") {
  std::vector<NormalFormGame> high;
  for (double c : {0.5, 0.6, 0.75, 0.9, 0.95}) {
    high.push_back(build_wel_game(SantaFeSpec{10, c, 4.0, -6.0, 0.0}, 2));
  }
  for (std::size_t i = 1; i < high.size(); ++i) CHECK(high[i].payoffs == high[0].payoffs);
  const NormalFormGame low = build_wel_game(SantaFeSpec{10, 0.4, 4.0, -6.0, 0.0}, 2);
  CHECK(low.payoffs != high[0].payoffs);
}
