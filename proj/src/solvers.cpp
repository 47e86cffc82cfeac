#include "cbg/solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cbg/errors.hpp"

namespace cbg {

namespace {

void check_mixed_profile(const NormalFormGame& game, const MixedProfile& profile) {
  if (static_cast<int>(profile.size()) != game.n_players) {
    throw InvalidInputError("mixed profile has the wrong number of players");
  }
  for (int p = 0; p < game.n_players; ++p) {
    if (static_cast<int>(profile[p].size()) != game.strategies_per_player[p]) {
      throw InvalidInputError("player " + std::to_string(p) +
                              " has the wrong number of strategies");
    }
  }
}

double payoff_scale(const NormalFormGame& game) {
  double scale = 1.0;
  for (double v : game.payoffs) scale = std::max(scale, std::abs(v));
  return scale;
}

MixedProfile point_mass_profile(const NormalFormGame& game, const PureProfile& profile) {
  MixedProfile mixed(game.n_players);
  for (int p = 0; p < game.n_players; ++p) {
    mixed[p].assign(game.strategies_per_player[p], 0.0);
    mixed[p][profile[p]] = 1.0;
  }
  return mixed;
}

bool profile_less(const MixedProfile& a, const MixedProfile& b) {
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t s = 0; s < a[p].size(); ++s) {
      if (a[p][s] != b[p][s]) return a[p][s] < b[p][s];
    }
  }
  return false;
}

double profile_distance(const MixedProfile& a, const MixedProfile& b) {
  double d = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t s = 0; s < a[p].size(); ++s) {
      d = std::max(d, std::abs(a[p][s] - b[p][s]));
    }
  }
  return d;
}

void sort_and_dedupe(EquilibriumList& list) {
  std::sort(list.equilibria.begin(), list.equilibria.end(),
            [](const Equilibrium& a, const Equilibrium& b) {
              return profile_less(a.profile, b.profile);
            });
  std::vector<Equilibrium> unique;
  for (Equilibrium& eq : list.equilibria) {
    if (!unique.empty() && profile_distance(unique.back().profile, eq.profile) < 1e-7) continue;
    unique.push_back(std::move(eq));
  }
  list.equilibria = std::move(unique);
}

}  // namespace

std::vector<double> expected_payoffs(const NormalFormGame& game, const MixedProfile& profile) {
  check_mixed_profile(game, profile);
  std::vector<double> result(game.n_players, 0.0);
  const std::int64_t profiles = game.n_profiles();
  PureProfile pure(game.n_players, 0);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    double w = 1.0;
    for (int p = 0; p < game.n_players; ++p) w *= profile[p][pure[p]];
    if (w != 0.0) {
      for (int p = 0; p < game.n_players; ++p) result[p] += w * game.payoff(idx, p);
    }
    game.next_profile(pure);
  }
  return result;
}

std::vector<double> pure_strategy_values(const NormalFormGame& game, const MixedProfile& weights,
                                         int player) {
  check_mixed_profile(game, weights);
  std::vector<double> values(game.strategies_per_player[player], 0.0);
  const std::int64_t profiles = game.n_profiles();
  PureProfile pure(game.n_players, 0);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    double w = 1.0;
    for (int p = 0; p < game.n_players; ++p) {
      if (p != player) w *= weights[p][pure[p]];
    }
    if (w != 0.0) values[pure[player]] += w * game.payoff(idx, player);
    game.next_profile(pure);
  }
  return values;
}

BestResponse best_response_gain(const NormalFormGame& game, const MixedProfile& profile,
                                int player) {
  const std::vector<double> values = pure_strategy_values(game, profile, player);
  double current = 0.0;
  for (std::size_t s = 0; s < values.size(); ++s) current += profile[player][s] * values[s];
  int best = 0;
  for (std::size_t s = 1; s < values.size(); ++s) {
    if (values[s] > values[best]) best = static_cast<int>(s);
  }
  return BestResponse{values[best] - current, best};
}

VerifyResult verify_ne(const NormalFormGame& game, const MixedProfile& profile, double eps) {
  double max_gain = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < game.n_players; ++p) {
    max_gain = std::max(max_gain, best_response_gain(game, profile, p).gain);
  }
  return VerifyResult{max_gain <= eps, max_gain};
}

EquilibriumList enumerate_pure_ne(const NormalFormGame& game, const SolverOptions& options) {
  const std::int64_t profiles = game.n_profiles();
  if (profiles > options.max_profiles) {
    throw SizeError("profile count " + std::to_string(profiles) + " exceeds the scan cap of " +
                    std::to_string(options.max_profiles));
  }
  std::vector<std::int64_t> stride(game.n_players);
  std::int64_t acc = 1;
  for (int p = 0; p < game.n_players; ++p) {
    stride[p] = acc;
    acc *= game.strategies_per_player[p];
  }

  EquilibriumList list;
  PureProfile profile(game.n_players, 0);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    bool ok = true;
    double worst = 0.0;
    for (int p = 0; p < game.n_players && ok; ++p) {
      const double base = game.payoff(idx, p);
      for (int s = 0; s < game.strategies_per_player[p]; ++s) {
        if (s == profile[p]) continue;
        const std::int64_t alt = idx + (s - profile[p]) * stride[p];
        const double gain = game.payoff(alt, p) - base;
        worst = std::max(worst, gain);
        if (gain > options.verify_eps) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      list.equilibria.push_back(
          Equilibrium{point_mass_profile(game, profile), true, false, worst});
    }
    game.next_profile(profile);
  }
  return list;
}

EquilibriumList bimatrix_all_ne(const NormalFormGame& game, const SolverOptions& options) {
  (void)options;
  if (game.n_players != 2) throw InvalidInputError("bimatrix solver requires exactly 2 players");
  const int m = game.strategies_per_player[0];
  const int n = game.strategies_per_player[1];
  auto a_pay = [&](int i, int j) { return game.payoff(i + static_cast<std::int64_t>(m) * j, 0); };
  auto b_pay = [&](int i, int j) { return game.payoff(i + static_cast<std::int64_t>(m) * j, 1); };

  constexpr double kAcceptEps = 1e-9;
  const double tie_tol = 1e-9 * payoff_scale(game);

  std::vector<std::vector<std::vector<int>>> row_subsets(m + 1), col_subsets(n + 1);
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) subset.push_back(i);
    }
    row_subsets[subset.size()].push_back(std::move(subset));
  }
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) subset.push_back(j);
    }
    col_subsets[subset.size()].push_back(std::move(subset));
  }

  EquilibriumList list;
  for (int k = 1; k <= std::min(m, n); ++k) {
    for (const std::vector<int>& rows : row_subsets[k]) {
      for (const std::vector<int>& cols : col_subsets[k]) {
        // Column mix making the row player indifferent across `rows`.
        Eigen::MatrixXd sys(k + 1, k + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < k; ++c) sys(r, c) = a_pay(rows[r], cols[c]);
          sys(r, k) = -1.0;
        }
        for (int c = 0; c < k; ++c) sys(k, c) = 1.0;
        sys(k, k) = 0.0;
        rhs(k) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu_a(sys);
        if (!lu_a.isInvertible()) {
          list.degenerate = true;
          continue;
        }
        const Eigen::VectorXd col_sol = lu_a.solve(rhs);

        // Row mix making the column player indifferent across `cols`.
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < k; ++c) sys(r, c) = b_pay(rows[c], cols[r]);
          sys(r, k) = -1.0;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu_b(sys);
        if (!lu_b.isInvertible()) {
          list.degenerate = true;
          continue;
        }
        const Eigen::VectorXd row_sol = lu_b.solve(rhs);

        bool feasible = true;
        for (int c = 0; c < k && feasible; ++c) {
          if (col_sol(c) < -1e-12 || row_sol(c) < -1e-12) feasible = false;
        }
        if (!feasible) continue;
        for (int c = 0; c < k; ++c) {
          if (k > 1 && (col_sol(c) < tie_tol || row_sol(c) < tie_tol)) list.degenerate = true;
        }

        const double row_value = col_sol(k);
        const double col_value = row_sol(k);
        std::vector<double> x(m, 0.0), y(n, 0.0);
        for (int c = 0; c < k; ++c) {
          x[rows[c]] = std::max(0.0, row_sol(c));
          y[cols[c]] = std::max(0.0, col_sol(c));
        }

        bool best = true;
        for (int i = 0; i < m && best; ++i) {
          if (x[i] > 0.0) continue;
          double value = 0.0;
          for (int c = 0; c < k; ++c) value += a_pay(i, cols[c]) * y[cols[c]];
          if (value > row_value + tie_tol) best = false;
          if (std::abs(value - row_value) <= tie_tol) list.degenerate = true;
        }
        for (int j = 0; j < n && best; ++j) {
          if (y[j] > 0.0) continue;
          double value = 0.0;
          for (int c = 0; c < k; ++c) value += b_pay(rows[c], j) * x[rows[c]];
          if (value > col_value + tie_tol) best = false;
          if (std::abs(value - col_value) <= tie_tol) list.degenerate = true;
        }
        if (!best) continue;

        MixedProfile candidate{x, y};
        const VerifyResult check = verify_ne(game, candidate, kAcceptEps * payoff_scale(game));
        if (!check.ok) continue;
        list.equilibria.push_back(
            Equilibrium{std::move(candidate), k == 1, false, check.max_gain});
      }
    }
  }
  sort_and_dedupe(list);
  return list;
}

EquilibriumList symmetric_msne_2strategy(const NormalFormGame& game,
                                         const SolverOptions& options) {
  const int k = game.n_players;
  for (int s : game.strategies_per_player) {
    if (s != 2) throw InvalidInputError("symmetric solver requires 2 strategies per player");
  }
  const double scale = payoff_scale(game);
  const double tie_tol = 1e-9 * scale;

  // Extract u(own strategy, #others playing 1); any mismatch means the game
  // is not symmetric anonymous.
  std::vector<double> u0(k, 0.0), u1(k, 0.0);
  std::vector<char> seen0(k, 0), seen1(k, 0);
  const std::int64_t profiles = game.n_profiles();
  PureProfile profile(k, 0);
  for (std::int64_t idx = 0; idx < profiles; ++idx) {
    int ones = 0;
    for (int p = 0; p < k; ++p) ones += profile[p];
    for (int p = 0; p < k; ++p) {
      const int others = ones - profile[p];
      const double v = game.payoff(idx, p);
      std::vector<double>& u = profile[p] == 1 ? u1 : u0;
      std::vector<char>& seen = profile[p] == 1 ? seen1 : seen0;
      if (!seen[others]) {
        u[others] = v;
        seen[others] = 1;
      } else if (std::abs(u[others] - v) > tie_tol) {
        throw InvalidInputError("payoffs are not invariant under player permutation");
      }
    }
    game.next_profile(profile);
  }

  std::vector<double> diff(k);
  double max_diff = 0.0;
  for (int others = 0; others < k; ++others) {
    diff[others] = u1[others] - u0[others];
    max_diff = std::max(max_diff, std::abs(diff[others]));
  }

  std::vector<double> binom(k);  // C(k-1, m)
  binom[0] = 1.0;
  for (int mth = 1; mth < k; ++mth) binom[mth] = binom[mth - 1] * (k - mth) / mth;

  auto indifference = [&](double p) {
    double value = 0.0;
    for (int mth = 0; mth < k; ++mth) {
      value += binom[mth] * std::pow(p, mth) * std::pow(1.0 - p, k - 1 - mth) * diff[mth];
    }
    return value;
  };

  EquilibriumList list;
  std::vector<double> candidates{0.0, 1.0};
  if (max_diff <= tie_tol) {
    list.degenerate = true;  // every p is an equilibrium; report the endpoints
  } else {
    const int grid = 1024;
    double prev = indifference(0.0);
    for (int i = 1; i <= grid; ++i) {
      const double p = static_cast<double>(i) / grid;
      const double cur = indifference(p);
      if (prev == 0.0) candidates.push_back(static_cast<double>(i - 1) / grid);
      if (prev * cur < 0.0) {
        double lo = static_cast<double>(i - 1) / grid;
        double hi = p;
        double flo = prev;
        while (hi - lo > 1e-10) {
          const double mid = 0.5 * (lo + hi);
          const double fmid = indifference(mid);
          if (flo * fmid <= 0.0) {
            hi = mid;
          } else {
            lo = mid;
            flo = fmid;
          }
        }
        candidates.push_back(0.5 * (lo + hi));
      }
      prev = cur;
    }
    if (prev == 0.0) candidates.push_back(1.0);
  }

  for (double p : candidates) {
    MixedProfile mixed(k, std::vector<double>{1.0 - p, p});
    const VerifyResult check = verify_ne(game, mixed, options.verify_eps * std::max(1.0, scale));
    if (!check.ok) continue;
    list.equilibria.push_back(
        Equilibrium{std::move(mixed), p == 0.0 || p == 1.0, false, check.max_gain});
  }
  sort_and_dedupe(list);
  return list;
}

EquilibriumList find_tsne(const NormalFormGame& game, const TwinsLabeling& labeling, double tol,
                          const SolverOptions& options) {
  const int K = labeling.n_clusters();
  if (game.n_players != 2 * K) {
    throw InvalidInputError("twins labeling does not match the game");
  }
  const int S = game.strategies_per_player[0];
  for (int s : game.strategies_per_player) {
    if (s != S) throw InvalidInputError("twins game players must share one strategy set");
  }
  const double scale = payoff_scale(game);
  const double verify_eps = tol * std::max(1.0, scale);

  EquilibriumList list;
  double best_fail = std::numeric_limits<double>::infinity();

  auto consider = [&](MixedProfile&& candidate, bool pure) {
    const VerifyResult check = verify_ne(game, candidate, verify_eps);
    if (check.ok) {
      list.equilibria.push_back(Equilibrium{std::move(candidate), pure, true, check.max_gain});
    } else {
      best_fail = std::min(best_fail, check.max_gain);
    }
  };

  // Pure TSNE: exhaustive over twin-agreeing profiles.
  {
    std::vector<int> cluster_profile(K, 0);
    std::int64_t total = 1;
    for (int i = 0; i < K; ++i) total *= S;
    for (std::int64_t c = 0; c < total; ++c) {
      PureProfile profile(2 * K);
      for (int i = 0; i < K; ++i) {
        profile[labeling.players[i][0]] = cluster_profile[i];
        profile[labeling.players[i][1]] = cluster_profile[i];
      }
      consider(point_mass_profile(game, profile), true);
      for (int i = K - 1; i >= 0; --i) {
        if (++cluster_profile[i] < S) break;
        cluster_profile[i] = 0;
      }
    }
  }

  if (S == 2) {
    // Mixed TSNE via the per-cluster indifference system in the K visit
    // probabilities. Grid seeding, then damped Newton on the interior
    // coordinates of each seed.
    MixedProfile weights(2 * K, std::vector<double>(2, 0.0));
    auto load_weights = [&](const std::vector<double>& p) {
      for (int i = 0; i < K; ++i) {
        for (int t : labeling.players[i]) {
          weights[t][0] = 1.0 - p[i];
          weights[t][1] = p[i];
        }
      }
    };
    auto gap = [&](const std::vector<double>& p, int i) {
      load_weights(p);
      const std::vector<double> values =
          pure_strategy_values(game, weights, labeling.players[i][0]);
      return values[1] - values[0];
    };
    // d gap_i / d p_j, exact: the multilinear form differentiated by swapping
    // each mixing twin of cluster j to the signed vector (-1, +1).
    auto gap_derivative = [&](const std::vector<double>& p, int i, int j) {
      const int focal = labeling.players[i][0];
      double der = 0.0;
      for (int t : labeling.players[j]) {
        if (t == focal) continue;
        load_weights(p);
        weights[t][0] = -1.0;
        weights[t][1] = 1.0;
        const std::vector<double> values = pure_strategy_values(game, weights, focal);
        der += values[1] - values[0];
      }
      return der;
    };
    auto residual = [&](const std::vector<double>& p, const std::vector<int>& active) {
      double r = 0.0;
      for (int i : active) r = std::max(r, std::abs(gap(p, i)));
      return r;
    };

    const double newton_eps = options.newton_tol * std::max(1.0, scale);
    std::int64_t grid_count = 1;
    for (int i = 0; i < K; ++i) {
      grid_count *= options.grid_points + 1;
      if (grid_count > 1'000'000) {
        throw SizeError("mixed TSNE grid too large; reduce grid_points or cluster count");
      }
    }

    std::vector<int> grid_pos(K, 0);
    std::vector<double> p(K), refined(K);
    for (std::int64_t g = 0; g < grid_count; ++g) {
      std::vector<int> active;
      for (int i = 0; i < K; ++i) {
        p[i] = static_cast<double>(grid_pos[i]) / options.grid_points;
        if (grid_pos[i] > 0 && grid_pos[i] < options.grid_points) active.push_back(i);
      }
      for (int i = K - 1; i >= 0; --i) {
        if (++grid_pos[i] <= options.grid_points) break;
        grid_pos[i] = 0;
      }
      if (active.empty()) continue;  // pure corners already enumerated

      refined = p;
      const int na = static_cast<int>(active.size());
      Eigen::MatrixXd jac(na, na);
      Eigen::VectorXd g_vec(na);
      bool converged = false;
      for (int iter = 0; iter < options.newton_max_iters; ++iter) {
        double norm = 0.0;
        for (int r = 0; r < na; ++r) {
          g_vec(r) = gap(refined, active[r]);
          norm = std::max(norm, std::abs(g_vec(r)));
        }
        if (norm <= newton_eps) {
          converged = true;
          break;
        }
        for (int r = 0; r < na; ++r) {
          for (int c = 0; c < na; ++c) {
            jac(r, c) = gap_derivative(refined, active[r], active[c]);
          }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) break;
        const Eigen::VectorXd d = lu.solve(-g_vec);
        double step = 1.0;
        bool accepted = false;
        std::vector<double> trial(refined);
        for (int halving = 0; halving < 12; ++halving) {
          for (int r = 0; r < na; ++r) {
            trial[active[r]] = std::clamp(refined[active[r]] + step * d(r), 0.0, 1.0);
          }
          if (residual(trial, active) < norm) {
            refined = trial;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;
      }
      if (!converged) continue;

      MixedProfile candidate(2 * K);
      bool pure = true;
      for (int i = 0; i < K; ++i) {
        for (int t : labeling.players[i]) candidate[t] = {1.0 - refined[i], refined[i]};
        if (refined[i] != 0.0 && refined[i] != 1.0) pure = false;
      }
      bool duplicate = false;
      for (const Equilibrium& eq : list.equilibria) {
        if (profile_distance(eq.profile, candidate) < 1e-7) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) consider(std::move(candidate), pure);
    }
  } else {
    // Best-effort candidate for wider strategy sets: symmetric replicator
    // dynamics on the cluster distributions.
    std::vector<std::vector<double>> x(K, std::vector<double>(S, 1.0 / S));
    MixedProfile weights(2 * K, std::vector<double>(S, 0.0));
    auto load_weights = [&]() {
      for (int i = 0; i < K; ++i) {
        for (int t : labeling.players[i]) weights[t] = x[i];
      }
    };
    for (int step = 0; step < options.replicator_steps; ++step) {
      load_weights();
      double movement = 0.0;
      for (int i = 0; i < K; ++i) {
        const std::vector<double> values =
            pure_strategy_values(game, weights, labeling.players[i][0]);
        double avg = 0.0;
        for (int s = 0; s < S; ++s) avg += x[i][s] * values[s];
        double total = 0.0;
        for (int s = 0; s < S; ++s) {
          const double next = std::max(0.0, x[i][s] + options.replicator_step * x[i][s] *
                                                          (values[s] - avg) / std::max(1.0, scale));
          movement = std::max(movement, std::abs(next - x[i][s]));
          x[i][s] = next;
          total += next;
        }
        for (int s = 0; s < S; ++s) x[i][s] /= total;
      }
      if (movement < 1e-14) break;
    }
    MixedProfile candidate(2 * K);
    bool pure = true;
    for (int i = 0; i < K; ++i) {
      for (int t : labeling.players[i]) candidate[t] = x[i];
      for (int s = 0; s < S; ++s) {
        if (x[i][s] != 0.0 && x[i][s] != 1.0) pure = false;
      }
    }
    consider(std::move(candidate), pure);
  }

  sort_and_dedupe(list);
  if (list.empty()) {
    throw SolverFailure("no twin-symmetric candidate certified at tolerance " +
                            std::to_string(tol) + "; best candidate epsilon " +
                            std::to_string(best_fail),
                        best_fail);
  }
  return list;
}

}  // namespace cbg
