#pragma once

#include <cstdint>
#include <vector>

#include "cbg/reduced.hpp"

namespace cbg {

// One probability vector per player.
using MixedProfile = std::vector<std::vector<double>>;

struct Equilibrium {
  MixedProfile profile;
  bool pure = false;
  bool twin_symmetric = false;
  double max_gain = 0.0;  // verified maximum deviation gain
};

struct EquilibriumList {
  std::vector<Equilibrium> equilibria;
  bool degenerate = false;

  bool empty() const { return equilibria.empty(); }
  std::size_t size() const { return equilibria.size(); }
};

struct SolverOptions {
  double verify_eps = 1e-8;
  double newton_tol = 1e-10;
  std::int64_t max_profiles = 1 << 20;  // exhaustive-scan guard
  int grid_points = 64;                 // mixed-TSNE seeding resolution
  int newton_max_iters = 100;
  int replicator_steps = 100000;
  double replicator_step = 1e-2;
};

// Expectation of the payoff tensor under the independent product distribution.
std::vector<double> expected_payoffs(const NormalFormGame& game, const MixedProfile& profile);

// Expected payoff of each pure strategy of `player` with the remaining
// players held at the given weight vectors. Weights may be signed, which
// makes this the building block for derivatives of the multilinear form.
std::vector<double> pure_strategy_values(const NormalFormGame& game, const MixedProfile& weights,
                                         int player);

struct BestResponse {
  double gain = 0.0;
  int strategy = 0;
};

BestResponse best_response_gain(const NormalFormGame& game, const MixedProfile& profile,
                                int player);

struct VerifyResult {
  bool ok = false;
  double max_gain = 0.0;
};

VerifyResult verify_ne(const NormalFormGame& game, const MixedProfile& profile, double eps);

// Exhaustive scan over all pure profiles.
EquilibriumList enumerate_pure_ne(const NormalFormGame& game, const SolverOptions& options = {});

// Twin-symmetric Nash equilibria of a twins game: all pure ones, plus mixed
// ones for 2-strategy games via the per-cluster indifference system (grid
// seeding + damped Newton). Throws SolverFailure when nothing certifies.
EquilibriumList find_tsne(const NormalFormGame& game, const TwinsLabeling& labeling,
                          double tol = 1e-8, const SolverOptions& options = {});

// All equilibria of a nondegenerate 2-player game by equal-size support
// enumeration; degenerate games yield a representative set and a flag.
EquilibriumList bimatrix_all_ne(const NormalFormGame& game, const SolverOptions& options = {});

// Symmetric equilibria of a symmetric anonymous k-player 2-strategy game:
// roots of the degree-(k-1) indifference polynomial in the common visit
// probability, plus consistent boundary points.
EquilibriumList symmetric_msne_2strategy(const NormalFormGame& game,
                                         const SolverOptions& options = {});

}  // namespace cbg
