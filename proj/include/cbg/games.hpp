#pragma once

#include <variant>
#include <vector>

#include "cbg/rng.hpp"

namespace cbg {

enum class GameKind { vendor, santafe };

struct GameDescriptor {
  int n_agents = 0;
  int n_strategies = 0;  // all agents share the same pure-strategy set
  GameKind kind = GameKind::vendor;
};

// One strategy index per agent, each in [0, n_strategies).
using PureProfile = std::vector<int>;

// A vendor game instance. interaction(x, y) is the payoff impact vendor y has
// on vendor x when the two share a location; the diagonal is never applied
// (an agent does not interact with itself).
struct VendorGameSpec {
  int n_types = 0;
  std::vector<double> type_matrix;  // n_types x n_types, row-major
  std::vector<double> interaction;  // N x N, row-major
  std::vector<double> bias;         // length N
  std::vector<int> agent_type;      // length N
  int n_locations = 0;
  double sigma2 = 0.0;

  int n_agents() const { return static_cast<int>(bias.size()); }
  double type_mean(int i, int j) const { return type_matrix[i * n_types + j]; }
  double impact(int x, int y) const { return interaction[x * n_agents() + y]; }
  GameDescriptor descriptor() const { return {n_agents(), n_locations, GameKind::vendor}; }
};

// Bar game: strategy 0 stays home, strategy 1 visits the bar. Visitors fit
// comfortably while attendance stays within floor(capacity_fraction * N).
struct SantaFeSpec {
  int n_agents = 0;
  double capacity_fraction = 0.5;
  double u_visit_fits = 4.0;
  double u_visit_full = -6.0;
  double u_home = 0.0;

  int capacity() const;
  GameDescriptor descriptor() const { return {n_agents, 2, GameKind::santafe}; }
};

using Game = std::variant<VendorGameSpec, SantaFeSpec>;

GameDescriptor game_descriptor(const Game& game);

std::vector<double> vendor_payoffs(const VendorGameSpec& spec, const PureProfile& profile);
std::vector<double> santafe_payoffs(const SantaFeSpec& spec, const PureProfile& profile);
std::vector<double> game_payoffs(const Game& game, const PureProfile& profile);

// Payoff `agent` would receive if it alone switched to `alt`, everyone else
// playing as in `profile`.
double counterfactual_payoff(const Game& game, const PureProfile& profile, int agent, int alt);

// Random instance with the standard relation mix: neutral 0.1, substitute
// 0.45, complement 0.45; resampled until at least one complementary relation
// is present. Diagonal types are substitutes for themselves.
VendorGameSpec sample_vendor_game(int n_agents, int n_types, int n_locations, double sigma2,
                                  Rng& rng);

struct Observation {
  PureProfile profile;
  std::vector<double> payoffs;
};

struct ObservationSet {
  GameDescriptor descriptor;
  std::vector<Observation> observations;
  int size() const { return static_cast<int>(observations.size()); }
};

// m profiles drawn agent-wise i.i.d. uniform over the strategy set, with
// payoffs evaluated in the game.
ObservationSet generate_observations(const Game& game, int m, Rng& rng);

}  // namespace cbg
