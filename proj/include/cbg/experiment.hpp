#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbg/games.hpp"
#include "cbg/learning.hpp"
#include "cbg/reduced.hpp"
#include "cbg/solvers.hpp"

namespace cbg {

// A mixed strategy for every agent of the full game plus where it came from.
// Cluster-derived plans give every agent of a cluster the same distribution.
struct AssignmentPlan {
  std::vector<std::vector<double>> strategies;
  std::string provenance;
};

struct PlayRecord {
  std::vector<PureProfile> profiles;
  std::vector<std::vector<double>> payoffs;  // per iteration, per agent

  int iterations() const { return static_cast<int>(profiles.size()); }
};

struct ResultRow {
  int trial = 0;
  std::string method;
  bool failed = false;
  std::string error;
  double mean_payoff = 0.0;
  double mean_regret = 0.0;
  double mean_visit_prob = 0.0;  // bar game only, NaN otherwise
  int n_equilibria = 0;
  int selected = -1;  // index of the evaluated plan backing this row
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::map<std::string, std::string> metadata;
};

struct ExperimentConfig {
  std::string game;  // "vendor" | "santafe"
  int agents = 100;
  int types = 2;
  int locations = 2;
  double sigma2 = 1.5;
  double capacity = 0.5;
  double u_visit_fits = 4.0;
  double u_visit_full = -6.0;
  double u_home = 0.0;
  int k = 2;
  int observations = 15;
  int trials = 10;
  int restarts = 10;
  int iterations = 100;
  double verify_eps = 1e-8;
  double newton_tol = 1e-10;
  bool normalize_payoffs = false;
  std::uint64_t seed = 1;
  std::vector<std::string> methods;  // empty: family default
  std::string out_dir;               // empty: nothing persisted
};

// Fills defaulted methods and throws ConfigError on anything inconsistent.
void validate_config(ExperimentConfig& config);

// Each agent adopts the pure strategy with its highest observed mean payoff;
// ties go to the lowest index, never-observed strategies are excluded.
AssignmentPlan baseline_all(const ObservationSet& obs);

// Each cluster adopts the pure strategy with the highest mean payoff over all
// member instances; all members play it.
AssignmentPlan baseline_cll(const ObservationSet& obs, const Clustering& clustering);

// Plays `iterations` rounds, each agent sampling independently from its
// mixed strategy.
PlayRecord assign_and_simulate(const Game& game, const AssignmentPlan& plan, int iterations,
                               Rng& rng);

// Average per-iteration gap between the best fixed pure strategy in hindsight
// (unilateral counterfactuals) and the realized payoffs.
double external_regret(const Game& game, const PlayRecord& record, int agent);

struct SantafeMsne {
  double p = 0.0;
  bool interior = true;  // false when the returned value is a boundary
};

// The symmetric mixed equilibrium of the bar game: the visit probability at
// which one agent is indifferent given N-1 independent visitors.
SantafeMsne santafe_true_msne(const SantaFeSpec& spec);

ResultTable run_experiment(const ExperimentConfig& config);

std::string result_table_tsv(const ResultTable& table);

// Per-method mean and standard deviation of the assigned visit probability
// (bar-game experiments), as plot-ready rows "capacity method mean std".
std::string visit_prob_summary_tsv(const ResultTable& table, double capacity);

}  // namespace cbg
