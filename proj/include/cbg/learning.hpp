#pragma once

#include <cstdint>
#include <vector>

#include "cbg/games.hpp"

namespace cbg {

struct Clustering {
  std::vector<int> assignment;  // length N, values in [0, k); no cluster empty
  int k = 0;

  int n_agents() const { return static_cast<int>(assignment.size()); }
  int cluster_size(int cluster) const;
};

// Agents embedded in strategy space: entry (a, s) is the mean payoff agent a
// earned when playing s. Entries for never-played strategies are imputed with
// the agent's overall mean payoff and flagged.
struct FeatureMatrix {
  int n_agents = 0;
  int n_strategies = 0;
  std::vector<double> values;  // row-major
  std::vector<char> imputed;   // same shape

  double at(int a, int s) const { return values[a * n_strategies + s]; }
  bool is_imputed(int a, int s) const { return imputed[a * n_strategies + s] != 0; }
};

struct ClusterDistributions {
  int k = 0;
  int n_strategies = 0;
  std::vector<double> p;  // row-major k x n_strategies, rows sum to 1

  double at(int cluster, int s) const { return p[cluster * n_strategies + s]; }
};

// The linear payoff estimators: one equation per (cluster, strategy). Each
// equation has one coefficient per joint cluster-strategy profile plus a
// constant offset stored last. Profile coefficients are ordered
// lexicographically with cluster 0 most significant.
struct RegressorSet {
  int k = 0;
  int n_strategies = 0;
  std::vector<std::vector<double>> coef;  // index cluster * n_strategies + s

  int n_monomials() const;
  const std::vector<double>& equation(int cluster, int s) const {
    return coef[cluster * n_strategies + s];
  }
  std::vector<double>& equation(int cluster, int s) { return coef[cluster * n_strategies + s]; }
  static int profile_coef_index(const std::vector<int>& cluster_profile, int n_strategies);
};

struct ClusterModel {
  Clustering clustering;
  RegressorSet regressors;
  double sse = 0.0;
  double r2 = 0.0;
};

FeatureMatrix agent_features(const ObservationSet& obs);

// Lloyd's iteration with random-partition initialization; empty clusters are
// repaired by moving in the point farthest from its centroid.
Clustering kmeans(const FeatureMatrix& features, int k, Rng& rng, int max_iters = 100);

// Per-cluster strategy proportions in one profile, counting every member.
ClusterDistributions empirical_cluster_distribution(const PureProfile& profile,
                                                    const Clustering& clustering,
                                                    int n_strategies);

// All n_strategies^k products of per-cluster probabilities, in coefficient
// order. They sum to 1 for any valid ClusterDistributions.
void profile_monomials(const ClusterDistributions& dists, std::vector<double>& out);

double predict_payoff(const RegressorSet& reg, int cluster, int strategy,
                      const ClusterDistributions& dists);

struct RegressionInstance {
  std::vector<double> monomials;  // constant term implicit
  double target = 0.0;
};

struct RegressionData {
  int k = 0;
  int n_strategies = 0;
  std::vector<std::vector<RegressionInstance>> per_equation;  // cluster * n_strategies + s
};

// One instance per (observation, agent), routed to the agent's
// (cluster, strategy) equation. Every equation must receive at least one
// instance or a CoverageError lists the missing pairs.
RegressionData build_regression_data(const ObservationSet& obs, const Clustering& clustering);

// Least squares per equation; the monomials sum to 1 so the system is rank
// deficient by construction and the minimum-norm solution is used.
RegressorSet fit_regressors(const RegressionData& data);

struct FitQuality {
  double sse = 0.0;
  double r2 = 0.0;
};

FitQuality model_sse(const RegressorSet& reg, const ObservationSet& obs,
                     const Clustering& clustering);

// Per-agent standardization to zero mean, unit variance.
ObservationSet standardize_payoffs(const ObservationSet& obs);

struct LearnOptions {
  int restarts = 10;
  int kmeans_max_iters = 100;
  bool normalize_payoffs = false;
};

// Runs k-means `restarts` times on independent streams, fits regressors for
// each clustering and keeps the model with the lowest SSE. Restarts whose
// clustering lacks coverage are skipped; if every restart fails the first
// coverage error is rethrown.
ClusterModel learn_model(const ObservationSet& obs, int k, const LearnOptions& options,
                         std::uint64_t seed);

}  // namespace cbg
