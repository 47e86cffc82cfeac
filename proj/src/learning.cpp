#include "cbg/learning.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cbg/errors.hpp"

namespace cbg {

namespace {

int checked_monomial_count(int n_strategies, int k) {
  std::int64_t m = 1;
  for (int i = 0; i < k; ++i) {
    m *= n_strategies;
    if (m > (1 << 20)) throw SizeError("strategy profile space too large for explicit regressors");
  }
  return static_cast<int>(m);
}

double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

int Clustering::cluster_size(int cluster) const {
  return static_cast<int>(std::count(assignment.begin(), assignment.end(), cluster));
}

int RegressorSet::n_monomials() const { return checked_monomial_count(n_strategies, k); }

int RegressorSet::profile_coef_index(const std::vector<int>& cluster_profile, int n_strategies) {
  int idx = 0;
  for (int s : cluster_profile) idx = idx * n_strategies + s;
  return idx;
}

FeatureMatrix agent_features(const ObservationSet& obs) {
  if (obs.observations.empty()) throw InvalidInputError("observation set is empty");
  const int n = obs.descriptor.n_agents;
  const int S = obs.descriptor.n_strategies;
  std::vector<double> sum(static_cast<std::size_t>(n) * S, 0.0);
  std::vector<int> count(static_cast<std::size_t>(n) * S, 0);
  std::vector<double> total(n, 0.0);
  for (const Observation& ob : obs.observations) {
    for (int a = 0; a < n; ++a) {
      const int cell = a * S + ob.profile[a];
      sum[cell] += ob.payoffs[a];
      count[cell] += 1;
      total[a] += ob.payoffs[a];
    }
  }
  FeatureMatrix f;
  f.n_agents = n;
  f.n_strategies = S;
  f.values.resize(sum.size());
  f.imputed.assign(sum.size(), 0);
  for (int a = 0; a < n; ++a) {
    const double overall = total[a] / obs.size();
    for (int s = 0; s < S; ++s) {
      const int cell = a * S + s;
      if (count[cell] > 0) {
        f.values[cell] = sum[cell] / count[cell];
      } else {
        f.values[cell] = overall;
        f.imputed[cell] = 1;
      }
    }
  }
  return f;
}

Clustering kmeans(const FeatureMatrix& features, int k, Rng& rng, int max_iters) {
  const int n = features.n_agents;
  const int d = features.n_strategies;
  if (k < 1) throw InvalidInputError("k must be positive");
  if (k > n) throw InvalidInputError("k = " + std::to_string(k) + " exceeds " +
                                     std::to_string(n) + " agents");

  std::vector<int> assign(n);
  std::uniform_int_distribution<int> pick(0, k - 1);
  for (int& a : assign) a = pick(rng);

  std::vector<double> centroids(static_cast<std::size_t>(k) * d, 0.0);
  std::vector<int> sizes(k, 0);

  auto recompute_centroids = [&]() {
    std::fill(centroids.begin(), centroids.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int a = 0; a < n; ++a) {
      sizes[assign[a]] += 1;
      for (int j = 0; j < d; ++j) centroids[assign[a] * d + j] += features.values[a * d + j];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        for (int j = 0; j < d; ++j) centroids[c * d + j] /= sizes[c];
      }
    }
  };

  // Moves the point farthest from its centroid into each empty cluster.
  auto repair_empty = [&]() {
    recompute_centroids();
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      int worst = -1;
      double worst_dist = -1.0;
      for (int a = 0; a < n; ++a) {
        if (sizes[assign[a]] < 2) continue;
        const double dist = sq_dist(&features.values[a * d], &centroids[assign[a] * d], d);
        if (dist > worst_dist) {
          worst_dist = dist;
          worst = a;
        }
      }
      if (worst < 0) throw InvalidInputError("cannot repair empty cluster");
      sizes[assign[worst]] -= 1;
      assign[worst] = c;
      sizes[c] = 1;
      recompute_centroids();
    }
  };

  repair_empty();
  for (int iter = 0; iter < max_iters; ++iter) {
    recompute_centroids();
    bool changed = false;
    for (int a = 0; a < n; ++a) {
      int best = 0;
      double best_dist = sq_dist(&features.values[a * d], &centroids[0], d);
      for (int c = 1; c < k; ++c) {
        const double dist = sq_dist(&features.values[a * d], &centroids[c * d], d);
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      if (best != assign[a]) {
        assign[a] = best;
        changed = true;
      }
    }
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int a : assign) sizes[a] += 1;
    if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
      repair_empty();
      changed = true;
    }
    if (!changed) break;
  }
  return Clustering{std::move(assign), k};
}

ClusterDistributions empirical_cluster_distribution(const PureProfile& profile,
                                                    const Clustering& clustering,
                                                    int n_strategies) {
  const int n = clustering.n_agents();
  if (static_cast<int>(profile.size()) != n) {
    throw InvalidInputError("profile and clustering disagree on the number of agents");
  }
  ClusterDistributions dists;
  dists.k = clustering.k;
  dists.n_strategies = n_strategies;
  dists.p.assign(static_cast<std::size_t>(clustering.k) * n_strategies, 0.0);
  std::vector<int> sizes(clustering.k, 0);
  for (int a = 0; a < n; ++a) {
    const int c = clustering.assignment[a];
    sizes[c] += 1;
    dists.p[c * n_strategies + profile[a]] += 1.0;
  }
  for (int c = 0; c < clustering.k; ++c) {
    if (sizes[c] == 0) throw InvalidInputError("cluster " + std::to_string(c) + " is empty");
    for (int s = 0; s < n_strategies; ++s) dists.p[c * n_strategies + s] /= sizes[c];
  }
  return dists;
}

void profile_monomials(const ClusterDistributions& dists, std::vector<double>& out) {
  const int K = dists.k;
  const int S = dists.n_strategies;
  const int m = checked_monomial_count(S, K);
  out.assign(m, 0.0);
  std::vector<int> sbar(K, 0);
  for (int idx = 0; idx < m; ++idx) {
    double prod = 1.0;
    for (int j = 0; j < K; ++j) prod *= dists.at(j, sbar[j]);
    out[idx] = prod;
    for (int j = K - 1; j >= 0; --j) {  // cluster 0 most significant
      if (++sbar[j] < S) break;
      sbar[j] = 0;
    }
  }
}

double predict_payoff(const RegressorSet& reg, int cluster, int strategy,
                      const ClusterDistributions& dists) {
  if (dists.k != reg.k || dists.n_strategies != reg.n_strategies) {
    throw InvalidInputError("cluster distributions do not match the regressors");
  }
  static thread_local std::vector<double> monomials;
  profile_monomials(dists, monomials);
  const std::vector<double>& eq = reg.equation(cluster, strategy);
  double value = eq.back();  // offset
  for (std::size_t i = 0; i < monomials.size(); ++i) value += eq[i] * monomials[i];
  return value;
}

RegressionData build_regression_data(const ObservationSet& obs, const Clustering& clustering) {
  const int n = obs.descriptor.n_agents;
  const int S = obs.descriptor.n_strategies;
  if (clustering.n_agents() != n) {
    throw InvalidInputError("clustering does not match the observation set");
  }
  RegressionData data;
  data.k = clustering.k;
  data.n_strategies = S;
  data.per_equation.resize(static_cast<std::size_t>(clustering.k) * S);

  std::vector<double> monomials;
  for (const Observation& ob : obs.observations) {
    const ClusterDistributions dists = empirical_cluster_distribution(ob.profile, clustering, S);
    profile_monomials(dists, monomials);
    for (int a = 0; a < n; ++a) {
      const int eq = clustering.assignment[a] * S + ob.profile[a];
      data.per_equation[eq].push_back(RegressionInstance{monomials, ob.payoffs[a]});
    }
  }

  std::vector<std::pair<int, int>> missing;
  for (int c = 0; c < clustering.k; ++c) {
    for (int s = 0; s < S; ++s) {
      if (data.per_equation[c * S + s].empty()) missing.emplace_back(c, s);
    }
  }
  if (!missing.empty()) {
    std::string what = "no data instance for (cluster, strategy):";
    for (const auto& [c, s] : missing) {
      what += " (" + std::to_string(c) + ", " + std::to_string(s) + ")";
    }
    throw CoverageError(what, missing);
  }
  return data;
}

RegressorSet fit_regressors(const RegressionData& data) {
  RegressorSet reg;
  reg.k = data.k;
  reg.n_strategies = data.n_strategies;
  reg.coef.resize(data.per_equation.size());
  for (std::size_t eq = 0; eq < data.per_equation.size(); ++eq) {
    const auto& rows = data.per_equation[eq];
    if (rows.empty()) {
      const int c = static_cast<int>(eq) / data.n_strategies;
      const int s = static_cast<int>(eq) % data.n_strategies;
      throw CoverageError("empty dataset for (cluster " + std::to_string(c) + ", strategy " +
                              std::to_string(s) + ")",
                          {{c, s}});
    }
    const int m = static_cast<int>(rows[0].monomials.size());
    Eigen::MatrixXd design(rows.size(), m + 1);
    Eigen::VectorXd target(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (int j = 0; j < m; ++j) design(r, j) = rows[r].monomials[j];
      design(r, m) = 1.0;  // constant column, linearly dependent on the monomials
      target(r) = rows[r].target;
    }
    // Minimum-norm least squares; the system is structurally rank deficient.
    Eigen::VectorXd beta =
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(design).solve(target);
    reg.coef[eq].assign(beta.data(), beta.data() + beta.size());
  }
  return reg;
}

FitQuality model_sse(const RegressorSet& reg, const ObservationSet& obs,
                     const Clustering& clustering) {
  const int n = obs.descriptor.n_agents;
  const int S = obs.descriptor.n_strategies;
  double sse = 0.0;
  double sum = 0.0;
  double count = 0.0;
  std::vector<double> monomials;
  std::vector<double> targets;
  targets.reserve(static_cast<std::size_t>(n) * obs.size());
  for (const Observation& ob : obs.observations) {
    const ClusterDistributions dists = empirical_cluster_distribution(ob.profile, clustering, S);
    profile_monomials(dists, monomials);
    for (int a = 0; a < n; ++a) {
      const std::vector<double>& eq = reg.equation(clustering.assignment[a], ob.profile[a]);
      double pred = eq.back();
      for (std::size_t i = 0; i < monomials.size(); ++i) pred += eq[i] * monomials[i];
      const double err = pred - ob.payoffs[a];
      sse += err * err;
      sum += ob.payoffs[a];
      count += 1.0;
      targets.push_back(ob.payoffs[a]);
    }
  }
  const double mean = sum / count;
  double tss = 0.0;
  for (double y : targets) tss += (y - mean) * (y - mean);
  double r2;
  if (tss > 0.0) {
    r2 = 1.0 - sse / tss;
  } else {
    r2 = sse <= 1e-12 ? 1.0 : 0.0;  // constant targets
  }
  return FitQuality{sse, r2};
}

ObservationSet standardize_payoffs(const ObservationSet& obs) {
  if (obs.observations.empty()) throw InvalidInputError("observation set is empty");
  const int n = obs.descriptor.n_agents;
  const int m = obs.size();
  std::vector<double> mean(n, 0.0);
  std::vector<double> var(n, 0.0);
  for (const Observation& ob : obs.observations) {
    for (int a = 0; a < n; ++a) mean[a] += ob.payoffs[a];
  }
  for (int a = 0; a < n; ++a) mean[a] /= m;
  for (const Observation& ob : obs.observations) {
    for (int a = 0; a < n; ++a) {
      const double d = ob.payoffs[a] - mean[a];
      var[a] += d * d;
    }
  }
  ObservationSet out;
  out.descriptor = obs.descriptor;
  out.observations = obs.observations;
  for (int a = 0; a < n; ++a) {
    const double sd = std::sqrt(var[a] / m);
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (Observation& ob : out.observations) ob.payoffs[a] = (ob.payoffs[a] - mean[a]) * scale;
  }
  return out;
}

ClusterModel learn_model(const ObservationSet& obs, int k, const LearnOptions& options,
                         std::uint64_t seed) {
  if (options.restarts < 1) throw InvalidInputError("restarts must be >= 1");
  const ObservationSet* train = &obs;
  ObservationSet normalized;
  if (options.normalize_payoffs) {
    normalized = standardize_payoffs(obs);
    train = &normalized;
  }
  const FeatureMatrix features = agent_features(*train);

  std::optional<ClusterModel> best;
  std::optional<CoverageError> first_failure;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Clustering clustering = kmeans(features, k, rng, options.kmeans_max_iters);
    try {
      const RegressionData data = build_regression_data(*train, clustering);
      RegressorSet reg = fit_regressors(data);
      const FitQuality quality = model_sse(reg, *train, clustering);
      if (!best || quality.sse < best->sse) {
        best = ClusterModel{std::move(clustering), std::move(reg), quality.sse, quality.r2};
      }
    } catch (const CoverageError& e) {
      if (!first_failure) {
        first_failure = CoverageError("restart " + std::to_string(r) + ": " + e.what(), e.missing);
      }
    }
  }
  if (!best) throw *first_failure;
  return *best;
}

}  // namespace cbg
