#include "cbg/games.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbg/errors.hpp"

namespace cbg {

namespace {

void check_profile(const GameDescriptor& d, const PureProfile& profile) {
  if (static_cast<int>(profile.size()) != d.n_agents) {
    throw InvalidInputError("profile has " + std::to_string(profile.size()) +
                            " entries, expected " + std::to_string(d.n_agents));
  }
  for (int s : profile) {
    if (s < 0 || s >= d.n_strategies) {
      throw InvalidInputError("strategy index " + std::to_string(s) + " outside [0, " +
                              std::to_string(d.n_strategies) + ")");
    }
  }
}

}  // namespace

int SantaFeSpec::capacity() const {
  // tiny slack so e.g. 0.7 * 10 lands on 7 despite binary rounding
  return static_cast<int>(std::floor(capacity_fraction * n_agents + 1e-9));
}

GameDescriptor game_descriptor(const Game& game) {
  if (const auto* vendor = std::get_if<VendorGameSpec>(&game)) return vendor->descriptor();
  return std::get<SantaFeSpec>(game).descriptor();
}

std::vector<double> vendor_payoffs(const VendorGameSpec& spec, const PureProfile& profile) {
  check_profile(spec.descriptor(), profile);
  const int n = spec.n_agents();
  std::vector<double> out(spec.bias);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (y != x && profile[y] == profile[x]) out[x] += spec.impact(x, y);
    }
  }
  return out;
}

std::vector<double> santafe_payoffs(const SantaFeSpec& spec, const PureProfile& profile) {
  check_profile(spec.descriptor(), profile);
  const int visitors = static_cast<int>(std::count(profile.begin(), profile.end(), 1));
  const double visit_payoff = visitors <= spec.capacity() ? spec.u_visit_fits : spec.u_visit_full;
  std::vector<double> out(spec.n_agents);
  for (int x = 0; x < spec.n_agents; ++x) out[x] = profile[x] == 1 ? visit_payoff : spec.u_home;
  return out;
}

std::vector<double> game_payoffs(const Game& game, const PureProfile& profile) {
  if (const auto* vendor = std::get_if<VendorGameSpec>(&game)) {
    return vendor_payoffs(*vendor, profile);
  }
  return santafe_payoffs(std::get<SantaFeSpec>(game), profile);
}

double counterfactual_payoff(const Game& game, const PureProfile& profile, int agent, int alt) {
  const GameDescriptor d = game_descriptor(game);
  check_profile(d, profile);
  if (agent < 0 || agent >= d.n_agents) {
    throw InvalidInputError("agent index " + std::to_string(agent) + " out of range");
  }
  if (alt < 0 || alt >= d.n_strategies) {
    throw InvalidInputError("deviation strategy " + std::to_string(alt) + " out of range");
  }
  if (const auto* vendor = std::get_if<VendorGameSpec>(&game)) {
    double v = vendor->bias[agent];
    for (int y = 0; y < vendor->n_agents(); ++y) {
      if (y != agent && profile[y] == alt) v += vendor->impact(agent, y);
    }
    return v;
  }
  const auto& spec = std::get<SantaFeSpec>(game);
  if (alt == 0) return spec.u_home;
  int visitors = static_cast<int>(std::count(profile.begin(), profile.end(), 1));
  if (profile[agent] == 0) ++visitors;
  return visitors <= spec.capacity() ? spec.u_visit_fits : spec.u_visit_full;
}

VendorGameSpec sample_vendor_game(int n_agents, int n_types, int n_locations, double sigma2,
                                  Rng& rng) {
  if (n_agents < 1) throw InvalidInputError("need at least one agent");
  if (n_types < 1) throw InvalidInputError("need at least one product type");
  if (n_locations < 2) throw InvalidInputError("need at least two locations");
  if (sigma2 < 0.0) throw InvalidInputError("sigma2 must be nonnegative");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> substitute(-3.0, 0.0);
  std::uniform_real_distribution<double> complement(0.0, 3.0);

  VendorGameSpec spec;
  spec.n_types = n_types;
  spec.n_locations = n_locations;
  spec.sigma2 = sigma2;
  spec.type_matrix.assign(static_cast<std::size_t>(n_types) * n_types, 0.0);

  constexpr int kMaxRetries = 1000;
  bool has_complement = false;
  for (int attempt = 0; attempt < kMaxRetries && !has_complement; ++attempt) {
    for (int i = 0; i < n_types; ++i) {
      for (int j = 0; j < n_types; ++j) {
        double& cell = spec.type_matrix[i * n_types + j];
        if (i == j) {
          cell = substitute(rng);
          continue;
        }
        const double r = unit(rng);
        if (r < 0.1) {
          cell = 0.0;
        } else if (r < 0.55) {
          cell = substitute(rng);
        } else {
          cell = complement(rng);
          has_complement = true;
        }
      }
    }
  }
  if (!has_complement) {
    throw GenerationError("no complementary interaction after " + std::to_string(kMaxRetries) +
                          " type-matrix draws");
  }

  // types spread evenly across the population; agents are exchangeable
  spec.agent_type.resize(n_agents);
  for (int x = 0; x < n_agents; ++x) spec.agent_type[x] = x % n_types;

  // per-agent baseline, kept small next to the interaction sums
  std::uniform_real_distribution<double> bias_draw(-1.0, 1.0);
  spec.bias.resize(n_agents);
  for (double& b : spec.bias) b = bias_draw(rng);

  spec.interaction.assign(static_cast<std::size_t>(n_agents) * n_agents, 0.0);
  std::normal_distribution<double> noise(0.0, sigma2 > 0.0 ? std::sqrt(sigma2) : 1.0);
  for (int x = 0; x < n_agents; ++x) {
    for (int y = 0; y < n_agents; ++y) {
      if (x == y) continue;  // diagonal never sampled, never applied
      double value = spec.type_mean(spec.agent_type[x], spec.agent_type[y]);
      if (sigma2 > 0.0) value += noise(rng);
      spec.interaction[x * n_agents + y] = value;
    }
  }
  return spec;
}

ObservationSet generate_observations(const Game& game, int m, Rng& rng) {
  if (m < 1) throw InvalidInputError("observation count must be >= 1");
  const GameDescriptor d = game_descriptor(game);
  std::uniform_int_distribution<int> pick(0, d.n_strategies - 1);
  ObservationSet set;
  set.descriptor = d;
  set.observations.reserve(m);
  for (int i = 0; i < m; ++i) {
    Observation obs;
    obs.profile.resize(d.n_agents);
    for (int& s : obs.profile) s = pick(rng);
    obs.payoffs = game_payoffs(game, obs.profile);
    set.observations.push_back(std::move(obs));
  }
  return set;
}

}  // namespace cbg
