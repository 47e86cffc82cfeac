#include "cbg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>

#include "cbg/bundle.hpp"
#include "cbg/detail/text.hpp"
#include "cbg/errors.hpp"

namespace cbg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::map<std::string, int>& method_streams() {
  static const std::map<std::string, int> ids{
      {"all", 0},       {"cll", 1},  {"kplayer", 2},   {"twins", 3},
      {"wel2", 4},      {"wel5", 5}, {"wel2-best", 6}, {"wel5-best", 7},
  };
  return ids;
}

struct PlanEval {
  AssignmentPlan plan;
  PlayRecord record;
  double mean_payoff = 0.0;
  double mean_regret = 0.0;
};

PlanEval evaluate_plan(const Game& game, AssignmentPlan plan, int iterations, Rng& rng) {
  PlanEval eval;
  eval.record = assign_and_simulate(game, plan, iterations, rng);
  const GameDescriptor d = game_descriptor(game);
  double payoff_sum = 0.0;
  for (const std::vector<double>& payoffs : eval.record.payoffs) {
    for (double v : payoffs) payoff_sum += v;
  }
  eval.mean_payoff = payoff_sum / (static_cast<double>(iterations) * d.n_agents);
  double regret_sum = 0.0;
  for (int a = 0; a < d.n_agents; ++a) regret_sum += external_regret(game, eval.record, a);
  eval.mean_regret = regret_sum / d.n_agents;
  eval.plan = std::move(plan);
  return eval;
}

void merge_equilibria(EquilibriumList& into, const EquilibriumList& from) {
  for (const Equilibrium& eq : from.equilibria) {
    bool duplicate = false;
    for (const Equilibrium& have : into.equilibria) {
      double dist = 0.0;
      for (std::size_t p = 0; p < eq.profile.size(); ++p) {
        for (std::size_t s = 0; s < eq.profile[p].size(); ++s) {
          dist = std::max(dist, std::abs(eq.profile[p][s] - have.profile[p][s]));
        }
      }
      if (dist < 1e-7) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) into.equilibria.push_back(eq);
  }
  into.degenerate = into.degenerate || from.degenerate;
}

// One candidate assignment per equilibrium found by the method's solver.
// `select_best` is set for the WEL "best NE found" variants; every other
// method reports its worst equilibrium by mean regret.
std::vector<AssignmentPlan> build_plans(const std::string& method, const Game& game,
                                        const ObservationSet& obs, const ClusterModel& model,
                                        const ExperimentConfig& cfg, bool& select_best) {
  select_best = false;
  SolverOptions sopts;
  sopts.verify_eps = cfg.verify_eps;
  sopts.newton_tol = cfg.newton_tol;
  const GameDescriptor d = game_descriptor(game);
  std::vector<AssignmentPlan> plans;

  if (method == "all") {
    plans.push_back(baseline_all(obs));
  } else if (method == "cll") {
    plans.push_back(baseline_cll(obs, model.clustering));
  } else if (method == "twins") {
    const auto [twins_game, labeling] = build_twins_game(model);
    const EquilibriumList eqs = find_tsne(twins_game, labeling, cfg.verify_eps, sopts);
    for (const Equilibrium& eq : eqs.equilibria) {
      AssignmentPlan plan;
      plan.provenance = "twins-TSNE";
      plan.strategies.resize(d.n_agents);
      for (int a = 0; a < d.n_agents; ++a) {
        plan.strategies[a] = eq.profile[labeling.players[model.clustering.assignment[a]][0]];
      }
      plans.push_back(std::move(plan));
    }
  } else if (method == "kplayer") {
    const NormalFormGame reduced = build_kplayer_game(model);
    const EquilibriumList eqs =
        reduced.n_players == 2 ? bimatrix_all_ne(reduced, sopts) : enumerate_pure_ne(reduced, sopts);
    for (const Equilibrium& eq : eqs.equilibria) {
      AssignmentPlan plan;
      plan.provenance = "kplayer-NE";
      plan.strategies.resize(d.n_agents);
      for (int a = 0; a < d.n_agents; ++a) {
        plan.strategies[a] = eq.profile[model.clustering.assignment[a]];
      }
      plans.push_back(std::move(plan));
    }
  } else if (method.rfind("wel", 0) == 0) {
    const auto* spec = std::get_if<SantaFeSpec>(&game);
    if (spec == nullptr) throw InvalidInputError("WEL methods apply to the bar game only");
    const int groups = method.rfind("wel2", 0) == 0 ? 2 : 5;
    select_best = method.size() > 4;  // "-best" suffix
    const NormalFormGame reduced = build_wel_game(*spec, groups);
    EquilibriumList eqs;
    if (select_best) {
      eqs = enumerate_pure_ne(reduced, sopts);
      if (groups == 2) merge_equilibria(eqs, bimatrix_all_ne(reduced, sopts));
      merge_equilibria(eqs, symmetric_msne_2strategy(reduced, sopts));
    } else {
      eqs = symmetric_msne_2strategy(reduced, sopts);
    }
    const int per_group = spec->n_agents / groups;
    const std::string provenance =
        "WEL-" + std::to_string(groups) + (select_best ? "-best" : "");
    for (const Equilibrium& eq : eqs.equilibria) {
      AssignmentPlan plan;
      plan.provenance = provenance;
      plan.strategies.resize(d.n_agents);
      for (int a = 0; a < d.n_agents; ++a) plan.strategies[a] = eq.profile[a / per_group];
      plans.push_back(std::move(plan));
    }
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  return plans;
}

std::string trial_dir_name(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial-%03d", trial);
  return buf;
}

}  // namespace

void validate_config(ExperimentConfig& config) {
  if (config.game != "vendor" && config.game != "santafe") {
    throw ConfigError("game must be 'vendor' or 'santafe'");
  }
  if (config.agents < 1) throw ConfigError("agents must be >= 1");
  if (config.observations < 1) throw ConfigError("observations must be >= 1");
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  if (config.restarts < 1) throw ConfigError("restarts must be >= 1");
  if (config.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (config.k < 1 || config.k > config.agents) throw ConfigError("k must lie in [1, agents]");
  if (config.verify_eps <= 0.0 || config.newton_tol <= 0.0) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (config.game == "vendor") {
    if (config.types < 1) throw ConfigError("types must be >= 1");
    if (config.locations < 2) throw ConfigError("locations must be >= 2");
    if (config.sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
  } else {
    if (!(config.capacity > 0.0 && config.capacity < 1.0)) {
      throw ConfigError("capacity must lie in (0, 1)");
    }
    if (!(config.u_visit_fits > config.u_home && config.u_home > config.u_visit_full)) {
      throw ConfigError("utilities must satisfy fits > home > full");
    }
  }
  if (config.methods.empty()) {
    config.methods = config.game == "vendor"
                         ? std::vector<std::string>{"cll", "all", "kplayer", "twins"}
                         : std::vector<std::string>{"twins", "wel2", "wel5", "wel2-best",
                                                    "wel5-best"};
  }
  for (const std::string& method : config.methods) {
    if (method_streams().find(method) == method_streams().end()) {
      throw ConfigError("unknown method '" + method + "'");
    }
    if (method.rfind("wel", 0) == 0) {
      if (config.game != "santafe") throw ConfigError("WEL methods require the bar game");
      const int groups = method.rfind("wel2", 0) == 0 ? 2 : 5;
      if (config.agents % groups != 0) {
        throw ConfigError("method '" + method + "' needs the group count to divide agents");
      }
    }
  }
}

AssignmentPlan baseline_all(const ObservationSet& obs) {
  const int n = obs.descriptor.n_agents;
  const int S = obs.descriptor.n_strategies;
  std::vector<double> sum(static_cast<std::size_t>(n) * S, 0.0);
  std::vector<int> count(static_cast<std::size_t>(n) * S, 0);
  for (const Observation& ob : obs.observations) {
    for (int a = 0; a < n; ++a) {
      sum[a * S + ob.profile[a]] += ob.payoffs[a];
      count[a * S + ob.profile[a]] += 1;
    }
  }
  AssignmentPlan plan;
  plan.provenance = "ALL";
  plan.strategies.resize(n);
  for (int a = 0; a < n; ++a) {
    int seen = 0;
    for (int s = 0; s < S; ++s) seen += count[a * S + s];
    if (seen == 0) {
      throw InvalidInputError("agent " + std::to_string(a) + " has no observations");
    }
    // mean-reward table with zero initialization: a never-played strategy
    // keeps its zero estimate and can win against negative observed means
    int best = 0;
    double best_mean = count[a * S] == 0 ? 0.0 : sum[a * S] / count[a * S];
    for (int s = 1; s < S; ++s) {
      const double mean = count[a * S + s] == 0 ? 0.0 : sum[a * S + s] / count[a * S + s];
      if (mean > best_mean) {
        best = s;
        best_mean = mean;
      }
    }
    plan.strategies[a].assign(S, 0.0);
    plan.strategies[a][best] = 1.0;
  }
  return plan;
}

AssignmentPlan baseline_cll(const ObservationSet& obs, const Clustering& clustering) {
  const int n = obs.descriptor.n_agents;
  const int S = obs.descriptor.n_strategies;
  if (clustering.n_agents() != n) {
    throw InvalidInputError("clustering does not match the observation set");
  }
  std::vector<double> sum(static_cast<std::size_t>(clustering.k) * S, 0.0);
  std::vector<int> count(static_cast<std::size_t>(clustering.k) * S, 0);
  for (const Observation& ob : obs.observations) {
    for (int a = 0; a < n; ++a) {
      const int cell = clustering.assignment[a] * S + ob.profile[a];
      sum[cell] += ob.payoffs[a];
      count[cell] += 1;
    }
  }
  std::vector<int> choice(clustering.k);
  for (int c = 0; c < clustering.k; ++c) {
    int best = -1;
    double best_mean = 0.0;
    for (int s = 0; s < S; ++s) {
      if (count[c * S + s] == 0) {
        throw InvalidInputError("cluster " + std::to_string(c) + " never played strategy " +
                                std::to_string(s));
      }
      const double mean = sum[c * S + s] / count[c * S + s];
      if (best < 0 || mean > best_mean) {
        best = s;
        best_mean = mean;
      }
    }
    choice[c] = best;
  }
  AssignmentPlan plan;
  plan.provenance = "CLL";
  plan.strategies.resize(n);
  for (int a = 0; a < n; ++a) {
    plan.strategies[a].assign(S, 0.0);
    plan.strategies[a][choice[clustering.assignment[a]]] = 1.0;
  }
  return plan;
}

PlayRecord assign_and_simulate(const Game& game, const AssignmentPlan& plan, int iterations,
                               Rng& rng) {
  const GameDescriptor d = game_descriptor(game);
  if (static_cast<int>(plan.strategies.size()) != d.n_agents) {
    throw InvalidInputError("plan does not cover every agent");
  }
  for (const std::vector<double>& dist : plan.strategies) {
    if (static_cast<int>(dist.size()) != d.n_strategies) {
      throw InvalidInputError("plan distribution has the wrong arity");
    }
    double total = 0.0;
    for (double v : dist) {
      if (v < -1e-12) throw InvalidInputError("negative probability in plan");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidInputError("plan distribution does not sum to 1");
    }
  }
  if (iterations < 1) throw InvalidInputError("iterations must be >= 1");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PlayRecord record;
  record.profiles.reserve(iterations);
  record.payoffs.reserve(iterations);
  PureProfile profile(d.n_agents);
  for (int t = 0; t < iterations; ++t) {
    for (int a = 0; a < d.n_agents; ++a) {
      const double u = unit(rng);
      double acc = 0.0;
      int chosen = d.n_strategies - 1;
      for (int s = 0; s < d.n_strategies; ++s) {
        acc += plan.strategies[a][s];
        if (u < acc) {
          chosen = s;
          break;
        }
      }
      profile[a] = chosen;
    }
    record.profiles.push_back(profile);
    record.payoffs.push_back(game_payoffs(game, profile));
  }
  return record;
}

double external_regret(const Game& game, const PlayRecord& record, int agent) {
  const GameDescriptor d = game_descriptor(game);
  if (record.iterations() < 1) throw InvalidInputError("empty play record");
  if (agent < 0 || agent >= d.n_agents) throw InvalidInputError("agent index out of range");
  double realized = 0.0;
  for (const std::vector<double>& payoffs : record.payoffs) realized += payoffs[agent];
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < d.n_strategies; ++s) {
    double total = 0.0;
    for (int t = 0; t < record.iterations(); ++t) {
      total += counterfactual_payoff(game, record.profiles[t], agent, s);
    }
    best = std::max(best, total);
  }
  return (best - realized) / record.iterations();
}

namespace {

double binomial_cdf(int n, double p, int j) {
  if (j < 0) return 0.0;
  if (j >= n) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  double cdf = 0.0;
  for (int i = 0; i <= j; ++i) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                           std::lgamma(n - i + 1.0) + i * std::log(p) +
                           (n - i) * std::log1p(-p);
    cdf += std::exp(log_pmf);
  }
  return std::min(1.0, cdf);
}

}  // namespace

SantafeMsne santafe_true_msne(const SantaFeSpec& spec) {
  if (!(spec.capacity_fraction > 0.0 && spec.capacity_fraction < 1.0)) {
    throw InvalidInputError("capacity fraction must lie in (0, 1)");
  }
  const int others = spec.n_agents - 1;
  const int cap = spec.capacity();
  auto indifference = [&](double p) {
    const double fits = binomial_cdf(others, p, cap - 1);
    return spec.u_visit_fits * fits + spec.u_visit_full * (1.0 - fits) - spec.u_home;
  };
  if (indifference(0.0) <= 0.0) return {0.0, false};  // visiting never pays
  if (indifference(1.0) >= 0.0) return {1.0, false};  // visiting dominates
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (indifference(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), true};
}

ResultTable run_experiment(const ExperimentConfig& raw_config) {
  ExperimentConfig cfg = raw_config;
  validate_config(cfg);

  ResultTable table;
  table.metadata["game"] = cfg.game;
  table.metadata["agents"] = std::to_string(cfg.agents);
  table.metadata["k"] = std::to_string(cfg.k);
  table.metadata["observations"] = std::to_string(cfg.observations);
  table.metadata["trials"] = std::to_string(cfg.trials);
  table.metadata["restarts"] = std::to_string(cfg.restarts);
  table.metadata["iterations"] = std::to_string(cfg.iterations);
  table.metadata["seed"] = std::to_string(cfg.seed);
  if (cfg.game == "vendor") {
    table.metadata["types"] = std::to_string(cfg.types);
    table.metadata["locations"] = std::to_string(cfg.locations);
    table.metadata["sigma2"] = detail::format_double(cfg.sigma2);
  } else {
    table.metadata["capacity"] = detail::format_double(cfg.capacity);
  }

  const bool persist = !cfg.out_dir.empty();
  if (persist) std::filesystem::create_directories(cfg.out_dir);

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(trial));
    Game game;
    ObservationSet obs;
    ClusterModel model;
    bool staged = false;
    std::string trial_error;
    try {
      if (cfg.game == "vendor") {
        Rng game_rng = make_rng(derive_seed(trial_seed, 1));
        game = sample_vendor_game(cfg.agents, cfg.types, cfg.locations, cfg.sigma2, game_rng);
      } else {
        game = SantaFeSpec{cfg.agents, cfg.capacity, cfg.u_visit_fits, cfg.u_visit_full,
                           cfg.u_home};
      }
      Rng obs_rng = make_rng(derive_seed(trial_seed, 2));
      obs = generate_observations(game, cfg.observations, obs_rng);
      LearnOptions lopts;
      lopts.restarts = cfg.restarts;
      lopts.normalize_payoffs = cfg.normalize_payoffs;
      model = learn_model(obs, cfg.k, lopts, derive_seed(trial_seed, 3));
      staged = true;
    } catch (const std::exception& e) {
      trial_error = e.what();
    }

    std::filesystem::path trial_dir;
    if (persist && staged) {
      trial_dir = std::filesystem::path(cfg.out_dir) / trial_dir_name(trial);
      ArtifactBundle bundle;
      bundle.game = game;
      bundle.observations = obs;
      bundle.model = model;
      bundle.meta.seed = trial_seed;
      bundle.meta.params["game"] = cfg.game;
      bundle.meta.params["trial"] = std::to_string(trial);
      bundle.meta.params["k"] = std::to_string(cfg.k);
      bundle.meta.params["observations"] = std::to_string(cfg.observations);
      save_bundle(bundle, trial_dir);
    }

    for (const std::string& method : cfg.methods) {
      ResultRow row;
      row.trial = trial;
      row.method = method;
      row.mean_visit_prob = kNaN;
      if (!staged) {
        row.failed = true;
        row.error = trial_error;
        table.rows.push_back(std::move(row));
        continue;
      }
      try {
        bool select_best = false;
        std::vector<AssignmentPlan> plans = build_plans(method, game, obs, model, cfg, select_best);
        if (plans.empty()) throw Error("no equilibria found");
        const std::uint64_t method_seed =
            derive_seed(trial_seed, 16 + static_cast<std::uint64_t>(method_streams().at(method)));
        std::vector<PlanEval> evals;
        evals.reserve(plans.size());
        for (std::size_t j = 0; j < plans.size(); ++j) {
          Rng sim_rng = make_rng(derive_seed(method_seed, j));
          evals.push_back(evaluate_plan(game, std::move(plans[j]), cfg.iterations, sim_rng));
        }
        int selected = 0;
        for (std::size_t j = 1; j < evals.size(); ++j) {
          const bool better = select_best ? evals[j].mean_regret < evals[selected].mean_regret
                                          : evals[j].mean_regret > evals[selected].mean_regret;
          if (better) selected = static_cast<int>(j);
        }
        row.n_equilibria = static_cast<int>(evals.size());
        row.selected = selected;
        row.mean_payoff = evals[selected].mean_payoff;
        row.mean_regret = evals[selected].mean_regret;
        if (cfg.game == "santafe") {
          double visit = 0.0;
          for (const std::vector<double>& dist : evals[selected].plan.strategies) {
            visit += dist[1];
          }
          row.mean_visit_prob = visit / cfg.agents;
        }
        if (persist && !trial_dir.empty()) {
          const std::filesystem::path records = trial_dir / "records";
          std::filesystem::create_directories(records);
          for (std::size_t j = 0; j < evals.size(); ++j) {
            save_play_record(evals[j].record,
                             records / (method + "-eq" + std::to_string(j) + ".txt"));
          }
        }
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      table.rows.push_back(std::move(row));
    }
  }

  if (persist) {
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "results.tsv");
    out << result_table_tsv(table);
    if (cfg.game == "santafe") {
      std::ofstream plot(std::filesystem::path(cfg.out_dir) / "plotdata.tsv");
      plot << visit_prob_summary_tsv(table, cfg.capacity);
    }
  }
  return table;
}

std::string result_table_tsv(const ResultTable& table) {
  std::string out;
  for (const auto& [key, value] : table.metadata) {
    out += "# " + key + "\t" + value + "\n";
  }
  out += "trial\tmethod\tstatus\tmean_payoff\tmean_regret\tmean_visit_prob\tn_equilibria\t"
         "selected\terror\n";
  for (const ResultRow& row : table.rows) {
    out += std::to_string(row.trial) + "\t" + row.method + "\t" +
           (row.failed ? "failed" : "ok") + "\t";
    if (row.failed) {
      out += "\t\t\t\t\t" + row.error + "\n";
      continue;
    }
    out += detail::format_double(row.mean_payoff) + "\t" +
           detail::format_double(row.mean_regret) + "\t";
    if (!std::isnan(row.mean_visit_prob)) out += detail::format_double(row.mean_visit_prob);
    out += "\t" + std::to_string(row.n_equilibria) + "\t" + std::to_string(row.selected) + "\t\n";
  }
  return out;
}

std::string visit_prob_summary_tsv(const ResultTable& table, double capacity) {
  std::map<std::string, std::vector<double>> per_method;
  for (const ResultRow& row : table.rows) {
    if (row.failed || std::isnan(row.mean_visit_prob)) continue;
    per_method[row.method].push_back(row.mean_visit_prob);
  }
  std::string out = "capacity\tmethod\tmean_visit_prob\tstd_visit_prob\tn_trials\n";
  for (const auto& [method, values] : per_method) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / values.size());
    out += detail::format_double(capacity) + "\t" + method + "\t" + detail::format_double(mean) +
           "\t" + detail::format_double(sd) + "\t" + std::to_string(values.size()) + "\n";
  }
  return out;
}

}  // namespace cbg
