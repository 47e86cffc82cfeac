// Command-line front end: generate games, simulate observations, learn
// cluster models, solve reduced games and run full experiments.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cbg/bundle.hpp"
#include "cbg/detail/text.hpp"
#include "cbg/errors.hpp"
#include "cbg/experiment.hpp"

namespace {

using namespace cbg;

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitTrialFailures = 3;

void print_equilibria(const EquilibriumList& list) {
  if (list.degenerate) std::cout << "# degenerate game: representative set only\n";
  for (std::size_t i = 0; i < list.equilibria.size(); ++i) {
    const Equilibrium& eq = list.equilibria[i];
    std::cout << "equilibrium " << i << (eq.pure ? " pure" : " mixed")
              << (eq.twin_symmetric ? " twin-symmetric" : "")
              << " max_gain=" << detail::format_double(eq.max_gain) << "\n";
    for (std::size_t p = 0; p < eq.profile.size(); ++p) {
      std::cout << "  player " << p << ":";
      for (double v : eq.profile[p]) std::cout << ' ' << detail::format_double(v);
      std::cout << "\n";
    }
  }
}

int cmd_gen_game(const std::string& kind, int agents, int types, int locations, double sigma2,
                 double capacity, double u_fits, double u_full, double u_home,
                 std::uint64_t seed, const std::string& out) {
  ArtifactBundle bundle;
  if (kind == "vendor") {
    Rng rng = make_rng(seed);
    bundle.game = sample_vendor_game(agents, types, locations, sigma2, rng);
  } else if (kind == "santafe") {
    bundle.game = SantaFeSpec{agents, capacity, u_fits, u_full, u_home};
  } else {
    throw ConfigError("kind must be 'vendor' or 'santafe'");
  }
  bundle.meta.seed = seed;
  bundle.meta.params["kind"] = kind;
  save_bundle(bundle, out);
  std::cout << "wrote bundle " << out << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& bundle_dir, int observations, std::uint64_t seed) {
  ArtifactBundle bundle = load_bundle(bundle_dir);
  Rng rng = make_rng(seed);
  bundle.observations = generate_observations(bundle.game, observations, rng);
  bundle.meta.params["observation_seed"] = std::to_string(seed);
  save_bundle(bundle, bundle_dir);
  std::cout << "wrote " << observations << " observations to " << bundle_dir << "\n";
  return kExitOk;
}

int cmd_learn(const std::string& bundle_dir, int k, int restarts, bool normalize,
              std::uint64_t seed) {
  ArtifactBundle bundle = load_bundle(bundle_dir);
  if (!bundle.observations) throw InvalidInputError("bundle has no observations; run simulate");
  LearnOptions options;
  options.restarts = restarts;
  options.normalize_payoffs = normalize;
  bundle.model = learn_model(*bundle.observations, k, options, seed);
  bundle.meta.params["learn_seed"] = std::to_string(seed);
  save_bundle(bundle, bundle_dir);
  std::cout << "learned model: k=" << k << " sse=" << detail::format_double(bundle.model->sse)
            << " r2=" << detail::format_double(bundle.model->r2) << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& bundle_dir, const std::string& reduction, int groups,
              double tol) {
  const ArtifactBundle bundle = load_bundle(bundle_dir);
  SolverOptions options;
  options.verify_eps = tol;
  if (reduction == "twins") {
    if (!bundle.model) throw InvalidInputError("bundle has no model; run learn");
    const auto [game, labeling] = build_twins_game(*bundle.model);
    print_equilibria(find_tsne(game, labeling, tol, options));
  } else if (reduction == "kplayer") {
    if (!bundle.model) throw InvalidInputError("bundle has no model; run learn");
    const NormalFormGame game = build_kplayer_game(*bundle.model);
    print_equilibria(game.n_players == 2 ? bimatrix_all_ne(game, options)
                                         : enumerate_pure_ne(game, options));
  } else if (reduction == "wel") {
    const auto* spec = std::get_if<SantaFeSpec>(&bundle.game);
    if (spec == nullptr) throw InvalidInputError("WEL reduction applies to the bar game only");
    const NormalFormGame game = build_wel_game(*spec, groups);
    std::cout << "# symmetric equilibria\n";
    print_equilibria(symmetric_msne_2strategy(game, options));
    std::cout << "# pure equilibria\n";
    print_equilibria(enumerate_pure_ne(game, options));
  } else {
    throw ConfigError("reduction must be twins, kplayer or wel");
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& bundle_dir, const std::string& method, int iterations,
                 std::uint64_t seed) {
  const ArtifactBundle bundle = load_bundle(bundle_dir);
  if (!bundle.observations) throw InvalidInputError("bundle has no observations");
  const GameDescriptor d = game_descriptor(bundle.game);

  AssignmentPlan plan;
  if (method == "all") {
    plan = baseline_all(*bundle.observations);
  } else if (method == "cll") {
    if (!bundle.model) throw InvalidInputError("bundle has no model; run learn");
    plan = baseline_cll(*bundle.observations, bundle.model->clustering);
  } else {
    throw ConfigError("evaluate supports methods 'all' and 'cll'; use 'experiment' for the rest");
  }
  Rng rng = make_rng(seed);
  const PlayRecord record = assign_and_simulate(bundle.game, plan, iterations, rng);
  double payoff = 0.0;
  for (const std::vector<double>& payoffs : record.payoffs) {
    for (double v : payoffs) payoff += v;
  }
  payoff /= static_cast<double>(iterations) * d.n_agents;
  double regret = 0.0;
  for (int a = 0; a < d.n_agents; ++a) regret += external_regret(bundle.game, record, a);
  regret /= d.n_agents;
  std::cout << "method=" << method << " mean_payoff=" << detail::format_double(payoff)
            << " mean_regret=" << detail::format_double(regret) << "\n";
  return kExitOk;
}

int cmd_experiment(const std::string& config_file, const std::vector<std::string>& overrides,
                   const std::string& out_dir) {
  std::string text;
  {
    std::ifstream in(config_file);
    if (!in) throw IoError("cannot open " + config_file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  // Flag overrides are applied as JSON fragments on top of the file.
  if (!overrides.empty() || !out_dir.empty()) {
    nlohmann::json j = nlohmann::json::parse(text);
    for (const std::string& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("override must look like key=value");
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      try {
        j[key] = nlohmann::json::parse(value);
      } catch (const nlohmann::json::parse_error&) {
        j[key] = value;  // bare strings
      }
    }
    if (!out_dir.empty()) j["out_dir"] = out_dir;
    text = j.dump();
  }
  const ExperimentConfig config = parse_experiment_config(text);
  const ResultTable table = run_experiment(config);
  std::cout << result_table_tsv(table);
  if (config.game == "santafe") std::cout << "\n" << visit_prob_summary_tsv(table, config.capacity);
  for (const ResultRow& row : table.rows) {
    if (row.failed) return kExitTrialFailures;
  }
  return kExitOk;
}

int cmd_oracle_msne(int agents, double capacity, double u_fits, double u_full, double u_home) {
  const SantaFeSpec spec{agents, capacity, u_fits, u_full, u_home};
  const SantafeMsne msne = santafe_true_msne(spec);
  std::cout << "visit_probability=" << detail::format_double(msne.p)
            << (msne.interior ? " interior" : " boundary") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-based learning and solving of many-player games"};
  app.require_subcommand(1);

  // gen-game
  std::string kind = "vendor";
  int agents = 100, types = 2, locations = 2;
  double sigma2 = 1.5, capacity = 0.5;
  double u_fits = 4.0, u_full = -6.0, u_home = 0.0;
  std::uint64_t seed = 1;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-game", "generate a game spec bundle");
  gen->add_option("--kind", kind, "vendor | santafe");
  gen->add_option("--agents", agents);
  gen->add_option("--types", types);
  gen->add_option("--locations", locations);
  gen->add_option("--sigma2", sigma2);
  gen->add_option("--capacity", capacity);
  gen->add_option("--u-fits", u_fits);
  gen->add_option("--u-full", u_full);
  gen->add_option("--u-home", u_home);
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_dir)->required();

  // simulate
  std::string bundle_dir;
  int observations = 15;
  auto* sim = app.add_subcommand("simulate", "generate observations into a bundle");
  sim->add_option("--bundle", bundle_dir)->required();
  sim->add_option("--observations", observations);
  sim->add_option("--seed", seed);

  // learn
  int k = 2, restarts = 10;
  bool normalize = false;
  auto* learn = app.add_subcommand("learn", "learn a cluster model from observations");
  learn->add_option("--bundle", bundle_dir)->required();
  learn->add_option("--k", k);
  learn->add_option("--restarts", restarts);
  learn->add_flag("--normalize", normalize, "standardize payoffs per agent first");
  learn->add_option("--seed", seed);

  // solve
  std::string reduction = "twins";
  int groups = 2;
  double tol = 1e-8;
  auto* solve = app.add_subcommand("solve", "solve a reduced game from a bundle");
  solve->add_option("--bundle", bundle_dir)->required();
  solve->add_option("--reduction", reduction, "twins | kplayer | wel");
  solve->add_option("--groups", groups, "group count for the wel reduction");
  solve->add_option("--tol", tol);

  // evaluate
  std::string method = "all";
  int iterations = 100;
  auto* eval = app.add_subcommand("evaluate", "simulate a baseline plan and report metrics");
  eval->add_option("--bundle", bundle_dir)->required();
  eval->add_option("--method", method, "all | cll");
  eval->add_option("--iterations", iterations);
  eval->add_option("--seed", seed);

  // experiment
  std::string config_file;
  std::vector<std::string> overrides;
  std::string experiment_out;
  auto* exp = app.add_subcommand("experiment", "run a configured multi-trial experiment");
  exp->add_option("--config", config_file)->required();
  exp->add_option("--set", overrides, "override config fields, key=value");
  exp->add_option("--out", experiment_out, "output directory (overrides out_dir)");

  // oracle-msne
  auto* oracle = app.add_subcommand("oracle-msne", "symmetric equilibrium of the bar game");
  oracle->add_option("--agents", agents);
  oracle->add_option("--capacity", capacity)->required();
  oracle->add_option("--u-fits", u_fits);
  oracle->add_option("--u-full", u_full);
  oracle->add_option("--u-home", u_home);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadConfig;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_game(kind, agents, types, locations, sigma2, capacity, u_fits, u_full,
                          u_home, seed, out_dir);
    }
    if (sim->parsed()) return cmd_simulate(bundle_dir, observations, seed);
    if (learn->parsed()) return cmd_learn(bundle_dir, k, restarts, normalize, seed);
    if (solve->parsed()) return cmd_solve(bundle_dir, reduction, groups, tol);
    if (eval->parsed()) return cmd_evaluate(bundle_dir, method, iterations, seed);
    if (exp->parsed()) return cmd_experiment(config_file, overrides, experiment_out);
    if (oracle->parsed()) return cmd_oracle_msne(agents, capacity, u_fits, u_full, u_home);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
