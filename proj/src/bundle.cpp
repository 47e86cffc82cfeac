#include "cbg/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "cbg/detail/text.hpp"
#include "cbg/errors.hpp"

namespace cbg {

namespace {

using nlohmann::json;

constexpr const char* kObservationsFile = "observations.txt";
constexpr const char* kManifestFile = "manifest.json";

json game_to_json(const Game& game) {
  json j;
  if (const auto* vendor = std::get_if<VendorGameSpec>(&game)) {
    j["kind"] = "vendor";
    j["n_types"] = vendor->n_types;
    j["n_locations"] = vendor->n_locations;
    j["sigma2"] = vendor->sigma2;
    j["type_matrix"] = vendor->type_matrix;
    j["interaction_matrix"] = vendor->interaction;
    j["bias"] = vendor->bias;
    j["agent_type"] = vendor->agent_type;
  } else {
    const auto& spec = std::get<SantaFeSpec>(game);
    j["kind"] = "santafe";
    j["n_agents"] = spec.n_agents;
    j["capacity_fraction"] = spec.capacity_fraction;
    j["u_visit_fits"] = spec.u_visit_fits;
    j["u_visit_full"] = spec.u_visit_full;
    j["u_home"] = spec.u_home;
  }
  return j;
}

Game game_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "vendor") {
    VendorGameSpec spec;
    spec.n_types = j.at("n_types").get<int>();
    spec.n_locations = j.at("n_locations").get<int>();
    spec.sigma2 = j.at("sigma2").get<double>();
    spec.type_matrix = j.at("type_matrix").get<std::vector<double>>();
    spec.interaction = j.at("interaction_matrix").get<std::vector<double>>();
    spec.bias = j.at("bias").get<std::vector<double>>();
    spec.agent_type = j.at("agent_type").get<std::vector<int>>();
    const std::size_t n = spec.bias.size();
    if (spec.n_types < 1 || spec.n_locations < 2) {
      throw ValidationError("vendor spec has invalid dimensions");
    }
    if (spec.type_matrix.size() != static_cast<std::size_t>(spec.n_types) * spec.n_types) {
      throw ValidationError("type matrix size does not match n_types");
    }
    if (spec.interaction.size() != n * n) {
      throw ValidationError("interaction matrix size does not match the agent count");
    }
    if (spec.agent_type.size() != n) {
      throw ValidationError("agent_type length does not match the agent count");
    }
    for (int t : spec.agent_type) {
      if (t < 0 || t >= spec.n_types) throw ValidationError("agent type index out of range");
    }
    return spec;
  }
  if (kind == "santafe") {
    SantaFeSpec spec;
    spec.n_agents = j.at("n_agents").get<int>();
    spec.capacity_fraction = j.at("capacity_fraction").get<double>();
    spec.u_visit_fits = j.at("u_visit_fits").get<double>();
    spec.u_visit_full = j.at("u_visit_full").get<double>();
    spec.u_home = j.at("u_home").get<double>();
    if (spec.n_agents < 1) throw ValidationError("n_agents must be >= 1");
    if (!(spec.capacity_fraction > 0.0 && spec.capacity_fraction < 1.0)) {
      throw ValidationError("capacity_fraction must lie in (0, 1)");
    }
    return spec;
  }
  throw ValidationError("unknown game kind '" + kind + "'");
}

json model_to_json(const ClusterModel& model) {
  json j;
  j["k"] = model.regressors.k;
  j["n_strategies"] = model.regressors.n_strategies;
  j["assignment"] = model.clustering.assignment;
  j["coefficients"] = model.regressors.coef;
  j["sse"] = model.sse;
  j["r2"] = model.r2;
  return j;
}

ClusterModel model_from_json(const json& j, int n_agents, int n_strategies) {
  ClusterModel model;
  model.regressors.k = j.at("k").get<int>();
  model.regressors.n_strategies = j.at("n_strategies").get<int>();
  model.clustering.k = model.regressors.k;
  model.clustering.assignment = j.at("assignment").get<std::vector<int>>();
  model.regressors.coef = j.at("coefficients").get<std::vector<std::vector<double>>>();
  model.sse = j.at("sse").get<double>();
  model.r2 = j.at("r2").get<double>();

  const int k = model.regressors.k;
  if (k < 1) throw ValidationError("model k must be >= 1");
  if (model.regressors.n_strategies != n_strategies) {
    throw ValidationError("model strategy count does not match the game");
  }
  if (model.clustering.n_agents() != n_agents) {
    throw ValidationError("model assignment length does not match the agent count");
  }
  std::vector<int> sizes(k, 0);
  for (int c : model.clustering.assignment) {
    if (c < 0 || c >= k) throw ValidationError("cluster index out of range");
    sizes[c] += 1;
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[c] == 0) throw ValidationError("cluster " + std::to_string(c) + " is empty");
  }
  if (model.regressors.coef.size() != static_cast<std::size_t>(k) * n_strategies) {
    throw ValidationError("coefficient row count must be k * n_strategies");
  }
  const std::size_t width = static_cast<std::size_t>(model.regressors.n_monomials()) + 1;
  for (const std::vector<double>& row : model.regressors.coef) {
    if (row.size() != width) throw ValidationError("coefficient row has the wrong width");
  }
  return model;
}

json results_to_json(const ResultTable& table) {
  json rows = json::array();
  for (const ResultRow& row : table.rows) {
    json r;
    r["trial"] = row.trial;
    r["method"] = row.method;
    r["failed"] = row.failed;
    r["error"] = row.error;
    r["mean_payoff"] = row.mean_payoff;
    r["mean_regret"] = row.mean_regret;
    if (std::isnan(row.mean_visit_prob)) {
      r["mean_visit_prob"] = nullptr;
    } else {
      r["mean_visit_prob"] = row.mean_visit_prob;
    }
    r["n_equilibria"] = row.n_equilibria;
    r["selected"] = row.selected;
    rows.push_back(std::move(r));
  }
  return json{{"metadata", table.metadata}, {"rows", rows}};
}

ResultTable results_from_json(const json& j) {
  ResultTable table;
  table.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  for (const json& r : j.at("rows")) {
    ResultRow row;
    row.trial = r.at("trial").get<int>();
    row.method = r.at("method").get<std::string>();
    row.failed = r.at("failed").get<bool>();
    row.error = r.at("error").get<std::string>();
    row.mean_payoff = r.at("mean_payoff").get<double>();
    row.mean_regret = r.at("mean_regret").get<double>();
    const json& visit = r.at("mean_visit_prob");
    row.mean_visit_prob =
        visit.is_null() ? std::numeric_limits<double>::quiet_NaN() : visit.get<double>();
    row.n_equilibria = r.at("n_equilibria").get<int>();
    row.selected = r.at("selected").get<int>();
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

// "s0 s1 ... | p0 p1 ..." with one record per line.
void write_record_line(std::ofstream& out, const PureProfile& profile,
                       const std::vector<double>& payoffs) {
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (i > 0) out << ' ';
    out << profile[i];
  }
  out << " |";
  for (double v : payoffs) out << ' ' << detail::format_double(v);
  out << '\n';
}

void parse_record_line(const std::string& line, int line_number, int n_agents,
                       PureProfile& profile, std::vector<double>& payoffs) {
  const std::vector<std::string> tokens = tokenize(line);
  const auto sep = std::find(tokens.begin(), tokens.end(), "|");
  if (sep == tokens.end()) {
    throw ParseError("line " + std::to_string(line_number) + ": missing '|' separator");
  }
  profile.clear();
  payoffs.clear();
  for (auto it = tokens.begin(); it != sep; ++it) {
    int s = 0;
    if (!detail::parse_int(*it, s)) {
      throw ParseError("line " + std::to_string(line_number) + ": bad strategy token '" + *it +
                       "'");
    }
    profile.push_back(s);
  }
  for (auto it = sep + 1; it != tokens.end(); ++it) {
    double v = 0.0;
    if (!detail::parse_double(*it, v)) {
      throw ParseError("line " + std::to_string(line_number) + ": bad payoff token '" + *it +
                       "'");
    }
    payoffs.push_back(v);
  }
  if (static_cast<int>(profile.size()) != n_agents) {
    throw ValidationError("line " + std::to_string(line_number) + ": expected " +
                          std::to_string(n_agents) + " strategies, got " +
                          std::to_string(profile.size()));
  }
  if (static_cast<int>(payoffs.size()) != n_agents) {
    throw ValidationError("line " + std::to_string(line_number) + ": expected " +
                          std::to_string(n_agents) + " payoffs, got " +
                          std::to_string(payoffs.size()));
  }
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void save_bundle(const ArtifactBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const GameDescriptor descriptor = game_descriptor(bundle.game);
  json manifest;
  manifest["format_version"] = bundle.meta.format_version;
  manifest["meta"] = json{{"seed", bundle.meta.seed}, {"params", bundle.meta.params}};
  manifest["game"] = game_to_json(bundle.game);

  if (bundle.observations) {
    if (bundle.observations->descriptor.n_agents != descriptor.n_agents ||
        bundle.observations->descriptor.n_strategies != descriptor.n_strategies) {
      throw ValidationError("observations do not match the game spec");
    }
    manifest["n_observations"] = bundle.observations->size();
    std::ofstream out(dir / kObservationsFile);
    if (!out) throw IoError("cannot write " + (dir / kObservationsFile).string());
    for (const Observation& ob : bundle.observations->observations) {
      write_record_line(out, ob.profile, ob.payoffs);
    }
    if (!out) throw IoError("write failed for " + (dir / kObservationsFile).string());
  } else {
    std::filesystem::remove(dir / kObservationsFile, ec);
  }
  if (bundle.model) manifest["model"] = model_to_json(*bundle.model);
  if (bundle.results) manifest["results"] = results_to_json(*bundle.results);

  std::ofstream out(dir / kManifestFile);
  if (!out) throw IoError("cannot write " + (dir / kManifestFile).string());
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + (dir / kManifestFile).string());
}

ArtifactBundle load_bundle(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / kManifestFile));
  } catch (const json::parse_error& e) {
    throw ParseError("manifest " + (dir / kManifestFile).string() + ": " + e.what());
  }

  ArtifactBundle bundle;
  try {
    const std::string version = manifest.at("format_version").get<std::string>();
    if (version != kBundleFormatVersion) {
      throw VersionError("unsupported bundle format version '" + version + "'");
    }
    bundle.meta.format_version = version;
    bundle.meta.seed = manifest.at("meta").at("seed").get<std::uint64_t>();
    bundle.meta.params =
        manifest.at("meta").at("params").get<std::map<std::string, std::string>>();
    bundle.game = game_from_json(manifest.at("game"));

    const GameDescriptor descriptor = game_descriptor(bundle.game);
    if (manifest.contains("n_observations")) {
      const int expected = manifest.at("n_observations").get<int>();
      ObservationSet obs;
      obs.descriptor = descriptor;
      std::ifstream in(dir / kObservationsFile);
      if (!in) throw IoError("cannot open " + (dir / kObservationsFile).string());
      std::string line;
      int line_number = 0;
      while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        Observation ob;
        parse_record_line(line, line_number, descriptor.n_agents, ob.profile, ob.payoffs);
        for (int s : ob.profile) {
          if (s < 0 || s >= descriptor.n_strategies) {
            throw ValidationError("line " + std::to_string(line_number) +
                                  ": strategy index out of range");
          }
        }
        obs.observations.push_back(std::move(ob));
      }
      if (obs.size() != expected) {
        throw ValidationError("expected " + std::to_string(expected) + " observations, found " +
                              std::to_string(obs.size()));
      }
      bundle.observations = std::move(obs);
    }
    if (manifest.contains("model")) {
      bundle.model = model_from_json(manifest.at("model"), descriptor.n_agents,
                                     descriptor.n_strategies);
    }
    if (manifest.contains("results")) {
      bundle.results = results_from_json(manifest.at("results"));
    }
  } catch (const json::exception& e) {
    throw ParseError("manifest " + (dir / kManifestFile).string() + ": " + e.what());
  }
  return bundle;
}

void save_play_record(const PlayRecord& record, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  for (int t = 0; t < record.iterations(); ++t) {
    write_record_line(out, record.profiles[t], record.payoffs[t]);
  }
  if (!out) throw IoError("write failed for " + file.string());
}

PlayRecord load_play_record(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  PlayRecord record;
  std::string line;
  int line_number = 0;
  int n_agents = -1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    PureProfile profile;
    std::vector<double> payoffs;
    if (n_agents < 0) {
      // first line fixes the agent count
      const std::vector<std::string> tokens = tokenize(line);
      const auto sep = std::find(tokens.begin(), tokens.end(), "|");
      if (sep == tokens.end()) throw ParseError("line 1: missing '|' separator");
      n_agents = static_cast<int>(sep - tokens.begin());
    }
    parse_record_line(line, line_number, n_agents, profile, payoffs);
    record.profiles.push_back(std::move(profile));
    record.payoffs.push_back(std::move(payoffs));
  }
  return record;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  static const std::set<std::string> known{
      "game",        "agents",     "types",        "locations",   "sigma2",
      "capacity",    "u_visit_fits", "u_visit_full", "u_home",    "k",
      "observations", "trials",    "restarts",     "iterations",  "verify_eps",
      "newton_tol",  "normalize_payoffs",           "seed",        "methods",
      "out_dir",
  };
  for (const auto& item : j.items()) {
    if (known.find(item.key()) == known.end()) {
      throw ConfigError("unknown config field '" + item.key() + "'");
    }
  }
  ExperimentConfig cfg;
  try {
    j.at("game").get_to(cfg.game);
    if (j.contains("agents")) j.at("agents").get_to(cfg.agents);
    if (j.contains("types")) j.at("types").get_to(cfg.types);
    if (j.contains("locations")) j.at("locations").get_to(cfg.locations);
    if (j.contains("sigma2")) j.at("sigma2").get_to(cfg.sigma2);
    if (j.contains("capacity")) j.at("capacity").get_to(cfg.capacity);
    if (j.contains("u_visit_fits")) j.at("u_visit_fits").get_to(cfg.u_visit_fits);
    if (j.contains("u_visit_full")) j.at("u_visit_full").get_to(cfg.u_visit_full);
    if (j.contains("u_home")) j.at("u_home").get_to(cfg.u_home);
    if (j.contains("k")) j.at("k").get_to(cfg.k);
    if (j.contains("observations")) j.at("observations").get_to(cfg.observations);
    if (j.contains("trials")) j.at("trials").get_to(cfg.trials);
    if (j.contains("restarts")) j.at("restarts").get_to(cfg.restarts);
    if (j.contains("iterations")) j.at("iterations").get_to(cfg.iterations);
    if (j.contains("verify_eps")) j.at("verify_eps").get_to(cfg.verify_eps);
    if (j.contains("newton_tol")) j.at("newton_tol").get_to(cfg.newton_tol);
    if (j.contains("normalize_payoffs")) j.at("normalize_payoffs").get_to(cfg.normalize_payoffs);
    if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
    if (j.contains("methods")) j.at("methods").get_to(cfg.methods);
    if (j.contains("out_dir")) j.at("out_dir").get_to(cfg.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
  return parse_experiment_config(read_file(file));
}

}  // namespace cbg
