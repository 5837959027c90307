// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "iasim/simharness.hpp"
#include "json.hpp"

namespace iasim::harness {

using nlohmann::json;

const char* to_string(SweepVariable v) {
  return v == SweepVariable::kSnrDb ? "snr_db" : "normalized_doppler";
}

const char* to_string(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::kExhaustive:
      return "exhaustive";
    case PartitionStrategy::kGreedy:
      return "greedy";
    default:
      return "geographic";
  }
}

void ExperimentConfig::validate() const {
  try {
    network.validate();
    fading.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (sweep_values.empty()) throw ConfigError("config.sweep.values: must be non-empty");
  for (size_t i = 1; i < sweep_values.size(); ++i) {
    if (sweep_values[i] <= sweep_values[i - 1]) {
      throw ConfigError("config.sweep.values: must be strictly ascending");
    }
  }
  if (trials < 1) throw ConfigError("config.trials: must be >= 1");
  if (sweep_variable == SweepVariable::kNormalizedDoppler) {
    for (double v : sweep_values) {
      if (v < 0.0 || v >= 0.5) {
        throw ConfigError("config.sweep.values: normalized doppler must lie in [0, 0.5)");
      }
    }
  }
  if (!(coherence_constant > 0.0) || coherence_cap < 1) {
    throw ConfigError("config.coherence: constant must be > 0 and cap >= 1");
  }
  if (geographic_target < 1) {
    throw ConfigError("config.partition.group_size_target: must be >= 1");
  }
}

namespace {

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(path + ": unknown key '" + key + "'");
    }
  }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(path + "." + key + ": required");
    return fallback;
  }
  if (!obj[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return obj[key].get<double>();
}

long get_integer(const json& obj, const std::string& path, const char* key, long fallback,
                 bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(path + "." + key + ": required");
    return fallback;
  }
  if (!obj[key].is_number_integer()) {
    throw ConfigError(path + "." + key + ": expected an integer");
  }
  return obj[key].get<long>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(path + "." + key + ": required");
    return fallback;
  }
  if (!obj[key].is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return obj[key].get<std::string>();
}

std::vector<int> get_per_user(const json& obj, const std::string& path, const char* key,
                              int users) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key + ": required");
  const json& v = obj[key];
  std::vector<int> out;
  if (v.is_number_integer()) {
    out.assign(static_cast<size_t>(users), v.get<int>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        throw ConfigError(path + "." + key + ": expected integers");
      }
      out.push_back(e.get<int>());
    }
  } else {
    throw ConfigError(path + "." + key + ": expected an integer or an array");
  }
  return out;
}

std::vector<netmodel::Position> get_positions(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path + ": expected an array of [x, y] pairs");
  std::vector<netmodel::Position> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw ConfigError(path + ": expected [x, y] number pairs");
    }
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

/// SNR field that is either a dB number, "track", or "infinite".
void parse_snr_field(const json& obj, const std::string& path, const char* key,
                     double& linear_out, bool& tracks_out) {
  if (!obj.contains(key)) return;
  const json& v = obj[key];
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "track") {
      tracks_out = true;
    } else if (s == "infinite") {
      linear_out = std::numeric_limits<double>::infinity();
    } else {
      throw ConfigError(path + "." + key + ": expected a dB number, \"track\" or \"infinite\"");
    }
  } else if (v.is_number()) {
    linear_out = std::pow(10.0, v.get<double>() / 10.0);
  } else {
    throw ConfigError(path + "." + key + ": expected a dB number, \"track\" or \"infinite\"");
  }
}

netmodel::NetworkConfig parse_network(const json& j) {
  const std::string path = "config.network";
  check_keys(j, path,
             {"users", "tx_antennas", "rx_antennas", "streams", "tx_power", "noise_var",
              "pathloss_exponent", "reference_distance", "tx_positions", "rx_positions",
              "connectivity_threshold_db"});
  netmodel::NetworkConfig net;
  net.users = static_cast<int>(get_integer(j, path, "users", 0, /*required=*/true));
  if (net.users < 1) throw ConfigError(path + ".users: must be >= 1");
  net.tx_antennas = get_per_user(j, path, "tx_antennas", net.users);
  net.rx_antennas = get_per_user(j, path, "rx_antennas", net.users);
  net.streams = get_per_user(j, path, "streams", net.users);
  net.tx_power = get_number(j, path, "tx_power", 1.0);
  net.noise_var = get_number(j, path, "noise_var", 1.0);
  net.pathloss_exponent = get_number(j, path, "pathloss_exponent", 0.0);
  net.reference_distance = get_number(j, path, "reference_distance", 1.0);
  if (j.contains("tx_positions") || j.contains("rx_positions")) {
    if (!j.contains("tx_positions") || !j.contains("rx_positions")) {
      throw ConfigError(path + ": tx_positions and rx_positions must come together");
    }
    net.tx_positions = get_positions(j["tx_positions"], path + ".tx_positions");
    net.rx_positions = get_positions(j["rx_positions"], path + ".rx_positions");
  }
  net.connectivity.assign(static_cast<size_t>(net.users),
                          std::vector<bool>(static_cast<size_t>(net.users), true));
  if (j.contains("connectivity_threshold_db")) {
    if (!j["connectivity_threshold_db"].is_number()) {
      throw ConfigError(path + ".connectivity_threshold_db: expected a number");
    }
    try {
      net.validate();
      net.connectivity =
          netmodel::derive_connectivity(net, j["connectivity_threshold_db"].get<double>());
    } catch (const ContractViolation& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  return net;
}

netmodel::FadingProcess parse_fading(const json& j, const netmodel::NetworkConfig& net) {
  const std::string path = "config.fading";
  check_keys(j, path, {"model", "tx_corr_rho", "rx_corr_rho", "normalized_doppler"});
  netmodel::FadingProcess fading;
  const std::string model = get_string(j, path, "model", "iid_rayleigh");
  if (model == "iid_rayleigh") {
    fading.model = netmodel::FadingModel::kIidRayleigh;
  } else if (model == "kronecker_correlated") {
    fading.model = netmodel::FadingModel::kKroneckerCorrelated;
    const double tx_rho = get_number(j, path, "tx_corr_rho", 0.0);
    const double rx_rho = get_number(j, path, "rx_corr_rho", 0.0);
    fading.tx_corr = netmodel::exp_correlation(net.tx_antennas[0], tx_rho);
    fading.rx_corr = netmodel::exp_correlation(net.rx_antennas[0], rx_rho);
  } else {
    throw ConfigError(path + ".model: expected iid_rayleigh or kronecker_correlated");
  }
  fading.normalized_doppler = get_number(j, path, "normalized_doppler", 0.0);
  return fading;
}

precode::AlgoSpec parse_algorithm(const json& j) {
  const std::string path = "config.algorithm";
  check_keys(j, path, {"name", "max_iters", "tol"});
  precode::AlgoSpec algo;
  algo.algorithm = precode::algorithm_from_string(get_string(j, path, "name", "", true));
  algo.options.max_iters = static_cast<int>(get_integer(j, path, "max_iters", 2000));
  algo.options.tol = get_number(j, path, "tol", 1e-10);
  return algo;
}

csimodel::CsiSpec parse_csi(const json& j) {
  const std::string path = "config.csi";
  check_keys(j, path,
             {"mechanism", "forward_snr_db", "reverse_snr_db", "training_reuse", "rounds",
              "pilot_cost_per_round", "pilot_snr_db"});
  csimodel::CsiSpec csi;
  csi.mechanism = csimodel::mechanism_from_string(get_string(j, path, "mechanism", "perfect"));
  parse_snr_field(j, path, "forward_snr_db", csi.forward_snr, csi.snr_tracks_operating);
  parse_snr_field(j, path, "reverse_snr_db", csi.reverse_snr, csi.snr_tracks_operating);
  parse_snr_field(j, path, "pilot_snr_db", csi.pilot_snr, csi.snr_tracks_operating);
  csi.training_reuse = static_cast<int>(get_integer(j, path, "training_reuse", 1));
  csi.rounds = static_cast<int>(get_integer(j, path, "rounds", 0));
  csi.pilot_cost_per_round = get_integer(j, path, "pilot_cost_per_round", 0);
  return csi;
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j, "config",
             {"schema_version", "network", "fading", "algorithm", "csi", "coherence", "sweep",
              "trials", "seed", "output_path", "partition"});
  if (get_integer(j, "config", "schema_version", 0, /*required=*/true) != 1) {
    throw ConfigError("config.schema_version: expected 1");
  }
  if (!j.contains("network")) throw ConfigError("config.network: required");
  ExperimentConfig cfg;
  cfg.network = parse_network(j["network"]);
  cfg.fading = j.contains("fading") ? parse_fading(j["fading"], cfg.network)
                                    : netmodel::FadingProcess{};
  if (!j.contains("algorithm")) throw ConfigError("config.algorithm: required");
  cfg.algo = parse_algorithm(j["algorithm"]);
  cfg.csi = j.contains("csi") ? parse_csi(j["csi"]) : csimodel::CsiSpec{};

  if (j.contains("coherence")) {
    check_keys(j["coherence"], "config.coherence", {"constant", "max_block_length"});
    cfg.coherence_constant = get_number(j["coherence"], "config.coherence", "constant", 0.423);
    cfg.coherence_cap =
        get_integer(j["coherence"], "config.coherence", "max_block_length", 1000000);
  }

  if (!j.contains("sweep")) throw ConfigError("config.sweep: required");
  check_keys(j["sweep"], "config.sweep", {"variable", "values"});
  const std::string var = get_string(j["sweep"], "config.sweep", "variable", "", true);
  if (var == "snr_db") {
    cfg.sweep_variable = SweepVariable::kSnrDb;
  } else if (var == "normalized_doppler") {
    cfg.sweep_variable = SweepVariable::kNormalizedDoppler;
  } else {
    throw ConfigError("config.sweep.variable: expected snr_db or normalized_doppler");
  }
  if (!j["sweep"].contains("values") || !j["sweep"]["values"].is_array()) {
    throw ConfigError("config.sweep.values: expected an array of numbers");
  }
  for (const auto& v : j["sweep"]["values"]) {
    if (!v.is_number()) throw ConfigError("config.sweep.values: expected numbers");
    cfg.sweep_values.push_back(v.get<double>());
  }

  cfg.trials = static_cast<int>(get_integer(j, "config", "trials", 1));
  cfg.seed = static_cast<uint64_t>(get_integer(j, "config", "seed", 1));
  cfg.output_path = get_string(j, "config", "output_path", "");

  if (j.contains("partition")) {
    check_keys(j["partition"], "config.partition", {"strategy", "group_size_target"});
    const std::string strat =
        get_string(j["partition"], "config.partition", "strategy", "exhaustive");
    if (strat == "exhaustive") {
      cfg.partition_strategy = PartitionStrategy::kExhaustive;
    } else if (strat == "greedy") {
      cfg.partition_strategy = PartitionStrategy::kGreedy;
    } else if (strat == "geographic") {
      cfg.partition_strategy = PartitionStrategy::kGeographic;
    } else {
      throw ConfigError("config.partition.strategy: expected exhaustive, greedy or geographic");
    }
    cfg.geographic_target = static_cast<int>(
        get_integer(j["partition"], "config.partition", "group_size_target", 1));
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = 1;

  json net;
  net["users"] = cfg.network.users;
  net["tx_antennas"] = cfg.network.tx_antennas;
  net["rx_antennas"] = cfg.network.rx_antennas;
  net["streams"] = cfg.network.streams;
  net["tx_power"] = cfg.network.tx_power;
  net["noise_var"] = cfg.network.noise_var;
  net["pathloss_exponent"] = cfg.network.pathloss_exponent;
  net["reference_distance"] = cfg.network.reference_distance;
  if (cfg.network.has_positions()) {
    json tx = json::array(), rx = json::array();
    for (const auto& p : *cfg.network.tx_positions) tx.push_back({p.x, p.y});
    for (const auto& p : *cfg.network.rx_positions) rx.push_back({p.x, p.y});
    net["tx_positions"] = tx;
    net["rx_positions"] = rx;
  }
  j["network"] = net;

  json fading;
  if (cfg.fading.model == netmodel::FadingModel::kIidRayleigh) {
    fading["model"] = "iid_rayleigh";
  } else {
    fading["model"] = "kronecker_correlated";
    // The exponential profile is parameterized by the first off-diagonal entry.
    fading["tx_corr_rho"] =
        cfg.fading.tx_corr.rows() > 1 ? std::real(cfg.fading.tx_corr(0, 1)) : 0.0;
    fading["rx_corr_rho"] =
        cfg.fading.rx_corr.rows() > 1 ? std::real(cfg.fading.rx_corr(0, 1)) : 0.0;
  }
  fading["normalized_doppler"] = cfg.fading.normalized_doppler;
  j["fading"] = fading;

  json algo;
  algo["name"] = precode::to_string(cfg.algo.algorithm);
  algo["max_iters"] = cfg.algo.options.max_iters;
  algo["tol"] = cfg.algo.options.tol;
  j["algorithm"] = algo;

  json csi;
  csi["mechanism"] = csimodel::to_string(cfg.csi.mechanism);
  const auto snr_field = [&](double linear) -> json {
    if (cfg.csi.snr_tracks_operating) return "track";
    if (std::isinf(linear)) return "infinite";
    return 10.0 * std::log10(linear);
  };
  if (cfg.csi.mechanism == csimodel::Mechanism::kAnalogFeedback) {
    csi["forward_snr_db"] = snr_field(cfg.csi.forward_snr);
    csi["reverse_snr_db"] = snr_field(cfg.csi.reverse_snr);
    csi["training_reuse"] = cfg.csi.training_reuse;
  } else if (cfg.csi.mechanism == csimodel::Mechanism::kReciprocity) {
    csi["rounds"] = cfg.csi.rounds;
    csi["pilot_cost_per_round"] = cfg.csi.pilot_cost_per_round;
    csi["pilot_snr_db"] = snr_field(cfg.csi.pilot_snr);
  }
  j["csi"] = csi;

  j["coherence"] = {{"constant", cfg.coherence_constant},
                    {"max_block_length", cfg.coherence_cap}};
  j["sweep"] = {{"variable", to_string(cfg.sweep_variable)}, {"values", cfg.sweep_values}};
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["output_path"] = cfg.output_path;
  j["partition"] = {{"strategy", to_string(cfg.partition_strategy)},
                    {"group_size_target", cfg.geographic_target}};
  return j.dump(2) + "\n";
}

ExperimentConfig resolve_config(const std::string& path_or_preset) {
  std::ifstream probe(path_or_preset);
  if (probe.good()) return load_config_file(path_or_preset);
  for (const auto& name : preset_names()) {
    if (name == path_or_preset) return preset(name);
  }
  throw ConfigError("config: '" + path_or_preset + "' is neither a readable file nor a preset (" +
                    [] {
                      std::string s;
                      for (const auto& n : preset_names()) {
                        if (!s.empty()) s += ", ";
                        s += n;
                      }
                      return s;
                    }() +
                    ")");
}

}  // namespace iasim::harness
