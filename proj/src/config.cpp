#include "fmcsc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc{} || p != value.data() + value.size())
    throw ConfigError("config: key '" + key + "' expects a nonnegative integer, got '" +
                      value + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" + value + "'");
}

std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("config: key '" + key + "' has an empty list element");
    out.push_back(static_cast<std::size_t>(parse_count(key, item)));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset.path", [](auto& c, auto&, auto& v) { c.dataset_path = v; }},
      {"synthetic.samples",
       [](auto& c, auto& k, auto& v) { c.synthetic.num_samples = parse_count(k, v); }},
      {"synthetic.classes",
       [](auto& c, auto& k, auto& v) { c.synthetic.num_classes = parse_count(k, v); }},
      {"synthetic.views",
       [](auto& c, auto& k, auto& v) { c.synthetic.num_views = parse_count(k, v); }},
      {"synthetic.view_dims",
       [](auto& c, auto& k, auto& v) { c.synthetic.view_dims = parse_count_list(k, v); }},
      {"synthetic.separation",
       [](auto& c, auto& k, auto& v) { c.synthetic.cluster_separation = parse_real(k, v); }},
      {"synthetic.noise_sigma",
       [](auto& c, auto& k, auto& v) { c.synthetic.noise_sigma = parse_real(k, v); }},
      {"partition.multi_clients",
       [](auto& c, auto& k, auto& v) { c.partition.num_multi_clients = parse_count(k, v); }},
      {"partition.single_clients",
       [](auto& c, auto& k, auto& v) { c.partition.num_single_clients = parse_count(k, v); }},
      {"partition.single_view_assignment",
       [](auto& c, auto& k, auto& v) {
         auto list = parse_count_list(k, v);
         c.partition.single_view_assignment.assign(list.begin(), list.end());
       }},
      {"partition.dirichlet_beta",
       [](auto& c, auto& k, auto& v) {
         if (v == "iid")
           c.partition.dirichlet_beta = std::numeric_limits<double>::infinity();
         else
           c.partition.dirichlet_beta = parse_real(k, v);
       }},
      {"partition.participation_rate",
       [](auto& c, auto& k, auto& v) { c.partition.participation_rate = parse_real(k, v); }},
      {"rounds", [](auto& c, auto& k, auto& v) { c.rounds = parse_count(k, v); }},
      {"local_epochs", [](auto& c, auto& k, auto& v) { c.local_epochs = parse_count(k, v); }},
      {"pretrain_epochs",
       [](auto& c, auto& k, auto& v) { c.pretrain_epochs = parse_count(k, v); }},
      {"learning_rate",
       [](auto& c, auto& k, auto& v) { c.learning_rate = parse_real(k, v); }},
      {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = parse_count(k, v); }},
      {"tau_m", [](auto& c, auto& k, auto& v) { c.tau_m = parse_real(k, v); }},
      {"tau_p", [](auto& c, auto& k, auto& v) { c.tau_p = parse_real(k, v); }},
      {"delta_m", [](auto& c, auto& k, auto& v) { c.delta_m = parse_real(k, v); }},
      {"delta_p", [](auto& c, auto& k, auto& v) { c.delta_p = parse_real(k, v); }},
      {"dp.enabled", [](auto& c, auto& k, auto& v) { c.dp.enabled = parse_bool(k, v); }},
      {"dp.epsilon", [](auto& c, auto& k, auto& v) { c.dp.epsilon = parse_real(k, v); }},
      {"dp.clip_norm", [](auto& c, auto& k, auto& v) { c.dp.clip_norm = parse_real(k, v); }},
      {"clusters", [](auto& c, auto& k, auto& v) { c.num_clusters = parse_count(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_count(k, v); }},
      {"workers", [](auto& c, auto& k, auto& v) { c.workers = parse_count(k, v); }},
      {"consensus_pretraining",
       [](auto& c, auto& k, auto& v) { c.consensus_pretraining = parse_bool(k, v); }},
      {"component_b", [](auto& c, auto& k, auto& v) { c.component_b = parse_bool(k, v); }},
      {"component_c", [](auto& c, auto& k, auto& v) { c.component_c = parse_bool(k, v); }},
      {"weighted_aggregation",
       [](auto& c, auto& k, auto& v) { c.weighted_aggregation = parse_bool(k, v); }},
      {"per_type_normalization",
       [](auto& c, auto& k, auto& v) { c.per_type_normalization = parse_bool(k, v); }},
      {"contrast_enabled",
       [](auto& c, auto& k, auto& v) { c.contrast_enabled = parse_bool(k, v); }},
      {"model.encoder_hidden",
       [](auto& c, auto& k, auto& v) { c.encoder_hidden = parse_count_list(k, v); }},
      {"model.latent_dim",
       [](auto& c, auto& k, auto& v) { c.latent_dim = parse_count(k, v); }},
      {"model.common_dim",
       [](auto& c, auto& k, auto& v) { c.common_dim = parse_count(k, v); }},
      {"model.head_hidden",
       [](auto& c, auto& k, auto& v) { c.head_hidden = parse_count(k, v); }},
  };
  return table;
}

void apply_line(ExperimentConfig& cfg, const std::string& line, std::size_t lineno) {
  std::string body = line;
  if (auto hash = body.find('#'); hash != std::string::npos) body = body.substr(0, hash);
  body = trim(body);
  if (body.empty()) return;
  auto eq = body.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
  std::string key = trim(body.substr(0, eq));
  std::string value = trim(body.substr(eq + 1));
  auto it = setters().find(key);
  if (it == setters().end())
    throw ConfigError("config: unknown key '" + key + "' (line " + std::to_string(lineno) +
                      ")");
  it->second(cfg, key, value);
}

std::string format_real(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

std::string format_list(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("config: learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("config: batch_size must be > 0");
  if (tau_m <= 0.0 || tau_p <= 0.0) throw ConfigError("config: temperatures must be > 0");
  if (delta_m <= 0.0 || delta_p <= 0.0) throw ConfigError("config: deltas must be > 0");
  if (partition.num_multi_clients < 1)
    throw ConfigError("config: at least one multi-view client required");
  if (partition.participation_rate <= 0.0 || partition.participation_rate > 1.0)
    throw ConfigError("config: participation_rate must be in (0, 1]");
  if (dp.enabled) {
    if (dp.epsilon <= 0.0) throw ConfigError("config: dp.epsilon must be > 0");
    if (dp.clip_norm <= 0.0) throw ConfigError("config: dp.clip_norm must be > 0");
  }
  if (latent_dim != common_dim)
    throw ConfigError("config: model.latent_dim must equal model.common_dim "
                      "(the model contrast compares the two spaces)");
  if (workers == 0) throw ConfigError("config: workers must be >= 1");
  if (dataset_path.empty()) {
    if (synthetic.num_classes < 1 || synthetic.num_samples < synthetic.num_classes)
      throw ConfigError("config: synthetic.samples must be >= synthetic.classes >= 1");
    if (synthetic.num_views < 1) throw ConfigError("config: synthetic.views must be >= 1");
    if (synthetic.cluster_separation <= 0.0)
      throw ConfigError("config: synthetic.separation must be > 0");
    if (synthetic.noise_sigma < 0.0)
      throw ConfigError("config: synthetic.noise_sigma must be >= 0");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) apply_line(cfg, line, ++lineno);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto b = [](bool x) { return x ? "true" : "false"; };
  if (!cfg.dataset_path.empty()) out << "dataset.path = " << cfg.dataset_path << "\n";
  else {
    out << "synthetic.samples = " << cfg.synthetic.num_samples << "\n";
    out << "synthetic.classes = " << cfg.synthetic.num_classes << "\n";
    out << "synthetic.views = " << cfg.synthetic.num_views << "\n";
    if (!cfg.synthetic.view_dims.empty())
      out << "synthetic.view_dims = " << format_list(cfg.synthetic.view_dims) << "\n";
    out << "synthetic.separation = " << format_real(cfg.synthetic.cluster_separation)
        << "\n";
    out << "synthetic.noise_sigma = " << format_real(cfg.synthetic.noise_sigma) << "\n";
  }
  out << "partition.multi_clients = " << cfg.partition.num_multi_clients << "\n";
  out << "partition.single_clients = " << cfg.partition.num_single_clients << "\n";
  if (!cfg.partition.single_view_assignment.empty())
    out << "partition.single_view_assignment = "
        << format_list(cfg.partition.single_view_assignment) << "\n";
  if (cfg.partition.iid()) out << "partition.dirichlet_beta = iid\n";
  else
    out << "partition.dirichlet_beta = " << format_real(cfg.partition.dirichlet_beta)
        << "\n";
  out << "partition.participation_rate = "
      << format_real(cfg.partition.participation_rate) << "\n";
  out << "rounds = " << cfg.rounds << "\n";
  out << "local_epochs = " << cfg.local_epochs << "\n";
  out << "pretrain_epochs = " << cfg.pretrain_epochs << "\n";
  out << "learning_rate = " << format_real(cfg.learning_rate) << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "tau_m = " << format_real(cfg.tau_m) << "\n";
  out << "tau_p = " << format_real(cfg.tau_p) << "\n";
  out << "delta_m = " << format_real(cfg.delta_m) << "\n";
  out << "delta_p = " << format_real(cfg.delta_p) << "\n";
  out << "dp.enabled = " << b(cfg.dp.enabled) << "\n";
  if (cfg.dp.enabled) {
    out << "dp.epsilon = " << format_real(cfg.dp.epsilon) << "\n";
    out << "dp.clip_norm = " << format_real(cfg.dp.clip_norm) << "\n";
  }
  out << "clusters = " << cfg.num_clusters << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "consensus_pretraining = " << b(cfg.consensus_pretraining) << "\n";
  out << "component_b = " << b(cfg.component_b) << "\n";
  out << "component_c = " << b(cfg.component_c) << "\n";
  out << "weighted_aggregation = " << b(cfg.weighted_aggregation) << "\n";
  out << "per_type_normalization = " << b(cfg.per_type_normalization) << "\n";
  out << "contrast_enabled = " << b(cfg.contrast_enabled) << "\n";
  out << "model.encoder_hidden = " << format_list(cfg.encoder_hidden) << "\n";
  out << "model.latent_dim = " << cfg.latent_dim << "\n";
  out << "model.common_dim = " << cfg.common_dim << "\n";
  out << "model.head_hidden = " << cfg.head_hidden << "\n";
  return out.str();
}

SyntheticSpec parse_synthetic_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string probe = line;
    if (auto hash = probe.find('#'); hash != std::string::npos)
      probe = probe.substr(0, hash);
    probe = trim(probe);
    if (probe.empty()) continue;
    std::string key = trim(probe.substr(0, probe.find('=')));
    if (key.rfind("synthetic.", 0) != 0 && key != "seed")
      throw ConfigError("gen-synthetic spec: unexpected key '" + key + "' (line " +
                        std::to_string(lineno) + ")");
    apply_line(cfg, line, lineno);
  }
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.seed;
  if (spec.num_classes < 1 || spec.num_samples < spec.num_classes)
    throw ConfigError("gen-synthetic spec: samples must be >= classes >= 1");
  if (spec.num_views < 1) throw ConfigError("gen-synthetic spec: views must be >= 1");
  if (spec.cluster_separation <= 0.0)
    throw ConfigError("gen-synthetic spec: separation must be > 0");
  return spec;
}

}  // namespace fmcsc
