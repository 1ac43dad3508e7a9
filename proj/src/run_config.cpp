// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mimo_ae {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("not a number: '" + raw + "'");
  return v;
}

bool parse_bool(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + raw + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"system.antennas", [](RunConfig& c, const std::string& v) { c.system.M = parse_number<int>(v); }},
      {"system.users", [](RunConfig& c, const std::string& v) { c.system.K = parse_number<int>(v); }},
      {"system.subcarriers", [](RunConfig& c, const std::string& v) { c.system.n_sc = parse_number<int>(v); }},
      {"system.n_cbw", [](RunConfig& c, const std::string& v) { c.system.n_cbw = parse_number<int>(v); }},
      {"system.n_slot", [](RunConfig& c, const std::string& v) { c.system.n_slot = parse_number<int>(v); }},
      {"system.constellation", [](RunConfig& c, const std::string& v) { c.system.constellation = parse_constellation(trim(v)); }},
      {"system.seed", [](RunConfig& c, const std::string& v) { c.system.master_seed = parse_number<std::uint64_t>(v); }},
      {"sweep.scenarios", [](RunConfig& c, const std::string& v) { c.scenarios = parse_scenario_list(v); }},
      {"sweep.ndiv", [](RunConfig& c, const std::string& v) { c.ndiv = parse_int_list(v); }},
      {"sweep.snr_db", [](RunConfig& c, const std::string& v) { c.snr_db = parse_double_list(v); }},
      {"sweep.blocks", [](RunConfig& c, const std::string& v) { c.blocks = parse_number<int>(v); }},
      {"sweep.iterations", [](RunConfig& c, const std::string& v) { c.iterations = parse_number<int>(v); }},
      {"sweep.threads", [](RunConfig& c, const std::string& v) { c.threads = parse_number<int>(v); }},
      {"autoencoder.epochs", [](RunConfig& c, const std::string& v) { c.ae.hyper.max_epochs = parse_number<int>(v); }},
      {"autoencoder.l2", [](RunConfig& c, const std::string& v) { c.ae.hyper.l2_coeff = parse_number<double>(v); }},
      {"autoencoder.sparsity", [](RunConfig& c, const std::string& v) { c.ae.hyper.sparsity_coeff = parse_number<double>(v); }},
      {"autoencoder.sparsity_target", [](RunConfig& c, const std::string& v) { c.ae.hyper.sparsity_target = parse_number<double>(v); }},
      {"autoencoder.grad_tol", [](RunConfig& c, const std::string& v) { c.ae.hyper.grad_tol = parse_number<double>(v); }},
      {"autoencoder.loss_tol", [](RunConfig& c, const std::string& v) { c.ae.hyper.loss_tol = parse_number<double>(v); }},
      {"autoencoder.range_padding", [](RunConfig& c, const std::string& v) { c.ae.hyper.range_padding = parse_number<double>(v); }},
      {"autoencoder.rotations", [](RunConfig& c, const std::string& v) { c.ae.rotations = parse_number<int>(v); }},
      {"autoencoder.training_snr", [](RunConfig& c, const std::string& v) {
         const std::string s = trim(v);
         if (s == "operating") c.ae.training_snr = TrainingSnr::kOperating;
         else if (s == "fixed") c.ae.training_snr = TrainingSnr::kFixed;
         else throw ConfigError("training_snr must be 'operating' or 'fixed', got '" + s + "'");
       }},
      {"autoencoder.fixed_training_snr_db", [](RunConfig& c, const std::string& v) { c.ae.fixed_training_snr_db = parse_number<double>(v); }},
      {"autoencoder.wire_f64", [](RunConfig& c, const std::string& v) {
         c.ae.precision = parse_bool(v) ? WirePrecision::kFloat64 : WirePrecision::kFloat32;
       }},
      {"admm.clusters", [](RunConfig& c, const std::string& v) { c.admm_clusters = parse_number<int>(v); }},
      {"admm.rho", [](RunConfig& c, const std::string& v) { c.admm.rho = parse_number<double>(v); }},
      {"admm.inner_iterations", [](RunConfig& c, const std::string& v) { c.admm.t_inner = parse_number<int>(v); }},
  };
  return table;
}

}  // namespace

AeSettings RunConfig::desk_ae_settings() {
  AeSettings s;
  s.hyper.max_epochs = 2000;
  return s;
}

void RunConfig::apply_paper_scale() {
  system.M = 512;
  system.K = 40;
  admm_clusters = 4;
  iterations = 5;
}

SweepConfig RunConfig::to_sweep() const {
  SweepConfig sc;
  sc.system = system;
  sc.snr_db = snr_db;
  sc.n_blocks = blocks;
  sc.ae = ae;
  sc.admm = admm;
  sc.threads = threads;
  for (ScenarioKind k : scenarios) {
    switch (k) {
      case ScenarioKind::kFullBw:
        sc.scenarios.push_back(Scenario::full_bw(iterations));
        break;
      case ScenarioKind::kAe:
        for (int d : ndiv) sc.scenarios.push_back(Scenario::ae(d, iterations));
        break;
      case ScenarioKind::kArrayReduced:
        for (int d : ndiv)
          sc.scenarios.push_back(Scenario::array_reduced(d, iterations));
        break;
      case ScenarioKind::kAdmm:
        sc.scenarios.push_back(Scenario::admm(admm_clusters, iterations));
        break;
    }
  }
  return sc;
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out;
  if (scenarios.empty()) out.push_back("at least one scenario is required");
  if (ndiv.empty()) out.push_back("the n_div list is empty");
  if (blocks < 1) out.push_back("blocks must be >= 1");
  if (iterations < 1) out.push_back("iterations must be >= 1");
  if (ae.hyper.max_epochs < 1) out.push_back("epochs must be >= 1");
  for (auto& v : to_sweep().violations()) {
    if (std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(std::move(v));
  }
  return out;
}

void RunConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& m : v) os << "\n  - " << m;
  throw ConfigError(os.str());
}

RunConfig load_run_config(std::istream& is, RunConfig base) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  std::vector<std::string> errors;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      errors.push_back("key '" + section + "' outside any section");
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string name = section + "." + key;
      const auto it = setters().find(name);
      if (it == setters().end()) {
        errors.push_back("unknown key '" + name + "'");
        continue;
      }
      try {
        it->second(base, node.get_value<std::string>());
      } catch (const std::exception& e) {
        errors.push_back(name + ": " + e.what());
      }
    }
  }
  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid configuration file:";
    for (const auto& m : errors) os << "\n  - " << m;
    throw ConfigError(os.str());
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path.string());
  return load_run_config(f, std::move(base));
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& t : split_list(text)) out.push_back(parse_number<double>(t));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& t : split_list(text)) out.push_back(parse_number<int>(t));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<ScenarioKind> parse_scenario_list(const std::string& text) {
  std::vector<ScenarioKind> out;
  for (const auto& t : split_list(text)) out.push_back(parse_scenario_kind(t));
  if (out.empty()) throw ConfigError("empty scenario list");
  return out;
}

}  // namespace mimo_ae
