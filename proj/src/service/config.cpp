#include "trajstyle/service/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "trajstyle/error.hpp"

namespace trajstyle::service {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"workspace", {"rt", "lo", "hi"}},
    {"loss", {"content", "style", "position", "end_position", "velocity"}},
    {"autoencoder", {"channels", "kernel", "dropout", "epochs", "batch", "lr", "seed"}},
    {"network", {"conv_channels", "kernel", "dense", "batch_norm"}},
    {"td3",
     {"episodes", "batch", "replay_capacity", "horizon", "critic_lr", "actor_lr", "gamma", "tau",
      "critic_actor_ratio", "policy_noise_std", "policy_noise_clip", "action_noise_std", "action_range",
      "init_span", "seed"}},
    {"paths", {"dataset_dir", "checkpoint_dir"}},
    {"service", {"port"}},
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ValueError("config " + key + ": not a number: '" + text + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ValueError("config " + key + ": not a non-negative integer: '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) out.push_back(static_cast<std::size_t>(to_uint(key, item)));
  return out;
}

trajectory::Vec3 to_vec3(const std::string& key, const std::string& text) {
  const auto items = split_list(text);
  if (items.size() != 3) throw ValueError("config " + key + ": expected x,y,z");
  return {to_double(key, items[0]), to_double(key, items[1]), to_double(key, items[2])};
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ValueError("config " + key + ": expected true or false");
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void Config::validate() const {
  workspace.validate();
  weights.validate();
  autoencoder.validate();
  ae_train.validate();
  net.validate();
  train.validate();
}

Config Config::parse(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto it = kKeys.find(section);
    if (it == kKeys.end()) throw ValueError("config: unknown section or key outside a section: " + section);
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ValueError("config: unknown key " + section + "." + key);
  }
  const auto get = [&](const std::string& path) { return tree.get_optional<std::string>(path); };

  Config c;
  if (auto v = get("workspace.rt")) {
    c.workspace.rt = to_double("workspace.rt", *v);
    c.workspace.lo = {-c.workspace.rt, -c.workspace.rt, -c.workspace.rt};
    c.workspace.hi = {c.workspace.rt, c.workspace.rt, c.workspace.rt};
  }
  if (auto v = get("workspace.lo")) c.workspace.lo = to_vec3("workspace.lo", *v);
  if (auto v = get("workspace.hi")) c.workspace.hi = to_vec3("workspace.hi", *v);
  c.train = td3::TrainConfig::for_rt(c.workspace.rt);

  const auto set_double = [&](const std::string& path, double& field) {
    if (auto v = get(path)) field = to_double(path, *v);
  };
  const auto set_size = [&](const std::string& path, std::size_t& field) {
    if (auto v = get(path)) field = static_cast<std::size_t>(to_uint(path, *v));
  };
  const auto set_u64 = [&](const std::string& path, std::uint64_t& field) {
    if (auto v = get(path)) field = to_uint(path, *v);
  };

  set_double("loss.content", c.weights.content);
  set_double("loss.style", c.weights.style);
  set_double("loss.position", c.weights.position);
  set_double("loss.end_position", c.weights.end_position);
  set_double("loss.velocity", c.weights.velocity);

  set_size("autoencoder.channels", c.autoencoder.channels);
  set_size("autoencoder.kernel", c.autoencoder.kernel);
  set_double("autoencoder.dropout", c.autoencoder.dropout);
  set_size("autoencoder.epochs", c.ae_train.epochs);
  set_size("autoencoder.batch", c.ae_train.batch);
  set_double("autoencoder.lr", c.ae_train.lr);
  set_u64("autoencoder.seed", c.ae_train.seed);

  if (auto v = get("network.conv_channels")) c.net.conv_channels = to_sizes("network.conv_channels", *v);
  set_size("network.kernel", c.net.kernel);
  if (auto v = get("network.dense")) c.net.dense = to_sizes("network.dense", *v);
  if (auto v = get("network.batch_norm")) c.net.batch_norm = to_bool("network.batch_norm", *v);

  set_size("td3.episodes", c.train.episodes);
  set_size("td3.batch", c.train.batch);
  set_size("td3.replay_capacity", c.train.replay_capacity);
  set_size("td3.horizon", c.train.horizon);
  set_double("td3.critic_lr", c.train.critic_lr);
  set_double("td3.actor_lr", c.train.actor_lr);
  set_double("td3.gamma", c.train.gamma);
  set_double("td3.tau", c.train.tau);
  set_size("td3.critic_actor_ratio", c.train.critic_actor_ratio);
  set_double("td3.policy_noise_std", c.train.policy_noise_std);
  set_double("td3.policy_noise_clip", c.train.policy_noise_clip);
  set_double("td3.action_noise_std", c.train.action_noise_std);
  set_double("td3.action_range", c.train.action_range);
  set_double("td3.init_span", c.train.init_span);
  set_u64("td3.seed", c.train.seed);

  if (auto v = get("paths.dataset_dir")) c.dataset_dir = trim(*v);
  if (auto v = get("paths.checkpoint_dir")) c.checkpoint_dir = trim(*v);
  if (auto v = get("service.port")) {
    const auto port = to_uint("service.port", *v);
    if (port > 65535) throw ValueError("config service.port out of range");
    c.port = static_cast<std::uint16_t>(port);
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  return parse(in);
}

std::string Config::to_ini() const {
  std::ostringstream os;
  const auto vec = [](const trajectory::Vec3& v) { return num(v[0]) + "," + num(v[1]) + "," + num(v[2]); };
  os << "[workspace]\n"
     << "# reference length RT in mm; lo/hi default to -RT/+RT on every axis\n"
     << "rt = " << num(workspace.rt) << "\n"
     << "lo = " << vec(workspace.lo) << "\n"
     << "hi = " << vec(workspace.hi) << "\n\n"
     << "[loss]\n"
     << "content = " << num(weights.content) << "\n"
     << "style = " << num(weights.style) << "\n"
     << "position = " << num(weights.position) << "\n"
     << "end_position = " << num(weights.end_position) << "\n"
     << "velocity = " << num(weights.velocity) << "\n\n"
     << "[autoencoder]\n"
     << "channels = " << autoencoder.channels << "\n"
     << "kernel = " << autoencoder.kernel << "\n"
     << "dropout = " << num(autoencoder.dropout) << "\n"
     << "epochs = " << ae_train.epochs << "\n"
     << "batch = " << ae_train.batch << "\n"
     << "lr = " << num(ae_train.lr) << "\n"
     << "seed = " << ae_train.seed << "\n\n"
     << "[network]\n"
     << "conv_channels = " << join(net.conv_channels) << "\n"
     << "kernel = " << net.kernel << "\n"
     << "# the critic adds one extra layer of width dense[1] after the action joins\n"
     << "dense = " << join(net.dense) << "\n"
     << "batch_norm = " << (net.batch_norm ? "true" : "false") << "\n\n"
     << "[td3]\n"
     << "episodes = " << train.episodes << "\n"
     << "batch = " << train.batch << "\n"
     << "replay_capacity = " << train.replay_capacity << "\n"
     << "# steps per episode, 49 fills a 50-sample segment\n"
     << "horizon = " << train.horizon << "\n"
     << "critic_lr = " << num(train.critic_lr) << "\n"
     << "actor_lr = " << num(train.actor_lr) << "\n"
     << "gamma = " << num(train.gamma) << "\n"
     << "tau = " << num(train.tau) << "\n"
     << "critic_actor_ratio = " << train.critic_actor_ratio << "\n"
     << "# millimetres; defaults are 0.002, 0.005, 0.02 and 0.1 times rt\n"
     << "policy_noise_std = " << num(train.policy_noise_std) << "\n"
     << "policy_noise_clip = " << num(train.policy_noise_clip) << "\n"
     << "action_noise_std = " << num(train.action_noise_std) << "\n"
     << "action_range = " << num(train.action_range) << "\n"
     << "init_span = " << num(train.init_span) << "\n"
     << "seed = " << train.seed << "\n\n"
     << "[paths]\n"
     << "dataset_dir = " << dataset_dir.string() << "\n"
     << "checkpoint_dir = " << checkpoint_dir.string() << "\n\n"
     << "[service]\n"
     << "port = " << port << "\n";
  return os.str();
}

}  // namespace trajstyle::service
