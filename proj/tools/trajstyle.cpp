// trajstyle: data generation, training, offline stylization and the live
// WebSocket service.

#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "trajstyle/service/commands.hpp"
#include "trajstyle/service/server.hpp"

namespace fs = std::filesystem;
using namespace trajstyle;

namespace {

service::Config load_config(const std::string& path) {
  return path.empty() ? service::Config{} : service::Config::load(path);
}

service::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory style transfer: autoencoder losses and per-style TD3 policies"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "INI config file (defaults when omitted)")->check(CLI::ExistingFile);

  auto* cfg_cmd = app.add_subcommand("config", "Print the configuration with every key");

  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-data", "Write synthetic training trajectories as CSV");
  gen->add_option("--count", count, "number of trajectories")->required();
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out", out_dir, "output directory")->required();

  std::string data_dir, out_ckpt, log_path;
  auto* train_ae = app.add_subcommand("train-ae", "Train the loss-network autoencoder");
  train_ae->add_option("--data", data_dir, "directory of CSV trajectories")->required();
  train_ae->add_option("--out", out_ckpt, "autoencoder checkpoint to write")->required();
  train_ae->add_option("--log", log_path, "per-epoch loss CSV");

  std::string style_csv, ae_ckpt, style_id;
  auto* train_pol = app.add_subcommand("train-policy", "Train a TD3 policy for one style exemplar");
  train_pol->add_option("--style", style_csv, "style exemplar CSV")->required()->check(CLI::ExistingFile);
  train_pol->add_option("--ae", ae_ckpt, "autoencoder checkpoint")->required()->check(CLI::ExistingFile);
  train_pol->add_option("--out", out_ckpt, "policy checkpoint to write")->required();
  train_pol->add_option("--id", style_id, "style name (defaults to the CSV file stem)");
  train_pol->add_option("--log", log_path, "per-episode reward CSV");

  std::string content_csv, policy_ckpt, out_csv, report_json;
  auto* styl = app.add_subcommand("stylize", "Render a stored content trajectory in a trained style");
  styl->add_option("--content", content_csv, "content CSV")->required()->check(CLI::ExistingFile);
  styl->add_option("--policy", policy_ckpt, "policy checkpoint")->required()->check(CLI::ExistingFile);
  styl->add_option("--ae", ae_ckpt, "autoencoder checkpoint")->required()->check(CLI::ExistingFile);
  styl->add_option("--out", out_csv, "generated CSV")->required();
  styl->add_option("--report", report_json, "JSON loss report");

  std::string ckpt_dir, address = "127.0.0.1";
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Serve live sessions over WebSocket");
  serve->add_option("--checkpoints", ckpt_dir, "directory of *.policy files (default: config checkpoint_dir)");
  serve->add_option("--ae", ae_ckpt, "autoencoder checkpoint (default: <checkpoints>/autoencoder.ckpt)");
  serve->add_option("--address", address, "listen address");
  serve->add_option("--port", port, "listen port, 0 for any free port (default: config)");

  CLI11_PARSE(app, argc, argv);

  try {
    const service::Config cfg = load_config(config_path);
    if (*cfg_cmd) {
      std::cout << cfg.to_ini();
    } else if (*gen) {
      const auto files = service::gen_data(count, seed, out_dir, cfg.workspace);
      std::cout << "wrote " << files.size() << " trajectories to " << out_dir << "\n";
    } else if (*train_ae) {
      service::train_ae(cfg, data_dir, out_ckpt, log_path, &std::cerr);
    } else if (*train_pol) {
      service::train_policy(cfg, style_csv, ae_ckpt, out_ckpt, style_id, log_path, &std::cerr);
    } else if (*styl) {
      service::stylize(content_csv, policy_ckpt, ae_ckpt, out_csv, report_json);
    } else if (*serve) {
      const fs::path dir = ckpt_dir.empty() ? cfg.checkpoint_dir : fs::path(ckpt_dir);
      const fs::path ae = ae_ckpt.empty() ? dir / "autoencoder.ckpt" : fs::path(ae_ckpt);
      auto styles = service::load_styles(dir, ae);
      std::vector<std::string> names;
      for (const auto& [name, policy] : styles) names.push_back(name);
      service::Server server(std::move(styles), address, port < 0 ? cfg.port : static_cast<std::uint16_t>(port));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << address << ":" << server.port() << " styles:";
      for (const auto& n : names) std::cout << " " << n;
      std::cout << std::endl;
      server.run();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
