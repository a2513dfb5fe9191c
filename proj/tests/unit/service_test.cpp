#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "trajstyle/service/commands.hpp"
#include "trajstyle/service/config.hpp"
#include "trajstyle/service/protocol.hpp"
#include "trajstyle/service/server.hpp"
#include "trajstyle/td3/checkpoint.hpp"
#include "trajstyle/trajectory/csv.hpp"
#include "trajstyle/trajectory/generate.hpp"

namespace trajstyle::service {
namespace {

using nlohmann::json;
using numkit::Rng;

std::shared_ptr<const engine::StylePolicy> make_policy(const std::string& id, std::uint64_t seed) {
  Rng rng(seed);
  lossnet::Autoencoder ae({4, 5, 0.25});
  ae.initialize(rng);
  ae.set_trained(true);
  td3::PolicyCheckpoint c;
  c.style_id = id;
  c.style_mm = trajectory::to_tensor(trajectory::jerky_style(rng, c.workspace));
  c.net.conv_channels = {4, 4, 4};
  c.net.dense = {8, 8, 6, 5};
  c.nets = td3::Td3Nets(c.net);
  c.nets.initialize(rng, 2.0);
  return std::make_shared<const engine::StylePolicy>(std::move(c), std::move(ae));
}

StyleRegistry registry() { return {{"jerky", make_policy("jerky", 1)}, {"calm", make_policy("calm", 2)}}; }

std::string point_msg(const trajectory::Vec3& p) {
  return json{{"type", "point"}, {"point", {p[0], p[1], p[2]}}}.dump();
}

std::string start_msg(const std::string& style, const trajectory::Vec3& p) {
  return json{{"type", "start"}, {"style", style}, {"point", {p[0], p[1], p[2]}}}.dump();
}

std::string error_code(const std::string& frame) {
  const json j = json::parse(frame);
  return j["type"] == "error" ? j["code"].get<std::string>() : std::string();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("trajstyle_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(Config, DefaultsMatchTheHyperparameterTable) {
  const Config c;
  EXPECT_EQ(c.workspace.rt, 300.0);
  EXPECT_EQ(c.weights, styleloss::LossWeights({100, 1, 0.1, 1, 20}));
  EXPECT_EQ(c.net.conv_channels, (std::vector<std::size_t>{256, 128, 128}));
  EXPECT_EQ(c.net.dense, (std::vector<std::size_t>{512, 512, 400, 300}));
  EXPECT_EQ(c.train.episodes, 2500u);
  EXPECT_EQ(c.train.batch, 64u);
  EXPECT_EQ(c.train.replay_capacity, 1000u);
  EXPECT_EQ(c.train.critic_lr, 1e-5);
  EXPECT_EQ(c.train.actor_lr, 1e-6);
  EXPECT_EQ(c.train.gamma, 0.99);
  EXPECT_EQ(c.train.tau, 1e-3);
  EXPECT_EQ(c.train.critic_actor_ratio, 2u);
  EXPECT_DOUBLE_EQ(c.train.policy_noise_std, 0.6);
  EXPECT_DOUBLE_EQ(c.train.action_noise_std, 6.0);
  EXPECT_DOUBLE_EQ(c.train.action_range, 30.0);
  EXPECT_EQ(c.train.init_span, 3e-3);
  EXPECT_EQ(c.ae_train.epochs, 1000u);
  EXPECT_EQ(c.ae_train.batch, 256u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesOverridesAndScalesWithRt) {
  std::istringstream in(
      "[workspace]\nrt = 500\n[loss]\nstyle = 2.5\n[network]\nconv_channels = 16, 16, 16\n"
      "dense = 64,64,32,24\nbatch_norm = false\n[td3]\nepisodes = 10\nactor_lr = 1e-4\n[service]\nport = 9000\n");
  const Config c = Config::parse(in);
  EXPECT_EQ(c.workspace.rt, 500.0);
  EXPECT_EQ(c.workspace.hi, (trajectory::Vec3{500, 500, 500}));
  EXPECT_DOUBLE_EQ(c.train.action_range, 50.0);
  EXPECT_DOUBLE_EQ(c.train.action_noise_std, 10.0);
  EXPECT_EQ(c.weights.style, 2.5);
  EXPECT_EQ(c.weights.content, 100.0);
  EXPECT_EQ(c.net.conv_channels, (std::vector<std::size_t>{16, 16, 16}));
  EXPECT_FALSE(c.net.batch_norm);
  EXPECT_EQ(c.train.episodes, 10u);
  EXPECT_EQ(c.train.actor_lr, 1e-4);
  EXPECT_EQ(c.port, 9000);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in);
  };
  EXPECT_THROW(parse("[td3]\nepisode = 3\n"), ValueError);
  EXPECT_THROW(parse("[nonsense]\na = 1\n"), ValueError);
  EXPECT_THROW(parse("[td3]\nepisodes = many\n"), ValueError);
  EXPECT_THROW(parse("[td3\nepisodes = 3\n"), ParseError);
  EXPECT_THROW(Config::load("/nonexistent/trajstyle.ini"), Error);
}

TEST(Config, WrittenFileParsesBackIdentically) {
  Config c;
  c.net.dense = {64, 64, 32, 24};
  c.train.critic_lr = 3.3e-4;
  c.weights.velocity = 0.125;
  c.checkpoint_dir = "ckpts";
  std::istringstream in(c.to_ini());
  const Config back = Config::parse(in);
  EXPECT_EQ(back.to_ini(), c.to_ini());
  EXPECT_EQ(back.net, c.net);
  EXPECT_EQ(back.train.critic_lr, 3.3e-4);
  EXPECT_EQ(back.checkpoint_dir, "ckpts");
}

TEST(Protocol, ErrorsBeforeAndAfterASession) {
  const StyleRegistry styles = registry();
  std::atomic<std::uint64_t> ids{1};
  ProtocolHandler h(styles, ids);
  EXPECT_EQ(error_code(h.handle(point_msg({0, 0, 0}))[0]), "no_session");
  EXPECT_EQ(error_code(h.handle(R"({"type":"finish"})")[0]), "no_session");
  EXPECT_EQ(error_code(h.handle("not json")[0]), "bad_request");
  EXPECT_EQ(error_code(h.handle(R"({"type":"dance"})")[0]), "bad_request");
  EXPECT_EQ(error_code(h.handle(R"({"type":"point","point":[1,2]})")[0]), "bad_request");
  EXPECT_EQ(error_code(h.handle(start_msg("happy", {0, 0, 0}))[0]), "unknown_style");
  EXPECT_EQ(error_code(h.handle(start_msg("jerky", {0, 0, 400}))[0]), "out_of_bounds");
  EXPECT_FALSE(h.session_open());

  const auto ack = h.handle(start_msg("jerky", {1, 2, 3}));
  ASSERT_EQ(ack.size(), 2u);
  const json a = json::parse(ack[0]);
  EXPECT_EQ(a["type"], "ack");
  EXPECT_EQ(a["session"], 1);
  EXPECT_EQ(a["styles"], json({"calm", "jerky"}));
  const json echo = json::parse(ack[1]);
  EXPECT_EQ(echo["t"], 0);
  EXPECT_EQ(echo["point"], json({1.0, 2.0, 3.0}));

  EXPECT_EQ(error_code(h.handle(point_msg({0, -500, 0}))[0]), "out_of_bounds");
  EXPECT_TRUE(h.session_open());
  EXPECT_EQ(json::parse(h.handle(R"({"type":"finish"})")[0])["type"], "done");
  EXPECT_EQ(error_code(h.handle(point_msg({0, 0, 0}))[0]), "session_closed");
  EXPECT_EQ(error_code(h.handle(R"({"type":"finish"})")[0]), "session_closed");
}

TEST(Protocol, FullSessionEmitsFiftyGeneratedFramesThenDone) {
  const StyleRegistry styles = registry();
  std::atomic<std::uint64_t> ids{7};
  ProtocolHandler h(styles, ids);
  Rng rng(3);
  const auto c = trajectory::random_linear_content(rng, trajectory::WorkspaceConfig{}).samples;
  std::vector<json> frames;
  for (const auto& f : h.handle(start_msg("calm", c[0]))) frames.push_back(json::parse(f));
  for (std::size_t i = 1; i < 50; ++i)
    for (const auto& f : h.handle(point_msg(c[i]))) frames.push_back(json::parse(f));
  ASSERT_EQ(frames.size(), 52u);
  EXPECT_EQ(frames.front()["type"], "ack");
  for (std::size_t i = 1; i <= 50; ++i) {
    EXPECT_EQ(frames[i]["type"], "generated");
    EXPECT_EQ(frames[i]["t"], i - 1);
    EXPECT_TRUE(frames[i]["loss"].contains("total"));
  }
  EXPECT_EQ(frames.back()["type"], "done");
  EXPECT_FALSE(h.session_open());
  EXPECT_EQ(error_code(h.handle(point_msg(c[0]))[0]), "session_closed");

  // A fresh start reopens with the next id.
  EXPECT_EQ(json::parse(h.handle(start_msg("calm", c[0]))[0])["session"], 8);
}

TEST(Protocol, StartReplacesAnOpenSession) {
  const StyleRegistry styles = registry();
  std::atomic<std::uint64_t> ids{1};
  ProtocolHandler h(styles, ids);
  h.handle(start_msg("calm", {0, 0, 0}));
  h.handle(point_msg({5, 5, 5}));
  const auto again = h.handle(start_msg("jerky", {9, 9, 9}));
  EXPECT_EQ(json::parse(again[1])["point"], json({9.0, 9.0, 9.0}));
  EXPECT_EQ(json::parse(h.handle(point_msg({10, 10, 10}))[0])["t"], 1);
}

class WsClient {
 public:
  explicit WsClient(std::uint16_t port) : ws_(ioc_) {
    namespace net = boost::asio;
    net::ip::tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
    ws_.text(true);
  }
  void send(const std::string& s) { ws_.write(boost::asio::buffer(s)); }
  json read() {
    boost::beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(boost::beast::buffers_to_string(buf.data()));
  }
  void close() { ws_.close(boost::beast::websocket::close_code::normal); }

 private:
  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

TEST(Server, WebSocketRoundTripMatchesTheHandler) {
  const StyleRegistry styles = registry();
  Server server(styles, "127.0.0.1", 0);
  ASSERT_NE(server.port(), 0);
  std::thread runner([&] { server.run(); });

  Rng rng(4);
  const auto c = trajectory::random_linear_content(rng, trajectory::WorkspaceConfig{}).samples;
  std::atomic<std::uint64_t> ids{1};
  ProtocolHandler local(styles, ids);
  std::vector<std::string> expected = local.handle(start_msg("jerky", c[0]));
  for (std::size_t i = 1; i < 50; ++i)
    for (auto& f : local.handle(point_msg(c[i]))) expected.push_back(std::move(f));

  {
    WsClient client(server.port());
    client.send(start_msg("jerky", c[0]));
    std::vector<json> got{client.read(), client.read()};
    for (std::size_t i = 1; i < 50; ++i) {
      client.send(point_msg(c[i]));
      got.push_back(client.read());
    }
    got.push_back(client.read());
    ASSERT_EQ(got.size(), expected.size());
    EXPECT_EQ(got[0]["type"], "ack");
    for (std::size_t i = 1; i < got.size(); ++i) EXPECT_EQ(got[i], json::parse(expected[i])) << i;

    // Two connections hold independent sessions.
    WsClient other(server.port());
    other.send(point_msg(c[1]));
    EXPECT_EQ(other.read()["code"], "no_session");
    client.send(point_msg(c[1]));
    EXPECT_EQ(client.read()["code"], "session_closed");
    other.close();
    client.close();
  }
  server.stop();
  runner.join();
}

TEST(Commands, GenDataIsSeededAndParsesBack) {
  TempDir a("gen_a"), b("gen_b");
  trajectory::WorkspaceConfig ws;
  EXPECT_THROW(gen_data(0, 1, a.path, ws), ValueError);
  const auto files = gen_data(6, 42, a.path, ws);
  ASSERT_EQ(files.size(), 6u);
  EXPECT_EQ(files[0].filename(), "trajectory_00000.csv");
  const auto again = gen_data(6, 42, b.path, ws);
  for (std::size_t i = 0; i < files.size(); ++i) {
    EXPECT_EQ(slurp(files[i]), slurp(again[i]));
    const auto t = trajectory::read_csv(files[i]);
    EXPECT_EQ(t.sample_rate, trajectory::kCanonicalRate);
    for (const auto& p : t.samples) EXPECT_TRUE(ws.contains(p));
  }
  EXPECT_GE(load_segments(a.path).size(), 6u);
}

Config tiny_config() {
  Config cfg;
  cfg.autoencoder.channels = 4;
  cfg.ae_train.epochs = 3;
  cfg.ae_train.batch = 4;
  cfg.net.conv_channels = {4, 4, 4};
  cfg.net.dense = {8, 8, 6, 5};
  cfg.train.episodes = 4;
  cfg.train.horizon = 5;
  cfg.train.batch = 4;
  cfg.train.critic_lr = 1e-3;
  cfg.train.actor_lr = 1e-4;
  return cfg;
}

TEST(Commands, TrainingWritesLogsAndCheckpoints) {
  TempDir dir("train");
  const Config cfg = tiny_config();
  EXPECT_THROW(train_ae(cfg, dir.path, dir.path / "ae.ckpt"), ValueError);
  gen_data(8, 5, dir.path / "data", cfg.workspace);

  const auto losses = train_ae(cfg, dir.path / "data", dir.path / "ae.ckpt", dir.path / "ae_loss.csv");
  EXPECT_EQ(losses.size(), 3u);
  std::ifstream log(dir.path / "ae_loss.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(log, line);
  EXPECT_EQ(line, "epoch,loss");
  while (std::getline(log, line)) ++rows;
  EXPECT_EQ(rows, 3u);

  const fs::path style = dir.path / "data" / "trajectory_00000.csv";
  EXPECT_THROW(train_policy(cfg, style, dir.path / "missing.ckpt", dir.path / "p.policy", ""), Error);
  const auto rewards = train_policy(cfg, style, dir.path / "ae.ckpt", dir.path / "styles" / "a.policy", "",
                                    dir.path / "rewards.csv");
  EXPECT_EQ(rewards.size(), 4u);
  const auto ck = td3::load_checkpoint(dir.path / "styles" / "a.policy");
  EXPECT_EQ(ck.style_id, "trajectory_00000");

  // Same seed, same bytes.
  train_policy(cfg, style, dir.path / "ae.ckpt", dir.path / "styles" / "b.policy", "other");
  train_policy(cfg, style, dir.path / "ae.ckpt", dir.path / "again.policy", "other");
  EXPECT_EQ(slurp(dir.path / "styles" / "b.policy"), slurp(dir.path / "again.policy"));

  const StyleRegistry styles = load_styles(dir.path / "styles", dir.path / "ae.ckpt");
  EXPECT_EQ(styles.size(), 2u);
  EXPECT_TRUE(styles.count("other"));

  stylize(style, dir.path / "styles" / "a.policy", dir.path / "ae.ckpt", dir.path / "out.csv",
          dir.path / "report.json");
  const auto out = trajectory::read_csv(dir.path / "out.csv");
  const json report = json::parse(slurp(dir.path / "report.json"));
  EXPECT_EQ(report["output_samples"], out.size());
  EXPECT_EQ(report["segments"].size() * 50, out.size());
  EXPECT_EQ(report["steps"].size(), 49 * report["segments"].size());
  EXPECT_THROW(stylize(style, dir.path / "nope.policy", dir.path / "ae.ckpt", dir.path / "x.csv", {}), Error);
}

}  // namespace
}  // namespace trajstyle::service
