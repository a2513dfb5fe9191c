#include "trajstyle/service/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include "json.hpp"
#include <ostream>

#include "trajstyle/engine/engine.hpp"
#include "trajstyle/td3/train.hpp"
#include "trajstyle/trajectory/csv.hpp"
#include "trajstyle/trajectory/generate.hpp"

namespace trajstyle::service {

using trajectory::Trajectory;

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

Trajectory at_canonical_rate(const Trajectory& t) {
  return t.sample_rate == trajectory::kCanonicalRate ? t : trajectory::resample(t, trajectory::kCanonicalRate);
}

void make_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_out(const fs::path& path) {
  make_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_series(const fs::path& path, const char* header, const std::vector<double>& values) {
  if (path.empty()) return;
  std::ofstream out = open_out(path);
  out << header << "\n";
  char line[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", i + 1, values[i]);
    out << line;
  }
  if (!out) throw Error("failed writing " + path.string());
}

nlohmann::json loss_json(const styleloss::LossBreakdown& l) {
  return {{"content", l.content},   {"style", l.style},       {"position", l.position},
          {"end_position", l.end_position}, {"velocity", l.velocity}, {"total", l.total}};
}

}  // namespace

std::vector<fs::path> gen_data(std::size_t count, std::uint64_t seed, const fs::path& out_dir,
                               const trajectory::WorkspaceConfig& ws) {
  if (count == 0) throw ValueError("gen-data: count must be positive");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error("gen-data: cannot create " + out_dir.string());
  numkit::Rng rng(seed);
  std::vector<fs::path> written;
  const auto dataset = trajectory::synthetic_dataset(rng, count, ws);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trajectory_%05zu.csv", i);
    const fs::path path = out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("gen-data: cannot write " + path.string());
    trajectory::write_csv(dataset[i], out);
    written.push_back(path);
  }
  return written;
}

std::vector<Trajectory> load_segments(const fs::path& dir) {
  std::vector<Trajectory> out;
  for (const fs::path& file : files_with_extension(dir, ".csv"))
    for (Trajectory& seg : trajectory::pad_or_split(at_canonical_rate(trajectory::read_csv(file))))
      out.push_back(std::move(seg));
  return out;
}

std::vector<double> train_ae(const Config& cfg, const fs::path& data_dir, const fs::path& out_ckpt,
                             const fs::path& loss_log, std::ostream* progress) {
  const auto segments = load_segments(data_dir);
  if (segments.empty()) throw ValueError("train-ae: no trajectories in " + data_dir.string());
  const numkit::Tensor dataset = trajectory::normalized_batch(segments, cfg.workspace);
  if (progress) *progress << "training autoencoder on " << segments.size() << " segments\n";
  const auto result = lossnet::train_autoencoder(dataset, cfg.ae_train, cfg.autoencoder);
  make_parent(out_ckpt);
  result.model.save(out_ckpt);
  write_series(loss_log, "epoch,loss", result.loss_history);
  if (progress && !result.loss_history.empty())
    *progress << "final epoch loss " << result.loss_history.back() << "\n";
  return result.loss_history;
}

numkit::Tensor load_style_exemplar(const fs::path& csv) {
  const Trajectory t = at_canonical_rate(trajectory::read_csv(csv));
  auto samples = trajectory::pad_last(t.samples, trajectory::kSegmentLength);
  samples.resize(trajectory::kSegmentLength);
  return trajectory::to_tensor(samples);
}

std::vector<double> train_policy(const Config& cfg, const fs::path& style_csv, const fs::path& ae_ckpt,
                                 const fs::path& out_ckpt, const std::string& style_id, const fs::path& reward_log,
                                 std::ostream* progress) {
  const numkit::Tensor style = load_style_exemplar(style_csv);
  const lossnet::Autoencoder ae = lossnet::Autoencoder::load(ae_ckpt);
  const std::string id = style_id.empty() ? style_csv.stem().string() : style_id;
  const std::size_t every = std::max<std::size_t>(1, cfg.train.episodes / 20);
  const auto result = td3::train_policy(
      id, style, ae, cfg.weights, cfg.train, cfg.net, cfg.workspace, {},
      [&](std::size_t episode, double reward, const td3::Td3Nets&) {
        if (progress && (episode + 1) % every == 0)
          *progress << "episode " << episode + 1 << "/" << cfg.train.episodes << " reward " << reward << "\n";
      });
  make_parent(out_ckpt);
  td3::save_checkpoint(result.checkpoint, out_ckpt);
  write_series(reward_log, "episode,reward", result.episode_rewards);
  return result.episode_rewards;
}

void stylize(const fs::path& content_csv, const fs::path& policy_ckpt, const fs::path& ae_ckpt,
             const fs::path& out_csv, const fs::path& report_json) {
  const auto policy = engine::StylePolicy::load(policy_ckpt, ae_ckpt);
  const Trajectory content = at_canonical_rate(trajectory::read_csv(content_csv));
  const engine::OfflineResult result = engine::stylize_offline(content, policy->style_id(), policy);
  {
    std::ofstream out = open_out(out_csv);
    trajectory::write_csv(result.generated, out);
  }
  if (report_json.empty()) return;

  const auto segments = trajectory::pad_or_split(content);
  const auto& ck = policy->checkpoint();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const std::vector<trajectory::Vec3> gen(result.generated.samples.begin() + 50 * k,
                                            result.generated.samples.begin() + 50 * (k + 1));
    const auto report = engine::evaluate(trajectory::to_tensor(gen), trajectory::to_tensor(segments[k]),
                                         policy->exemplar(), policy->autoencoder(), ck.weights, ck.workspace.rt);
    rows.push_back({{"segment", k}, {"generated", loss_json(report.generated)}, {"content", loss_json(report.content)}});
  }
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < result.steps.size(); ++i)
    steps.push_back({{"segment", i / 49}, {"t", i % 49 + 1}, {"loss", loss_json(result.steps[i])}});
  const nlohmann::json report{{"style", policy->style_id()},
                              {"input_samples", content.size()},
                              {"output_samples", result.generated.size()},
                              {"segments", rows},
                              {"steps", steps}};
  std::ofstream out = open_out(report_json);
  out << report.dump(2) << "\n";
}

StyleRegistry load_styles(const fs::path& dir, const fs::path& ae_ckpt) {
  StyleRegistry styles;
  for (const fs::path& file : files_with_extension(dir, ".policy")) {
    auto policy = engine::StylePolicy::load(file, ae_ckpt);
    const std::string id = policy->style_id();
    if (!styles.emplace(id, std::move(policy)).second) throw ValueError("duplicate style '" + id + "' in " + dir.string());
  }
  if (styles.empty()) throw ValueError("no .policy checkpoints in " + dir.string());
  return styles;
}

}  // namespace trajstyle::service
