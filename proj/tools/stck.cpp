// Command-line front end: synthetic scene generation, training, tracking,
// evaluation and visualization over MOTChallenge-format CSV files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stck/image_io.hpp"
#include "stck/metrics.hpp"
#include "stck/mot_io.hpp"
#include "stck/nets.hpp"
#include "stck/scenegen.hpp"
#include "stck/tracker.hpp"
#include "stck/trainer.hpp"

namespace fs = std::filesystem;
using namespace stck;

namespace {

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d.ppm", index);
  return buf;
}

std::vector<Frame> load_frames(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".ppm") paths.push_back(entry.path());
  if (paths.empty()) throw std::runtime_error("no .ppm frames in " + dir.string());
  std::sort(paths.begin(), paths.end());
  std::vector<Frame> frames;
  frames.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Tensor img = read_ppm(paths[i].string());
    Frame f;
    f.height = img.dim(1);
    f.width = img.dim(2);
    f.index = static_cast<int>(i) + 1;
    f.pixels = std::move(img);
    validate_frame(f);
    frames.push_back(std::move(f));
  }
  return frames;
}

GroundTruth gt_from_records(const std::vector<MotRecord>& records, int length) {
  GroundTruth gt;
  gt.frames.resize(static_cast<std::size_t>(length));
  for (const MotRecord& r : records) {
    if (r.frame < 1 || r.frame > length)
      throw std::runtime_error("gt frame " + std::to_string(r.frame) + " outside 1.." +
                               std::to_string(length));
    GtBox b;
    b.id = r.id;
    b.left = r.left;
    b.top = r.top;
    b.width = r.width;
    b.height = r.height;
    b.visible = true;
    gt.frames[static_cast<std::size_t>(r.frame) - 1].push_back(b);
  }
  return gt;
}

SequenceData load_sequence(const fs::path& dir) {
  SequenceData seq;
  seq.frames = load_frames(dir);
  const fs::path gt_path = dir / "gt.csv";
  if (!fs::exists(gt_path)) throw std::runtime_error("missing " + gt_path.string());
  seq.gt = gt_from_records(read_mot(gt_path.string()), static_cast<int>(seq.frames.size()));
  return seq;
}

std::vector<SequenceData> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> seq_dirs;
  if (fs::exists(dir / "gt.csv")) {
    seq_dirs.push_back(dir);
  } else {
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_directory() && fs::exists(entry.path() / "gt.csv"))
        seq_dirs.push_back(entry.path());
    std::sort(seq_dirs.begin(), seq_dirs.end());
  }
  if (seq_dirs.empty()) throw std::runtime_error("no sequences under " + dir.string());
  std::vector<SequenceData> data;
  data.reserve(seq_dirs.size());
  for (const fs::path& p : seq_dirs) data.push_back(load_sequence(p));
  return data;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  const SceneConfig cfg = scene_config_from_file(config_path);
  auto [frames, gt] = generate(cfg);
  fs::create_directories(out_dir);
  for (const Frame& f : frames) write_ppm((fs::path(out_dir) / frame_name(f.index)).string(), f.pixels);
  write_mot((fs::path(out_dir) / "gt.csv").string(), to_records(gt));
  std::ofstream((fs::path(out_dir) / "scene.json").string()) << scene_config_to_json(cfg);
  std::cout << "generated " << frames.size() << " frames, "
            << gt.frames.size() << " gt frames -> " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, int epochs, double lr, std::uint64_t seed,
              const std::string& out_path, bool no_motion) {
  const std::vector<SequenceData> data = load_dataset(data_dir);
  SearchTrackNet net(NetConfig{}, seed);
  TrainRunConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.seed = seed;
  cfg.no_motion = no_motion;
  train_on_sequences(net, data, cfg, [](int epoch, double loss) {
    std::cout << "epoch " << epoch << " mean loss " << loss << "\n";
  });
  net.save(out_path);
  std::cout << "saved model -> " << out_path << "\n";
  return 0;
}

int cmd_track(const std::string& model_path, const std::string& data_dir,
              const std::string& out_path, bool no_motion, const std::string& dump_dir) {
  const SearchTrackNet net = SearchTrackNet::load(model_path);
  const std::vector<Frame> frames = load_frames(data_dir);
  TrackerConfig cfg;
  cfg.no_motion = no_motion;
  Tracker tracker(net, cfg);
  if (!dump_dir.empty()) fs::create_directories(dump_dir);

  std::vector<FrameResult> results;
  std::vector<std::pair<std::int64_t, Tensor>> responses;
  for (const Frame& f : frames) {
    results.push_back(tracker.step(f, dump_dir.empty() ? nullptr : &responses));
    if (!dump_dir.empty()) {
      for (const auto& [id, response] : responses) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "frame_%06d_track_%03lld.pgm", f.index,
                      static_cast<long long>(id));
        write_pgm((fs::path(dump_dir) / buf).string(), response);
      }
    }
  }
  write_mot(out_path, to_records(results));
  std::cout << "tracked " << frames.size() << " frames -> " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& gt_path, const std::string& results_path,
             const std::string& report_path) {
  const auto gt = read_mot(gt_path);
  const auto results = read_mot(results_path);
  const MetricReport rep = evaluate(gt, results);
  const std::string json = report_to_json(rep);
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + report_path + " for writing");
    f << json;
  }
  std::cout << json;
  return 0;
}

int cmd_viz(const std::string& data_dir, const std::string& results_path,
            const std::string& out_dir) {
  const std::vector<Frame> frames = load_frames(data_dir);
  const auto records = read_mot(results_path);
  GroundTruth gt;
  const fs::path gt_path = fs::path(data_dir) / "gt.csv";
  const bool have_gt = fs::exists(gt_path);
  if (have_gt) gt = gt_from_records(read_mot(gt_path.string()), static_cast<int>(frames.size()));

  std::vector<std::vector<OutputBox>> boxes_by_frame(frames.size() + 1);
  for (const MotRecord& r : records) {
    if (r.frame < 1 || r.frame > static_cast<int>(frames.size())) continue;
    OutputBox b;
    b.track_id = r.id;
    b.left = r.left;
    b.top = r.top;
    b.width = r.width;
    b.height = r.height;
    b.score = r.conf;
    boxes_by_frame[static_cast<std::size_t>(r.frame)].push_back(b);
  }
  fs::create_directories(out_dir);
  for (const Frame& f : frames) {
    const std::vector<GtBox>* gt_boxes =
        have_gt ? &gt.frames[static_cast<std::size_t>(f.index) - 1] : nullptr;
    const Tensor img =
        overlay_boxes(f.pixels, boxes_by_frame[static_cast<std::size_t>(f.index)], gt_boxes);
    write_ppm((fs::path(out_dir) / frame_name(f.index)).string(), img);
  }
  std::cout << "wrote " << frames.size() << " overlays -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-based multi-object tracker with per-object dynamic searchers"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, model_path, out_path, gt_path, results_path,
      report_path, dump_dir;
  int epochs = 4;
  double lr = 0.05;
  std::uint64_t seed = 1;
  bool no_motion = false;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic sequence");
  gen->add_option("--config", config_path, "scene config JSON")->required();
  gen->add_option("--out", out_dir, "output directory")->required();

  CLI::App* train = app.add_subcommand("train", "train a model on generated sequences");
  train->add_option("--data", data_dir, "sequence directory or directory of sequences")->required();
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--seed", seed, "init/shuffle seed");
  train->add_option("--out", out_path, "output checkpoint (.stck)")->required();
  train->add_flag("--no-motion", no_motion, "zero the motion channels");

  CLI::App* track = app.add_subcommand("track", "run the tracker over a sequence");
  track->add_option("--model", model_path, "checkpoint (.stck)")->required();
  track->add_option("--data", data_dir, "sequence directory")->required();
  track->add_option("--out", out_path, "results CSV")->required();
  track->add_flag("--no-motion", no_motion, "zero the motion channels");
  track->add_option("--dump-responses", dump_dir, "write per-track response maps (PGM)");

  CLI::App* eval = app.add_subcommand("eval", "score results against ground truth");
  eval->add_option("--gt", gt_path, "ground-truth CSV")->required();
  eval->add_option("--results", results_path, "results CSV")->required();
  eval->add_option("--report", report_path, "report JSON path");

  CLI::App* viz = app.add_subcommand("viz", "render id-colored box overlays");
  viz->add_option("--data", data_dir, "sequence directory")->required();
  viz->add_option("--results", results_path, "results CSV")->required();
  viz->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_dir);
    if (train->parsed()) return cmd_train(data_dir, epochs, lr, seed, out_path, no_motion);
    if (track->parsed()) return cmd_track(model_path, data_dir, out_path, no_motion, dump_dir);
    if (eval->parsed()) return cmd_eval(gt_path, results_path, report_path);
    if (viz->parsed()) return cmd_viz(data_dir, results_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
