#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "miccan/config.hpp"
#include "miccan/dataset.hpp"
#include "miccan/evaluation.hpp"
#include "miccan/io.hpp"
#include "miccan/training.hpp"

namespace fs = std::filesystem;
using namespace miccan;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = "out";
  std::string preset;
};

RunConfig resolve(const Globals& g) {
  RunConfig cfg = g.preset.empty() ? RunConfig{} : preset(g.preset);
  if (!g.config.empty()) cfg = load_config_file(g.config, cfg);
  if (g.seed) {
    cfg.train.seed = *g.seed;
    cfg.model.init_seed = *g.seed;
    cfg.mask.seed = *g.seed;
  }
  return cfg;
}

void write_meta(const fs::path& path, const ReconstructionReport& r, const std::string& extra_key,
                const std::string& extra) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["fingerprint"] = r.fingerprint;
  j["wall_seconds"] = r.wall_seconds;
  if (!extra_key.empty()) j[extra_key] = extra;
  std::ofstream(path) << j.dump(2) << '\n';
}

Reconstructor pick(const std::string& method, const RunConfig& cfg, const std::optional<CascadeModel>& model) {
  if (model) return network_reconstructor(*model);
  if (method == "zero-fill") return zero_fill_reconstructor();
  if (method == "identity") return identity_reconstructor();
  if (method == "wavelet") return solver_reconstructor(cfg.wavelet);
  if (method == "tv") return solver_reconstructor(cfg.tv);
  throw InvalidConfig("unknown method '" + method + "' (expected zero-fill, identity, wavelet or tv)");
}

std::optional<CascadeModel> load_model(const std::string& checkpoint) {
  if (checkpoint.empty()) return std::nullopt;
  io::Checkpoint ck = io::read_checkpoint(checkpoint);
  return CascadeModel(ck.config, std::move(ck.params));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Undersampled MRI reconstruction: cascaded attention networks and classical CS solvers"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for data generation, masks, initialisation and shuffling");
  app.add_option("--config", g.config, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--preset", g.preset, "mrn5, miccan-a, miccan-b or miccan-c (applied before --config)");

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic phantom dataset");
  std::size_t count = 64, size = 64;
  phantom->add_option("--count", count, "Number of images")->capture_default_str();
  phantom->add_option("--size", size, "Side length (power of two, >= 32)")->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Simulate acquisitions for a directory of .micv images");
  std::string input_dir;
  ingest->add_option("input", input_dir, "Directory of array-container images")->required();

  // mask
  auto* mask = app.add_subcommand("mask", "Write a single sampling mask");
  std::size_t mh = 64, mw = 64;
  mask->add_option("--height", mh)->capture_default_str();
  mask->add_option("--width", mw)->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a cascade on a dataset");
  std::string data_dir;
  train_cmd->add_option("--data", data_dir, "Dataset directory (contains manifest.json)")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or a simple method on a split");
  std::string checkpoint, method = "zero-fill", split = "test";
  bool figures = false;
  eval->add_option("--data", data_dir)->required();
  eval->add_option("--checkpoint", checkpoint, "Network checkpoint (.micc)");
  eval->add_option("--method", method, "zero-fill or identity, used without --checkpoint")->capture_default_str();
  eval->add_option("--split", split)->capture_default_str();
  eval->add_flag("--figures", figures, "Also export reconstruction and error images");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run a classical CS solver on a split");
  std::string solver = "tv";
  baseline->add_option("--data", data_dir)->required();
  baseline->add_option("--solver", solver, "wavelet or tv")->capture_default_str();
  baseline->add_option("--split", split)->capture_default_str();

  // export-figure
  auto* figure = app.add_subcommand("export-figure", "Export reconstruction and error images for one sample");
  std::size_t index = 0;
  double gain = 1.0;
  figure->add_option("--data", data_dir)->required();
  figure->add_option("--checkpoint", checkpoint);
  figure->add_option("--method", method)->capture_default_str();
  figure->add_option("--split", split)->capture_default_str();
  figure->add_option("--index", index, "Position within the split")->capture_default_str();
  figure->add_option("--error-gain", gain)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    const RunConfig cfg = resolve(g);
    const fs::path out = g.out;

    if (phantom->parsed()) {
      const auto m = generate_phantom_dataset(count, size, g.seed.value_or(0), out, cfg.mask);
      const auto c = split_counts(m.entries.size());
      std::printf("wrote %zu phantoms to %s (%zu train / %zu val / %zu test)\n", m.entries.size(),
                  out.string().c_str(), c.train, c.val, c.test);
    } else if (ingest->parsed()) {
      const auto m = ingest_dataset(input_dir, cfg.mask, g.seed.value_or(0), out);
      std::printf("ingested %zu images into %s\n", m.entries.size(), out.string().c_str());
    } else if (mask->parsed()) {
      const SamplingMask m = generate_mask(cfg.mask, mh, mw);
      io::write_mask(out / "mask.micm", m);
      std::printf("wrote %s (%zu rows sampled)\n", (out / "mask.micm").string().c_str(), m.rows_sampled().size());
    } else if (train_cmd->parsed()) {
      const auto manifest = load_manifest(data_dir);
      fs::create_directories(out);
      std::ofstream(out / "config.txt") << to_config_text(cfg);
      const auto result = train(manifest, cfg.model, cfg.train, cfg.loss, out, [](const EpochLog& e) {
        std::printf("epoch %3zu  lr %.3g  loss %.6g  val psnr %.4f  ssim %.4f\n", e.epoch, e.learning_rate,
                    e.train_loss, e.val_psnr, e.val_ssim);
        std::fflush(stdout);
      });
      std::printf("best epoch %zu (val psnr %.4f), checkpoint %s\n", result.best_epoch, result.best_val_psnr,
                  result.best_checkpoint.string().c_str());
    } else if (eval->parsed() || baseline->parsed()) {
      const auto manifest = load_manifest(data_dir);
      const auto samples = load_split(manifest, parse_split(split));
      const auto model = eval->parsed() ? load_model(checkpoint) : std::nullopt;
      const std::string name = model ? "network" : (baseline->parsed() ? solver : method);
      RunConfig used = cfg;
      if (model) used.model = model->config();
      const auto report = evaluate(samples, pick(name, used, model), name, config_fingerprint(used));
      fs::create_directories(out);
      const fs::path path = out / (name + "_report.jsonl");
      write_report(path, report);
      write_meta(out / (name + "_meta.json"), report, model ? "checkpoint" : "", checkpoint);
      if (figures) {
        const auto recon = pick(name, used, model);
        for (const auto& s : samples) export_figure(out / "figures", s.name, recon(s), s.truth);
      }
      std::printf("%s on %zu images: nrmse %.4f±%.4f  psnr %.4f±%.4f  ssim %.4f±%.4f -> %s\n", name.c_str(),
                  report.images.size(), report.nrmse.mean, report.nrmse.std, report.psnr.mean, report.psnr.std,
                  report.ssim.mean, report.ssim.std, path.string().c_str());
    } else if (figure->parsed()) {
      const auto manifest = load_manifest(data_dir);
      const auto samples = load_split(manifest, parse_split(split));
      if (index >= samples.size()) throw InvalidInput("--index is past the end of the split");
      const auto model = load_model(checkpoint);
      const std::string name = model ? "network" : method;
      const auto& s = samples[index];
      export_figure(out, s.name + "_" + name, pick(name, cfg, model)(s), s.truth, gain);
      std::printf("wrote %s_%s_{recon,error}.pgm to %s\n", s.name.c_str(), name.c_str(), out.string().c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
