#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "miccan/config.hpp"
#include "miccan/evaluation.hpp"
#include "miccan/io.hpp"
#include "miccan/phantom.hpp"
#include "miccan/training.hpp"
#include "support.hpp"

using namespace miccan;
using namespace testing;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("miccan_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

ModelConfig tiny_model() {
  ModelConfig cfg;
  cfg.n_blocks_N = 1;
  cfg.encoder_depth = 1;
  cfg.base_channels = 4;
  cfg.reduction_ratio_r = 2;
  cfg.init_seed = 3;
  return cfg;
}

TrainConfig tiny_train() {
  TrainConfig t;
  t.max_epochs = 3;
  t.batch_size = 2;
  t.learning_rate = 1e-3;
  t.loss_preset = LossPreset::L2;
  return t;
}

}  // namespace

TEST_CASE("phantom generator") {
  Rng rng(1);
  for (int t = 0; t < 5; ++t) {
    const ComplexImage x = random_ellipse_phantom(32, rng);
    double mx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      CHECK(x.real()[k] >= 0.0);
      CHECK(x.real()[k] <= 1.0);
      CHECK(x.imag()[k] == 0.0);
      mx = std::max(mx, x.real()[k]);
    }
    CHECK(mx == 1.0);
  }
  const ComplexImage s = shepp_logan_phantom(64);
  CHECK(s.real()[0] == 0.0);
  CHECK(s.at(32, 32).real() > 0.0);
}

TEST_CASE("dataset generation") {
  CHECK(split_counts(10).train == 7);
  CHECK(split_counts(10).val == 1);
  CHECK(split_counts(10).test == 2);
  CHECK(split_counts(64).train == 44);
  CHECK(split_counts(64).val == 6);
  CHECK(split_counts(64).test == 14);

  const fs::path a = fresh_dir("ds_a"), b = fresh_dir("ds_b");
  MaskSpec spec;
  spec.rate = 0.375;
  const DatasetManifest m = generate_phantom_dataset(10, 32, 5, a, spec);
  generate_phantom_dataset(10, 32, 5, b, spec);
  CHECK(m.entries_in(Split::TRAIN).size() == 7);
  CHECK(m.entries_in(Split::VAL).size() == 1);
  CHECK(m.entries_in(Split::TEST).size() == 2);
  CHECK_NOTHROW(m.validate());
  for (const auto& e : m.entries)
    for (const auto& rel : {e.image, e.mask, e.kspace}) CHECK(slurp(a / rel) == slurp(b / rel));
  CHECK(slurp(a / "manifest.json").size() > 0);

  const DatasetManifest back = load_manifest(a);
  CHECK(back.entries.size() == 10);
  CHECK(back.seed == 5);
  for (const Sample& s : load_split(back, Split::TRAIN)) {
    CHECK(s.measurement == simulate_acquisition(s.truth, s.mask));
    CHECK(s.mask.rows_sampled().size() == 12);
  }
  const auto test = load_split(back, Split::TEST);
  CHECK(!(test[0].mask == test[1].mask));

  DatasetManifest dup = m;
  dup.entries[8].image = dup.entries[0].image;
  CHECK_THROWS_AS(dup.validate(), InvalidInput);
  CHECK_THROWS_AS(generate_phantom_dataset(10, 48, 5, fresh_dir("ds_c"), spec), InvalidInput);
  std::ofstream(a / "manifest.json") << "{ not json";
  CHECK_THROWS_AS(load_manifest(a), FormatError);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("ingestion") {
  const fs::path in = fresh_dir("ingest_in"), out = fresh_dir("ingest_out");
  MaskSpec spec;
  spec.rate = 0.5;
  spec.center_lines = 4;
  CHECK_THROWS_WITH_AS(ingest_dataset(in, spec, 1, out), doctest::Contains("empty manifest"), IngestionError);
  CHECK_THROWS_AS(ingest_dataset(in / "nope", spec, 1, out), IngestionError);

  Rng rng(2);
  std::vector<ComplexImage> originals;
  for (int i = 0; i < 3; ++i) {
    originals.push_back(random_image(rng, 16, 16, 3.0));
    io::write_array(in / ("scan" + std::to_string(i) + ".micv"), io::to_container(originals.back()));
  }
  const DatasetManifest m = ingest_dataset(in, spec, 1, out);
  CHECK(m.source == DataSource::USER);
  std::vector<Sample> all;
  for (Split s : {Split::TRAIN, Split::VAL, Split::TEST})
    for (Sample& x : load_split(m, s)) all.push_back(std::move(x));
  REQUIRE(all.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    double peak = 0.0;
    for (std::size_t k = 0; k < originals[i].size(); ++k)
      peak = std::max(peak, std::abs(originals[i].at(k / 16, k % 16)));
    CHECK(max_abs_diff(all[i].truth, (1.0 / peak) * originals[i]) < 1e-12);
    MaskSpec s = spec;
    s.seed = mask_seed(1, i);
    CHECK(all[i].mask == generate_mask(s, 16, 16));
    CHECK(max_abs_diff(all[i].measurement, simulate_acquisition(all[i].truth, all[i].mask)) < 1e-12);
  }

  std::ofstream(in / "zz_bad.micv") << "garbage";
  CHECK_THROWS_WITH_AS(ingest_dataset(in, spec, 1, fresh_dir("ingest_out2")), doctest::Contains("zz_bad.micv"),
                       IngestionError);
  fs::remove_all(in);
  fs::remove_all(out);
}

TEST_CASE("configuration files") {
  RunConfig cfg = preset("miccan-c");
  cfg.model.n_blocks_N = 3;
  cfg.model.dc = DCConfig::with_noise(0.7);
  cfg.train.learning_rate = 3.25e-4;
  cfg.train.optimizer = Optimizer::SGD;
  cfg.mask.rate = 0.33;
  cfg.tv.reg_weight = 0.125;
  const std::string text = to_config_text(cfg);
  CHECK(apply_config({}, parse_key_values(text)) == cfg);
  CHECK(config_fingerprint(cfg) == config_fingerprint(apply_config({}, parse_key_values(text))));
  RunConfig other = cfg;
  other.train.seed = 1;
  CHECK(config_fingerprint(other) != config_fingerprint(cfg));

  CHECK(!preset("mrn5").model.use_attention);
  CHECK(!preset("mrn5").model.use_long_skip);
  CHECK(preset("miccan-a").model.use_attention);
  CHECK(preset("miccan-a").train.loss_preset == LossPreset::L2);
  CHECK(preset("miccan-b").train.loss_preset == LossPreset::COMBINED);
  CHECK(!preset("miccan-b").model.use_long_skip);
  CHECK(preset("miccan-c").model.use_long_skip);
  CHECK_THROWS_AS(preset("dc-cnn"), InvalidConfig);

  const RunConfig p = apply_config({}, parse_key_values("# comment\npreset = miccan-a\nn_blocks_N = 2\n"));
  CHECK(p.model.n_blocks_N == 2);
  CHECK(!p.model.use_long_skip);
  CHECK(apply_config({}, parse_key_values("noise_level_v = inf")).model.dc == DCConfig::noiseless());
  CHECK_THROWS_AS(apply_config({}, parse_key_values("learning_rte = 1")), InvalidConfig);
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2"), InvalidConfig);
  CHECK_THROWS_AS(parse_key_values("just words"), InvalidConfig);
  CHECK_THROWS_AS(apply_config({}, parse_key_values("batch_size = many")), InvalidConfig);
}

TEST_CASE("learning-rate schedule and optimizer") {
  TrainConfig t;
  CHECK(t.lr_at(1) == 1e-4);
  CHECK(t.lr_at(15) == 1e-4);
  CHECK(t.lr_at(16) == doctest::Approx(5e-5).epsilon(1e-15));
  CHECK(t.lr_at(31) == doctest::Approx(2.5e-5).epsilon(1e-15));
  t.batch_size = 0;
  CHECK_THROWS_AS(t.validate(), InvalidConfig);

  ParameterSet p;
  p.add("w", {3});
  p[0].values = {1.0, -2.0, 0.5};
  const GradientSet g = {{0.5, -4.0, 0.0}};
  ParameterSet sgd = p;
  OptimizerState(Optimizer::SGD, sgd).step(sgd, g, 0.1);
  CHECK(sgd[0].values == std::vector<double>{0.95, -1.6, 0.5});
  // First Adam step moves each coordinate by lr·sign(g) (up to epsilon).
  ParameterSet adam = p;
  OptimizerState(Optimizer::ADAM, adam).step(adam, g, 0.01);
  CHECK(adam[0].values[0] == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(adam[0].values[1] == doctest::Approx(-1.99).epsilon(1e-9));
  CHECK(adam[0].values[2] == 0.5);
}

TEST_CASE("training, checkpoints and evaluation") {
  const fs::path data = fresh_dir("train_data");
  MaskSpec spec;
  spec.rate = 0.375;
  const DatasetManifest m = generate_phantom_dataset(10, 32, 7, data, spec);
  const auto train_set = load_split(m, Split::TRAIN);
  const auto val_set = load_split(m, Split::VAL);
  const auto test_set = load_split(m, Split::TEST);

  const fs::path out1 = fresh_dir("train_out1"), out2 = fresh_dir("train_out2");
  const TrainResult r1 = train_model(train_set, val_set, tiny_model(), tiny_train(), {}, out1);
  const TrainResult r2 = train_model(train_set, val_set, tiny_model(), tiny_train(), {}, out2);
  REQUIRE(r1.log.size() == 3);
  CHECK(slurp(out1 / "best.micc") == slurp(out2 / "best.micc"));
  CHECK(slurp(out1 / "last.micc") == slurp(out2 / "last.micc"));
  CHECK(slurp(out1 / "train_log.jsonl") == slurp(out2 / "train_log.jsonl"));
  for (const EpochLog& e : r1.log) CHECK(std::isfinite(e.train_loss));

  const io::Checkpoint best = io::read_checkpoint(r1.best_checkpoint);
  CHECK(best.config == tiny_model());
  CHECK(best.params == r1.best_params);
  const CascadeModel restored(best.config, best.params);
  const EpochLog again = validate_model(restored, val_set);
  CHECK(again.val_psnr == doctest::Approx(r1.best_val_psnr).epsilon(1e-9));
  CHECK(again.val_ssim == doctest::Approx(r1.log[r1.best_epoch - 1].val_ssim).epsilon(1e-9));
  for (const EpochLog& e : r1.log) CHECK(e.val_psnr <= r1.best_val_psnr);

  const ReconstructionReport a = evaluate(test_set, network_reconstructor(restored), "net", "abc");
  const ReconstructionReport b = evaluate(test_set, network_reconstructor(restored), "net", "abc");
  CHECK(to_jsonl(a) == to_jsonl(b));
  double sum = 0.0;
  for (const auto& im : a.images) sum += im.metrics.ssim;
  CHECK(a.ssim.mean == doctest::Approx(sum / double(a.images.size())).epsilon(1e-12));

  const ReconstructionReport id = evaluate(test_set, identity_reconstructor(), "identity", "abc");
  CHECK(id.nrmse.mean == 0.0);
  CHECK(id.ssim.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.psnr.mean == kPsnrSentinel);
  CHECK(to_jsonl(id).find("inf") == std::string::npos);

  const ReconstructionReport zf = evaluate(test_set, zero_fill_reconstructor(), "zero-fill", "abc");
  CHECK(zf.psnr.mean < id.psnr.mean);

  export_figure(out1, "fig", zero_fill(test_set[0].measurement), test_set[0].truth, 4.0);
  const std::string pgm = slurp(out1 / "fig_recon.pgm");
  CHECK(pgm.rfind("P5\n32 32\n255\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n32 32\n255\n").size() + 32 * 32);
  CHECK(fs::exists(out1 / "fig_error.pgm"));

  fs::remove_all(data);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("mean and population std") {
  const MetricStats s = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("non-finite training loss is reported") {
  const fs::path data = fresh_dir("nan_data");
  MaskSpec spec;
  spec.rate = 0.375;
  const DatasetManifest m = generate_phantom_dataset(10, 32, 8, data, spec);
  auto train_set = load_split(m, Split::TRAIN);
  const auto val_set = load_split(m, Split::VAL);
  train_set[0].truth.real()[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(train_model(train_set, val_set, tiny_model(), tiny_train(), {}),
                       doctest::Contains("non-finite training loss"), NumericalFailure);
  fs::remove_all(data);
}
