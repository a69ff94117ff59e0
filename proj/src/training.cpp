#include "miccan/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "miccan/io.hpp"
#include "miccan/metrics.hpp"
#include "miccan/rng.hpp"

namespace miccan {

namespace fs = std::filesystem;

double TrainConfig::lr_at(std::size_t epoch) const {
  const std::size_t steps = epoch == 0 ? 0 : (epoch - 1) / lr_decay_every_epochs;
  return learning_rate * std::pow(lr_decay_factor, static_cast<double>(steps));
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidConfig("learning_rate must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) throw InvalidConfig("lr_decay_factor must lie in (0, 1]");
  if (lr_decay_every_epochs == 0) throw InvalidConfig("lr_decay_every_epochs must be positive");
  if (batch_size == 0) throw InvalidConfig("batch_size must be positive");
  if (max_epochs == 0) throw InvalidConfig("max_epochs must be positive");
}

OptimizerState::OptimizerState(Optimizer kind, const ParameterSet& params) : kind_(kind) {
  if (kind_ == Optimizer::ADAM) {
    m_ = zero_gradients(params);
    v_ = zero_gradients(params);
  }
}

void OptimizerState::step(ParameterSet& params, const GradientSet& grads, double lr) {
  if (grads.size() != params.size()) throw InvalidInput("gradient set does not match parameters");
  if (kind_ == Optimizer::SGD) {
    for (std::size_t a = 0; a < params.size(); ++a) {
      auto& p = params[a].values;
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * grads[a][k];
    }
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t a = 0; a < params.size(); ++a) {
    auto& p = params[a].values;
    auto& m = m_[a];
    auto& v = v_[a];
    const auto& g = grads[a];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
}

double batch_gradient(const CascadeModel& model, const std::vector<const Sample*>& batch, LossPreset preset,
                      const LossConfig& loss_cfg, const FeatureExtractor& ext, GradientSet& grads) {
  grads = zero_gradients(model.parameters());
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const Sample* s : batch) {
    CascadeTape tape;
    const ComplexImage out = model.forward(s->measurement, s->mask, &tape);
    const LossValue lv = training_loss(preset, out, s->truth, loss_cfg, ext);
    if (!std::isfinite(lv.value)) return lv.value;
    total += lv.value;
    model.backward(tape, lv.grad, grads);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grads)
    for (double& v : g) v *= inv;
  return total * inv;
}

EpochLog validate_model(const CascadeModel& model, const std::vector<Sample>& val) {
  EpochLog e;
  if (val.empty()) return e;
  for (const auto& s : val) {
    const MetricReport r = compare_images(model.forward(s.measurement, s.mask), s.truth);
    e.val_nrmse += r.nrmse;
    e.val_psnr += std::min(r.psnr, kPsnrSentinel);
    e.val_ssim += r.ssim;
  }
  const double n = static_cast<double>(val.size());
  e.val_nrmse /= n;
  e.val_psnr /= n;
  e.val_ssim /= n;
  return e;
}

std::string epoch_log_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["lr"] = e.learning_rate;
  j["train_loss"] = e.train_loss;
  j["val_nrmse"] = e.val_nrmse;
  j["val_psnr"] = e.val_psnr;
  j["val_ssim"] = e.val_ssim;
  return j.dump();
}

TrainResult train_model(const std::vector<Sample>& train, const std::vector<Sample>& val, const ModelConfig& model_cfg,
                        const TrainConfig& train_cfg, const LossConfig& loss_cfg, const fs::path& out_dir,
                        const EpochCallback& on_epoch) {
  train_cfg.validate();
  loss_cfg.validate();
  if (train.empty()) throw InvalidInput("training split is empty");
  if (val.empty()) throw InvalidInput("validation split is empty");

  CascadeModel model(model_cfg);
  for (const auto& s : train) model_cfg.check_image_size(s.truth.height(), s.truth.width());
  const auto ext = make_extractor(loss_cfg.extractor_id);
  if (train_cfg.loss_preset == LossPreset::COMBINED && loss_cfg.lambda_p > 0.0)
    ext->check_resolution(train.front().truth.height(), train.front().truth.width());

  OptimizerState opt(train_cfg.optimizer, model.parameters());
  TrainResult result;
  result.best_val_psnr = -std::numeric_limits<double>::infinity();

  std::ofstream log;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    log.open(out_dir / "train_log.jsonl", std::ios::trunc);
    if (!log) throw FormatError("cannot write training log in '" + out_dir.string() + "'");
  }

  std::vector<std::size_t> order(train.size());
  GradientSet grads;
  for (std::size_t epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(train_cfg.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    const double lr = train_cfg.lr_at(epoch);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size, ++batch_index) {
      std::vector<const Sample*> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + train_cfg.batch_size); ++k)
        batch.push_back(&train[order[k]]);
      const double loss = batch_gradient(model, batch, train_cfg.loss_preset, loss_cfg, *ext, grads);
      if (!std::isfinite(loss))
        throw NumericalFailure("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index) + ": " + std::to_string(loss));
      loss_sum += loss * static_cast<double>(batch.size());
      opt.step(model.parameters(), grads, lr);
    }

    EpochLog e = validate_model(model, val);
    e.epoch = epoch;
    e.learning_rate = lr;
    e.train_loss = loss_sum / static_cast<double>(train.size());
    result.log.push_back(e);
    if (log) log << epoch_log_json(e) << '\n' << std::flush;
    if (on_epoch) on_epoch(e);

    if (e.val_psnr > result.best_val_psnr) {
      result.best_val_psnr = e.val_psnr;
      result.best_epoch = epoch;
      result.best_params = model.parameters();
      if (!out_dir.empty()) {
        result.best_checkpoint = out_dir / "best.micc";
        io::write_checkpoint(result.best_checkpoint, {model_cfg, model.parameters()});
      }
    }
  }
  result.last_params = model.parameters();
  if (!out_dir.empty()) {
    result.last_checkpoint = out_dir / "last.micc";
    io::write_checkpoint(result.last_checkpoint, {model_cfg, model.parameters()});
  }
  return result;
}

TrainResult train(const DatasetManifest& manifest, const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const LossConfig& loss_cfg, const fs::path& out_dir, const EpochCallback& on_epoch) {
  return train_model(load_split(manifest, Split::TRAIN), load_split(manifest, Split::VAL), model_cfg, train_cfg,
                     loss_cfg, out_dir, on_epoch);
}

}  // namespace miccan
