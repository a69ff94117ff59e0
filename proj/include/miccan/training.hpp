#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "miccan/cascade.hpp"
#include "miccan/dataset.hpp"
#include "miccan/losses.hpp"
#include "miccan/model_config.hpp"

namespace miccan {

enum class Optimizer { ADAM, SGD };

struct TrainConfig {
  double learning_rate = 1e-4;
  double lr_decay_factor = 0.5;
  std::size_t lr_decay_every_epochs = 15;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 50;
  std::uint64_t seed = 0;  ///< drives the per-epoch shuffle
  Optimizer optimizer = Optimizer::ADAM;
  LossPreset loss_preset = LossPreset::COMBINED;

  /// Step schedule; epochs are numbered from 1.
  double lr_at(std::size_t epoch) const;
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  ///< mean per-sample loss seen during the epoch
  double val_nrmse = 0.0;
  double val_psnr = 0.0;  ///< capped at the report sentinel before averaging
  double val_ssim = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_psnr = 0.0;
  ParameterSet best_params;
  ParameterSet last_params;
  std::filesystem::path best_checkpoint;  ///< empty when nothing was written
  std::filesystem::path last_checkpoint;
};

/// Adam (β = 0.9, 0.999, ε = 1e-8) or plain SGD over a ParameterSet.
class OptimizerState {
 public:
  OptimizerState(Optimizer kind, const ParameterSet& params);
  void step(ParameterSet& params, const GradientSet& grads, double lr);

 private:
  Optimizer kind_;
  std::size_t t_ = 0;
  GradientSet m_, v_;
};

/// Mean loss over one batch and its parameter gradient (also averaged).
double batch_gradient(const CascadeModel& model, const std::vector<const Sample*>& batch, LossPreset preset,
                      const LossConfig& loss_cfg, const FeatureExtractor& ext, GradientSet& grads);

/// Mean validation metrics of a model.
EpochLog validate_model(const CascadeModel& model, const std::vector<Sample>& val);

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains on `train`, selects by validation PSNR. When `out_dir` is non-empty,
/// writes best.micc, last.micc and train_log.jsonl there.
TrainResult train_model(const std::vector<Sample>& train, const std::vector<Sample>& val, const ModelConfig& model_cfg,
                        const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                        const std::filesystem::path& out_dir = {}, const EpochCallback& on_epoch = {});

/// Loads the train and val splits of a manifest and calls train_model.
TrainResult train(const DatasetManifest& manifest, const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const LossConfig& loss_cfg, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch = {});

std::string epoch_log_json(const EpochLog& e);

}  // namespace miccan
