#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "miccan/cascade.hpp"
#include "miccan/dataset.hpp"
#include "miccan/metrics.hpp"
#include "miccan/solvers.hpp"

namespace miccan {

using Reconstructor = std::function<ComplexImage(const Sample&)>;

Reconstructor network_reconstructor(const CascadeModel& model);
Reconstructor zero_fill_reconstructor();
Reconstructor solver_reconstructor(const SolverConfig& cfg);
/// Returns the ground truth itself (sanity baseline).
Reconstructor identity_reconstructor();

struct ImageResult {
  std::string name;
  MetricReport metrics;
};

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

struct ReconstructionReport {
  std::string method;
  std::string fingerprint;
  std::vector<ImageResult> images;
  MetricStats nrmse, psnr, ssim;  ///< psnr stats use the capped per-image values
  double wall_seconds = 0.0;  ///< not part of the JSON-lines output
};

MetricStats mean_std(const std::vector<double>& values);

/// Reconstructs every sample in order and scores it against its ground truth.
ReconstructionReport evaluate(const std::vector<Sample>& samples, const Reconstructor& recon, std::string method,
                              std::string fingerprint);

/// One JSON object per image, then one aggregate object; PSNR capped at the sentinel.
std::string to_jsonl(const ReconstructionReport& r);
void write_report(const std::filesystem::path& path, const ReconstructionReport& r);

/// Writes an 8-bit binary PGM; values are multiplied by `scale` and clamped to [0, 1].
void write_pgm(const std::filesystem::path& path, const RealImage& image, double scale = 1.0);

/// <stem>_recon.pgm and <stem>_error.pgm, both normalised by the reference
/// maximum; the error map is additionally multiplied by `error_gain`.
void export_figure(const std::filesystem::path& dir, const std::string& stem, const ComplexImage& reconstruction,
                   const ComplexImage& reference, double error_gain = 1.0);

}  // namespace miccan
