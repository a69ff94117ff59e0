#include "miccan/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "miccan/io.hpp"
#include "miccan/sampling.hpp"

namespace miccan {

Reconstructor network_reconstructor(const CascadeModel& model) {
  return [&model](const Sample& s) {
    model.config().check_image_size(s.measurement.height(), s.measurement.width());
    return model.forward(s.measurement, s.mask);
  };
}

Reconstructor zero_fill_reconstructor() {
  return [](const Sample& s) { return zero_fill(s.measurement); };
}

Reconstructor solver_reconstructor(const SolverConfig& cfg) {
  return [cfg](const Sample& s) { return solve_classical(s.measurement, s.mask, cfg); };
}

Reconstructor identity_reconstructor() {
  return [](const Sample& s) { return s.truth; };
}

MetricStats mean_std(const std::vector<double>& values) {
  MetricStats st;
  if (values.empty()) return st;
  const double n = static_cast<double>(values.size());
  for (double v : values) st.mean += v;
  st.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.std = std::sqrt(ss / n);
  return st;
}

ReconstructionReport evaluate(const std::vector<Sample>& samples, const Reconstructor& recon, std::string method,
                              std::string fingerprint) {
  if (samples.empty()) throw InvalidInput("evaluation split is empty");
  const auto t0 = std::chrono::steady_clock::now();
  ReconstructionReport r;
  r.method = std::move(method);
  r.fingerprint = std::move(fingerprint);
  std::vector<double> nr, ps, ss;
  for (const auto& s : samples) {
    const ComplexImage x = recon(s);
    if (!x.same_shape(s.truth)) throw InvalidInput("reconstruction of '" + s.name + "' has the wrong shape");
    const MetricReport m = compare_images(x, s.truth);
    r.images.push_back({s.name, m});
    nr.push_back(m.nrmse);
    ps.push_back(std::min(m.psnr, kPsnrSentinel));
    ss.push_back(m.ssim);
  }
  r.nrmse = mean_std(nr);
  r.psnr = mean_std(ps);
  r.ssim = mean_std(ss);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string to_jsonl(const ReconstructionReport& r) {
  std::string out;
  for (const auto& im : r.images) {
    nlohmann::ordered_json j;
    j["type"] = "image";
    j["method"] = r.method;
    j["name"] = im.name;
    j["nrmse"] = im.metrics.nrmse;
    j["psnr"] = std::min(im.metrics.psnr, kPsnrSentinel);
    j["ssim"] = im.metrics.ssim;
    out += j.dump() + "\n";
  }
  nlohmann::ordered_json a;
  a["type"] = "aggregate";
  a["method"] = r.method;
  a["fingerprint"] = r.fingerprint;
  a["count"] = r.images.size();
  a["nrmse_mean"] = r.nrmse.mean;
  a["nrmse_std"] = r.nrmse.std;
  a["psnr_mean"] = r.psnr.mean;
  a["psnr_std"] = r.psnr.std;
  a["ssim_mean"] = r.ssim.mean;
  a["ssim_std"] = r.ssim.std;
  out += a.dump() + "\n";
  return out;
}

void write_report(const std::filesystem::path& path, const ReconstructionReport& r) {
  const std::string text = to_jsonl(r);
  io::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void write_pgm(const std::filesystem::path& path, const RealImage& image, double scale) {
  std::string data = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  for (double v : image.values) {
    const double c = std::clamp(v * scale, 0.0, 1.0);
    data.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  io::write_file(path, {reinterpret_cast<const std::uint8_t*>(data.data()), data.size()});
}

void export_figure(const std::filesystem::path& dir, const std::string& stem, const ComplexImage& reconstruction,
                   const ComplexImage& reference, double error_gain) {
  if (!reconstruction.same_shape(reference)) throw InvalidInput("figure export: shape mismatch");
  const RealImage rec = magnitude(reconstruction);
  const RealImage ref = magnitude(reference);
  const double peak = *std::max_element(ref.values.begin(), ref.values.end());
  const double scale = peak > 0.0 ? 1.0 / peak : 1.0;
  RealImage err(ref.height, ref.width);
  for (std::size_t k = 0; k < err.values.size(); ++k) err.values[k] = std::abs(rec.values[k] - ref.values[k]);
  write_pgm(dir / (stem + "_recon.pgm"), rec, scale);
  write_pgm(dir / (stem + "_error.pgm"), err, scale * error_gain);
}

}  // namespace miccan
