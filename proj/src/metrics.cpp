#include "miccan/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace miccan {
namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

void check_pair(const RealImage& x, const RealImage& ref) {
  if (x.height != ref.height || x.width != ref.width) throw InvalidInput("metric operands differ in shape");
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  const double c = static_cast<double>(kWindow / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable "valid" filtering: output is (H−10)×(W−10).
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& g) {
  const std::size_t ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) acc += g[k] * in[i * w + j + k];
      rows[i * ow + j] = acc;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) acc += g[k] * rows[(i + k) * ow + j];
      out[i * ow + j] = acc;
    }
  return out;
}

}  // namespace

double nrmse(const RealImage& x, const RealImage& ref) {
  check_pair(x, ref);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.values.size(); ++k) {
    const double d = x.values[k] - ref.values[k];
    num += d * d;
    den += ref.values[k] * ref.values[k];
  }
  if (den == 0.0) throw UndefinedMetric("NRMSE is undefined for a zero-norm reference");
  return std::sqrt(num / den);
}

double psnr(const RealImage& x, const RealImage& ref, double data_range) {
  check_pair(x, ref);
  if (!(data_range > 0.0)) throw InvalidInput("data_range must be positive");
  double mse = 0.0;
  for (std::size_t k = 0; k < x.values.size(); ++k) {
    const double d = x.values[k] - ref.values[k];
    mse += d * d;
  }
  mse /= static_cast<double>(x.values.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const RealImage& x, const RealImage& ref, double data_range) {
  check_pair(x, ref);
  if (x.height < kWindow || x.width < kWindow) throw InvalidInput("SSIM needs images of at least 11x11 pixels");
  if (!(data_range > 0.0)) throw InvalidInput("data_range must be positive");
  const std::size_t h = x.height, w = x.width, n = h * w;
  const auto g = gaussian_taps();

  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xx[k] = x.values[k] * x.values[k];
    yy[k] = ref.values[k] * ref.values[k];
    xy[k] = x.values[k] * ref.values[k];
  }
  const auto mx = filter_valid(x.values, h, w, g);
  const auto my = filter_valid(ref.values, h, w, g);
  const auto mxx = filter_valid(xx, h, w, g);
  const auto myy = filter_valid(yy, h, w, g);
  const auto mxy = filter_valid(xy, h, w, g);

  const double c1 = (kK1 * data_range) * (kK1 * data_range);
  const double c2 = (kK2 * data_range) * (kK2 * data_range);
  double acc = 0.0;
  for (std::size_t k = 0; k < mx.size(); ++k) {
    const double vx = mxx[k] - mx[k] * mx[k];
    const double vy = myy[k] - my[k] * my[k];
    const double cxy = mxy[k] - mx[k] * my[k];
    acc += ((2.0 * mx[k] * my[k] + c1) * (2.0 * cxy + c2)) /
           ((mx[k] * mx[k] + my[k] * my[k] + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(mx.size());
}

MetricReport compare_images(const ComplexImage& reconstruction, const ComplexImage& reference) {
  RealImage x = magnitude(reconstruction);
  RealImage r = magnitude(reference);
  const double peak = *std::max_element(r.values.begin(), r.values.end());
  if (peak > 0.0) {
    for (double& v : x.values) v /= peak;
    for (double& v : r.values) v /= peak;
  }
  return {nrmse(x, r), psnr(x, r, 1.0), ssim(x, r, 1.0)};
}

}  // namespace miccan
