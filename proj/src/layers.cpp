#include "miccan/layers.hpp"

#include <Eigen/Core>
#include <algorithm>

namespace miccan {

FeatureMapStack& FeatureMapStack::operator+=(const FeatureMapStack& o) {
  if (!same_shape(o)) throw InvalidInput("feature map shape mismatch");
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
  return *this;
}

FeatureMapStack to_channels(const ComplexImage& image) {
  FeatureMapStack out(2, image.height(), image.width());
  std::copy(image.real().begin(), image.real().end(), out.values.begin());
  std::copy(image.imag().begin(), image.imag().end(), out.values.begin() + static_cast<std::ptrdiff_t>(out.plane()));
  return out;
}

ComplexImage from_channels(const FeatureMapStack& maps) {
  if (maps.channels != 2) throw InvalidInput("complex image needs exactly two channels");
  const auto re = maps.channel(0);
  const auto im = maps.channel(1);
  return ComplexImage(maps.height, maps.width, {re.begin(), re.end()}, {im.begin(), im.end()});
}

namespace layers {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_conv(const FeatureMapStack& in, std::span<const double> weight, std::span<const double> bias,
                const ConvShape& shape) {
  if (shape.kernel % 2 == 0) throw InvalidConfig("convolution kernel must be odd");
  if (in.channels != shape.in_channels) throw InvalidInput("convolution input channel mismatch");
  if (weight.size() != shape.weight_count() || bias.size() != shape.out_channels)
    throw InvalidConfig("convolution parameter size mismatch");
}

// col[(c*k*k + ky*k + kx), y*W + x] = in[c, y+ky-p, x+kx-p] (zero outside)
void im2col(const FeatureMapStack& in, std::size_t k, std::vector<double>& col) {
  const std::size_t h = in.height, w = in.width, hw = h * w;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  col.assign(in.channels * k * k * hw, 0.0);
  std::size_t row = 0;
  for (std::size_t c = 0; c < in.channels; ++c) {
    const double* src = in.values.data() + c * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        double* dst = col.data() + row * hw;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const std::size_t x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -dx));
        const std::size_t x1 = static_cast<std::size_t>(std::min<std::ptrdiff_t>(w, static_cast<std::ptrdiff_t>(w) - dx));
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          const double* s = src + static_cast<std::size_t>(sy) * w;
          double* d = dst + y * w;
          for (std::size_t x = x0; x < x1; ++x) d[x] = s[static_cast<std::ptrdiff_t>(x) + dx];
        }
      }
    }
  }
}

void col2im(const std::vector<double>& col, std::size_t k, FeatureMapStack& out) {
  const std::size_t h = out.height, w = out.width, hw = h * w;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  std::size_t row = 0;
  for (std::size_t c = 0; c < out.channels; ++c) {
    double* dst = out.values.data() + c * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        const double* src = col.data() + row * hw;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const std::size_t x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -dx));
        const std::size_t x1 = static_cast<std::size_t>(std::min<std::ptrdiff_t>(w, static_cast<std::ptrdiff_t>(w) - dx));
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          double* d = dst + static_cast<std::size_t>(sy) * w;
          const double* s = src + y * w;
          for (std::size_t x = x0; x < x1; ++x) d[static_cast<std::ptrdiff_t>(x) + dx] += s[x];
        }
      }
    }
  }
}

thread_local std::vector<double> g_col;

}  // namespace

FeatureMapStack conv2d(const FeatureMapStack& in, std::span<const double> weight, std::span<const double> bias,
                       const ConvShape& shape) {
  check_conv(in, weight, bias, shape);
  const std::size_t hw = in.plane();
  const std::size_t kk = shape.fan_in();
  FeatureMapStack out(shape.out_channels, in.height, in.width);
  Eigen::Map<const RowMat> w(weight.data(), static_cast<Eigen::Index>(shape.out_channels), static_cast<Eigen::Index>(kk));
  Eigen::Map<RowMat> o(out.values.data(), static_cast<Eigen::Index>(shape.out_channels), static_cast<Eigen::Index>(hw));
  if (shape.kernel == 1) {
    Eigen::Map<const RowMat> x(in.values.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(hw));
    o.noalias() = w * x;
  } else {
    im2col(in, shape.kernel, g_col);
    Eigen::Map<const RowMat> x(g_col.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(hw));
    o.noalias() = w * x;
  }
  for (std::size_t c = 0; c < shape.out_channels; ++c) o.row(static_cast<Eigen::Index>(c)).array() += bias[c];
  return out;
}

FeatureMapStack conv2d_backward(const FeatureMapStack& in, const FeatureMapStack& grad_out,
                                std::span<const double> weight, const ConvShape& shape,
                                std::span<double> grad_weight, std::span<double> grad_bias, bool want_input_grad) {
  check_conv(in, weight, {grad_bias.data(), grad_bias.size()}, shape);
  if (grad_out.channels != shape.out_channels || grad_out.height != in.height || grad_out.width != in.width)
    throw InvalidInput("convolution gradient shape mismatch");
  if (grad_weight.size() != shape.weight_count()) throw InvalidConfig("convolution gradient buffer mismatch");

  const auto cout = static_cast<Eigen::Index>(shape.out_channels);
  const auto kk = static_cast<Eigen::Index>(shape.fan_in());
  const auto hw = static_cast<Eigen::Index>(in.plane());
  Eigen::Map<const RowMat> g(grad_out.values.data(), cout, hw);
  Eigen::Map<RowMat> gw(grad_weight.data(), cout, kk);
  Eigen::Map<const RowMat> w(weight.data(), cout, kk);
  // Plain loop: Eigen's vectorized sum depends on the buffer alignment.
  for (std::size_t c = 0; c < shape.out_channels; ++c) {
    double acc = 0.0;
    const double* row = grad_out.values.data() + c * in.plane();
    for (std::size_t k = 0; k < in.plane(); ++k) acc += row[k];
    grad_bias[c] += acc;
  }

  FeatureMapStack grad_in;
  if (shape.kernel == 1) {
    Eigen::Map<const RowMat> x(in.values.data(), kk, hw);
    gw.noalias() += g * x.transpose();
    if (want_input_grad) {
      grad_in = FeatureMapStack(in.channels, in.height, in.width);
      Eigen::Map<RowMat> gi(grad_in.values.data(), kk, hw);
      gi.noalias() = w.transpose() * g;
    }
    return grad_in;
  }

  im2col(in, shape.kernel, g_col);
  {
    Eigen::Map<const RowMat> x(g_col.data(), kk, hw);
    gw.noalias() += g * x.transpose();
  }
  if (want_input_grad) {
    std::vector<double> dcol(static_cast<std::size_t>(kk * hw));
    Eigen::Map<RowMat> dc(dcol.data(), kk, hw);
    dc.noalias() = w.transpose() * g;
    grad_in = FeatureMapStack(in.channels, in.height, in.width);
    col2im(dcol, shape.kernel, grad_in);
  }
  return grad_in;
}

void relu_inplace(FeatureMapStack& maps) {
  for (double& v : maps.values) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(FeatureMapStack& grad, const FeatureMapStack& activated) {
  if (!grad.same_shape(activated)) throw InvalidInput("relu gradient shape mismatch");
  for (std::size_t k = 0; k < grad.values.size(); ++k)
    if (!(activated.values[k] > 0.0)) grad.values[k] = 0.0;
}

namespace {
void check_even(const FeatureMapStack& in) {
  if (in.height % 2 != 0 || in.width % 2 != 0) throw InvalidInput("2x pooling requires even spatial size");
}
}  // namespace

MaxPoolResult max_pool2(const FeatureMapStack& in) {
  check_even(in);
  const std::size_t oh = in.height / 2, ow = in.width / 2;
  MaxPoolResult r{FeatureMapStack(in.channels, oh, ow), std::vector<std::uint32_t>(in.channels * oh * ow)};
  std::size_t o = 0;
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++o) {
        std::size_t best = (c * in.height + 2 * i) * in.width + 2 * j;
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) {
            const std::size_t idx = (c * in.height + 2 * i + di) * in.width + 2 * j + dj;
            if (in.values[idx] > in.values[best]) best = idx;
          }
        r.out.values[o] = in.values[best];
        r.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

FeatureMapStack max_pool2_backward(const FeatureMapStack& grad_out, std::span<const std::uint32_t> argmax,
                                   std::size_t in_height, std::size_t in_width) {
  if (argmax.size() != grad_out.values.size()) throw InvalidInput("max-pool gradient size mismatch");
  FeatureMapStack g(grad_out.channels, in_height, in_width);
  for (std::size_t o = 0; o < argmax.size(); ++o) g.values[argmax[o]] += grad_out.values[o];
  return g;
}

FeatureMapStack avg_pool2(const FeatureMapStack& in) {
  check_even(in);
  FeatureMapStack out(in.channels, in.height / 2, in.width / 2);
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j)
        out(c, i, j) = 0.25 * (in(c, 2 * i, 2 * j) + in(c, 2 * i, 2 * j + 1) + in(c, 2 * i + 1, 2 * j) +
                               in(c, 2 * i + 1, 2 * j + 1));
  return out;
}

FeatureMapStack avg_pool2_backward(const FeatureMapStack& grad_out) {
  FeatureMapStack g(grad_out.channels, grad_out.height * 2, grad_out.width * 2);
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t i = 0; i < g.height; ++i)
      for (std::size_t j = 0; j < g.width; ++j) g(c, i, j) = 0.25 * grad_out(c, i / 2, j / 2);
  return g;
}

FeatureMapStack upsample2(const FeatureMapStack& in) {
  FeatureMapStack out(in.channels, in.height * 2, in.width * 2);
  for (std::size_t c = 0; c < out.channels; ++c)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j) out(c, i, j) = in(c, i / 2, j / 2);
  return out;
}

FeatureMapStack upsample2_backward(const FeatureMapStack& grad_out) {
  check_even(grad_out);
  FeatureMapStack g(grad_out.channels, grad_out.height / 2, grad_out.width / 2);
  for (std::size_t c = 0; c < grad_out.channels; ++c)
    for (std::size_t i = 0; i < grad_out.height; ++i)
      for (std::size_t j = 0; j < grad_out.width; ++j) g(c, i / 2, j / 2) += grad_out(c, i, j);
  return g;
}

FeatureMapStack concat_channels(const FeatureMapStack& a, const FeatureMapStack& b) {
  if (a.height != b.height || a.width != b.width) throw InvalidInput("concat spatial shape mismatch");
  FeatureMapStack out(a.channels + b.channels, a.height, a.width);
  std::copy(a.values.begin(), a.values.end(), out.values.begin());
  std::copy(b.values.begin(), b.values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(a.values.size()));
  return out;
}

std::pair<FeatureMapStack, FeatureMapStack> split_channels(const FeatureMapStack& g, std::size_t first_channels) {
  if (first_channels > g.channels) throw InvalidInput("split beyond channel count");
  FeatureMapStack a(first_channels, g.height, g.width);
  FeatureMapStack b(g.channels - first_channels, g.height, g.width);
  const auto mid = g.values.begin() + static_cast<std::ptrdiff_t>(a.values.size());
  std::copy(g.values.begin(), mid, a.values.begin());
  std::copy(mid, g.values.end(), b.values.begin());
  return {std::move(a), std::move(b)};
}

}  // namespace layers
}  // namespace miccan
