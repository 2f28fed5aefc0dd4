// Copyright 2026, radar-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/nn/tensor.hpp"
#include "radar_forge/rng.hpp"

namespace radar_forge::nn {

enum class LayerKind : std::uint8_t {
  Conv2d = 1,
  FullyConnected = 2,
  Activation = 3,
  AvgPool = 4,
  AdaptiveAvgPool = 5,
  Flatten = 6,
};

enum class ActivationKind : std::uint32_t { Identity = 0, Relu = 1, Sigmoid = 2 };

/// A differentiable op. `forward` caches whatever `backward` needs;
/// `backward` returns the input gradient and adds into parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  /// Parameter gradients only; layers whose input gradient is expensive
  /// override this to skip it.
  virtual void backward_params(const Tensor& grad_out) { backward(grad_out); }
  virtual std::vector<Param*> params() { return {}; }
  /// Integer hyperparameters, in the order the constructor takes them.
  virtual std::vector<std::uint32_t> hyper() const { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

namespace detail {

inline void fill_glorot(Tensor& t, int fan_in, int fan_out, SeededRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ShapeMismatch, what);
}

}  // namespace detail

/// Cross-correlation with bias. Weights (out, in, k, k); zero padding.
class Conv2d final : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride = 1, int padding = 0)
      : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride), pad_(padding),
        weight_(Tensor(out_channels, in_channels, kernel, kernel)), bias_(Tensor::vector(out_channels)) {
    detail::require(in_ > 0 && out_ > 0 && k_ > 0 && stride_ > 0 && pad_ >= 0, "invalid conv2d hyperparameters");
  }

  void init(SeededRng& rng) {
    detail::fill_glorot(weight_.value, in_ * k_ * k_, out_ * k_ * k_, rng);
    bias_.value.fill(0.0);
  }

  LayerKind kind() const override { return LayerKind::Conv2d; }
  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  std::vector<std::uint32_t> hyper() const override {
    return {static_cast<std::uint32_t>(in_), static_cast<std::uint32_t>(out_), static_cast<std::uint32_t>(k_),
            static_cast<std::uint32_t>(stride_), static_cast<std::uint32_t>(pad_)};
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

  int output_extent(int in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }

  Tensor forward(const Tensor& x) override {
    detail::require(x.c() == in_, "conv2d expects " + std::to_string(in_) + " channels, got " + x.shape_string());
    detail::require(x.h() + 2 * pad_ >= k_ && x.w() + 2 * pad_ >= k_, "conv2d kernel larger than padded input");
    input_ = x;
    const int oh = output_extent(x.h()), ow = output_extent(x.w());
    Tensor y(x.n(), out_, oh, ow);
    for (int n = 0; n < x.n(); ++n)
      for (int oc = 0; oc < out_; ++oc) {
        double* out = &y.at(n, oc, 0, 0);
        std::fill(out, out + static_cast<std::size_t>(oh) * ow, bias_.value[oc]);
        for_each_tap(x, oh, ow, [&](int ic, int ky, int kx, const Window& win) {
          const double wv = weight_.value.at(oc, ic, ky, kx);
          const double* in = x.data() + x.offset(n, ic, 0, 0);
          for (int oy = win.y0; oy <= win.y1; ++oy) {
            const double* src = in + static_cast<std::ptrdiff_t>(oy * stride_ - pad_ + ky) * x.w();
            double* dst = out + static_cast<std::ptrdiff_t>(oy) * ow;
            for (int ox = win.x0; ox <= win.x1; ++ox) dst[ox] += wv * src[ox * stride_ - pad_ + kx];
          }
        });
      }
    return y;
  }

  Tensor backward(const Tensor& g) override { return backward_impl(g, true); }
  void backward_params(const Tensor& g) override { backward_impl(g, false); }

 private:
  struct Window {
    int y0, y1, x0, x1;  // inclusive output ranges whose tap lands inside the input
  };

  // Output index range o with 0 <= o*stride - pad + k < extent.
  std::pair<int, int> valid_range(int k, int extent, int out_extent) const {
    const int lo_num = pad_ - k;
    const int lo = lo_num <= 0 ? 0 : (lo_num + stride_ - 1) / stride_;
    const int hi_num = extent - 1 + pad_ - k;
    const int hi = hi_num < 0 ? -1 : std::min(out_extent - 1, hi_num / stride_);
    return {lo, hi};
  }

  template <typename F>
  void for_each_tap(const Tensor& x, int oh, int ow, F&& f) const {
    for (int ic = 0; ic < in_; ++ic)
      for (int ky = 0; ky < k_; ++ky) {
        const auto [y0, y1] = valid_range(ky, x.h(), oh);
        if (y0 > y1) continue;
        for (int kx = 0; kx < k_; ++kx) {
          const auto [x0, x1] = valid_range(kx, x.w(), ow);
          if (x0 > x1) continue;
          f(ic, ky, kx, Window{y0, y1, x0, x1});
        }
      }
  }

  Tensor backward_impl(const Tensor& g, bool want_input_grad) {
    const Tensor& x = input_;
    const int oh = output_extent(x.h()), ow = output_extent(x.w());
    detail::require(g.n() == x.n() && g.c() == out_ && g.h() == oh && g.w() == ow,
                    "conv2d upstream gradient has the wrong shape");
    Tensor dx = want_input_grad ? Tensor(x.shape()) : Tensor();
    for (int n = 0; n < x.n(); ++n)
      for (int oc = 0; oc < out_; ++oc) {
        const double* go = g.data() + g.offset(n, oc, 0, 0);
        double bsum = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) bsum += go[i];
        bias_.grad[oc] += bsum;
        for_each_tap(x, oh, ow, [&](int ic, int ky, int kx, const Window& win) {
          const double wv = weight_.value.at(oc, ic, ky, kx);
          const double* in = x.data() + x.offset(n, ic, 0, 0);
          double* din = want_input_grad ? &dx.at(n, ic, 0, 0) : nullptr;
          double acc = 0.0;
          for (int oy = win.y0; oy <= win.y1; ++oy) {
            const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(oy * stride_ - pad_ + ky) * x.w();
            const double* src = in + row;
            const double* grow = go + static_cast<std::ptrdiff_t>(oy) * ow;
            for (int ox = win.x0; ox <= win.x1; ++ox) acc += grow[ox] * src[ox * stride_ - pad_ + kx];
            if (din) {
              double* dst = din + row;
              for (int ox = win.x0; ox <= win.x1; ++ox) dst[ox * stride_ - pad_ + kx] += grow[ox] * wv;
            }
          }
          weight_.grad.at(oc, ic, ky, kx) += acc;
        });
      }
    return dx;
  }

  int in_, out_, k_, stride_, pad_;
  Param weight_, bias_;
  Tensor input_;
};

/// y = W x + b on (N, in, 1, 1) inputs. Weights (out, in, 1, 1).
class FullyConnected final : public Layer {
 public:
  FullyConnected(int in_features, int out_features)
      : in_(in_features), out_(out_features), weight_(Tensor(out_features, in_features, 1, 1)),
        bias_(Tensor::vector(out_features)) {
    detail::require(in_ > 0 && out_ > 0, "invalid fc dimensions");
  }

  void init(SeededRng& rng) {
    detail::fill_glorot(weight_.value, in_, out_, rng);
    bias_.value.fill(0.0);
  }

  LayerKind kind() const override { return LayerKind::FullyConnected; }
  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  std::vector<std::uint32_t> hyper() const override {
    return {static_cast<std::uint32_t>(in_), static_cast<std::uint32_t>(out_)};
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<FullyConnected>(*this); }

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

  Tensor forward(const Tensor& x) override {
    detail::require(x.sample_size() == static_cast<std::size_t>(in_) && x.h() == 1 && x.w() == 1,
                    "fc expects (N," + std::to_string(in_) + ",1,1), got " + x.shape_string());
    input_ = x;
    Tensor y(x.n(), out_, 1, 1);
    const double* w = weight_.value.data();
    for (int n = 0; n < x.n(); ++n) {
      const double* xi = x.data() + static_cast<std::size_t>(n) * in_;
      for (int o = 0; o < out_; ++o) {
        double acc = bias_.value[o];
        const double* wr = w + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) acc += wr[i] * xi[i];
        y[static_cast<std::size_t>(n) * out_ + o] = acc;
      }
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    const Tensor& x = input_;
    detail::require(g.n() == x.n() && g.sample_size() == static_cast<std::size_t>(out_),
                    "fc upstream gradient has the wrong shape");
    Tensor dx(x.shape());
    const double* w = weight_.value.data();
    double* dw = weight_.grad.data();
    for (int n = 0; n < x.n(); ++n) {
      const double* xi = x.data() + static_cast<std::size_t>(n) * in_;
      double* dxi = dx.data() + static_cast<std::size_t>(n) * in_;
      for (int o = 0; o < out_; ++o) {
        const double go = g[static_cast<std::size_t>(n) * out_ + o];
        bias_.grad[o] += go;
        const double* wr = w + static_cast<std::size_t>(o) * in_;
        double* dwr = dw + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) {
          dwr[i] += go * xi[i];
          dxi[i] += go * wr[i];
        }
      }
    }
    return dx;
  }

 private:
  int in_, out_;
  Param weight_, bias_;
  Tensor input_;
};

class Activation final : public Layer {
 public:
  explicit Activation(ActivationKind kind) : act_(kind) {}

  LayerKind kind() const override { return LayerKind::Activation; }
  std::vector<std::uint32_t> hyper() const override { return {static_cast<std::uint32_t>(act_)}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Activation>(*this); }
  ActivationKind activation() const { return act_; }

  Tensor forward(const Tensor& x) override {
    Tensor y = x;
    switch (act_) {
      case ActivationKind::Identity: break;
      case ActivationKind::Relu:
        for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
        break;
      case ActivationKind::Sigmoid:
        for (auto& v : y.values()) v = 1.0 / (1.0 + std::exp(-v));
        break;
    }
    input_ = x;
    output_ = y;
    return y;
  }

  Tensor backward(const Tensor& g) override {
    detail::require(g.same_shape(input_), "activation upstream gradient has the wrong shape");
    Tensor dx = g;
    switch (act_) {
      case ActivationKind::Identity: break;
      case ActivationKind::Relu:
        for (std::size_t i = 0; i < dx.size(); ++i)
          if (!(input_[i] > 0.0)) dx[i] = 0.0;
        break;
      case ActivationKind::Sigmoid:
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= output_[i] * (1.0 - output_[i]);
        break;
    }
    return dx;
  }

 private:
  ActivationKind act_;
  Tensor input_, output_;
};

/// Non-overlapping average pooling (kernel == stride); trailing rows and
/// columns that do not fill a window are ignored.
class AvgPool final : public Layer {
 public:
  explicit AvgPool(int kernel) : k_(kernel) { detail::require(k_ > 0, "pool kernel must be positive"); }

  LayerKind kind() const override { return LayerKind::AvgPool; }
  std::vector<std::uint32_t> hyper() const override { return {static_cast<std::uint32_t>(k_)}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<AvgPool>(*this); }

  Tensor forward(const Tensor& x) override {
    detail::require(x.h() >= k_ && x.w() >= k_, "avg pool window larger than input");
    in_shape_ = x.shape();
    const int oh = x.h() / k_, ow = x.w() / k_;
    Tensor y(x.n(), x.c(), oh, ow);
    const double inv = 1.0 / (k_ * k_);
    for (int n = 0; n < x.n(); ++n)
      for (int c = 0; c < x.c(); ++c)
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            for (int ky = 0; ky < k_; ++ky)
              for (int kx = 0; kx < k_; ++kx) acc += x.at(n, c, oy * k_ + ky, ox * k_ + kx);
            y.at(n, c, oy, ox) = acc * inv;
          }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(in_shape_);
    const double inv = 1.0 / (k_ * k_);
    detail::require(g.n() == dx.n() && g.c() == dx.c() && g.h() == dx.h() / k_ && g.w() == dx.w() / k_,
                    "avg pool upstream gradient has the wrong shape");
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int oy = 0; oy < g.h(); ++oy)
          for (int ox = 0; ox < g.w(); ++ox) {
            const double v = g.at(n, c, oy, ox) * inv;
            for (int ky = 0; ky < k_; ++ky)
              for (int kx = 0; kx < k_; ++kx) dx.at(n, c, oy * k_ + ky, ox * k_ + kx) += v;
          }
    return dx;
  }

 private:
  int k_;
  Tensor::Shape in_shape_{};
};

/// Average pooling to a fixed output size. Bin i along an axis of length L
/// covers [floor(i L / out), ceil((i + 1) L / out)).
class AdaptiveAvgPool final : public Layer {
 public:
  AdaptiveAvgPool(int out_h, int out_w) : oh_(out_h), ow_(out_w) {
    detail::require(oh_ > 0 && ow_ > 0, "adaptive pool output must be positive");
  }

  LayerKind kind() const override { return LayerKind::AdaptiveAvgPool; }
  std::vector<std::uint32_t> hyper() const override {
    return {static_cast<std::uint32_t>(oh_), static_cast<std::uint32_t>(ow_)};
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<AdaptiveAvgPool>(*this); }

  Tensor forward(const Tensor& x) override {
    detail::require(x.h() > 0 && x.w() > 0, "adaptive pool needs a non-empty input");
    in_shape_ = x.shape();
    Tensor y(x.n(), x.c(), oh_, ow_);
    for (int n = 0; n < x.n(); ++n)
      for (int c = 0; c < x.c(); ++c)
        for (int oy = 0; oy < oh_; ++oy) {
          const int y0 = bin_start(oy, x.h(), oh_), y1 = bin_end(oy, x.h(), oh_);
          for (int ox = 0; ox < ow_; ++ox) {
            const int x0 = bin_start(ox, x.w(), ow_), x1 = bin_end(ox, x.w(), ow_);
            double acc = 0.0;
            for (int iy = y0; iy < y1; ++iy)
              for (int ix = x0; ix < x1; ++ix) acc += x.at(n, c, iy, ix);
            y.at(n, c, oy, ox) = acc / static_cast<double>((y1 - y0) * (x1 - x0));
          }
        }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(in_shape_);
    detail::require(g.n() == dx.n() && g.c() == dx.c() && g.h() == oh_ && g.w() == ow_,
                    "adaptive pool upstream gradient has the wrong shape");
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int oy = 0; oy < oh_; ++oy) {
          const int y0 = bin_start(oy, dx.h(), oh_), y1 = bin_end(oy, dx.h(), oh_);
          for (int ox = 0; ox < ow_; ++ox) {
            const int x0 = bin_start(ox, dx.w(), ow_), x1 = bin_end(ox, dx.w(), ow_);
            const double v = g.at(n, c, oy, ox) / static_cast<double>((y1 - y0) * (x1 - x0));
            for (int iy = y0; iy < y1; ++iy)
              for (int ix = x0; ix < x1; ++ix) dx.at(n, c, iy, ix) += v;
          }
        }
    return dx;
  }

 private:
  static int bin_start(int i, int in, int out) { return (i * in) / out; }
  static int bin_end(int i, int in, int out) { return ((i + 1) * in + out - 1) / out; }

  int oh_, ow_;
  Tensor::Shape in_shape_{};
};

/// (N, C, H, W) -> (N, C*H*W, 1, 1).
class Flatten final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::Flatten; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

  Tensor forward(const Tensor& x) override {
    in_shape_ = x.shape();
    Tensor y(x.n(), static_cast<int>(x.sample_size()), 1, 1);
    y.values() = x.values();
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(in_shape_);
    detail::require(g.size() == dx.size(), "flatten upstream gradient has the wrong size");
    dx.values() = g.values();
    return dx;
  }

 private:
  Tensor::Shape in_shape_{};
};

/// Channel concatenation of two tensors with equal N, H, W.
inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  detail::require(a.n() == b.n() && a.h() == b.h() && a.w() == b.w(),
                  "concat needs equal batch and spatial dims: " + a.shape_string() + " vs " + b.shape_string());
  Tensor y(a.n(), a.c() + b.c(), a.h(), a.w());
  const std::size_t sa = a.sample_size(), sb = b.sample_size();
  for (int n = 0; n < a.n(); ++n) {
    std::copy_n(a.data() + n * sa, sa, y.data() + n * (sa + sb));
    std::copy_n(b.data() + n * sb, sb, y.data() + n * (sa + sb) + sa);
  }
  return y;
}

/// Inverse of concat_channels for gradients: the first `channels_a`
/// channels go to the first tensor.
inline std::pair<Tensor, Tensor> split_channels(const Tensor& g, int channels_a) {
  detail::require(channels_a >= 0 && channels_a <= g.c(), "split point outside channel range");
  Tensor a(g.n(), channels_a, g.h(), g.w());
  Tensor b(g.n(), g.c() - channels_a, g.h(), g.w());
  const std::size_t sa = a.sample_size(), sb = b.sample_size();
  for (int n = 0; n < g.n(); ++n) {
    std::copy_n(g.data() + n * (sa + sb), sa, a.data() + n * sa);
    std::copy_n(g.data() + n * (sa + sb) + sa, sb, b.data() + n * sb);
  }
  return {std::move(a), std::move(b)};
}

/// Layers applied in order.
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& o) {
    for (const auto& l : o.layers_) layers_.push_back(l->clone());
  }
  Sequential& operator=(const Sequential& o) {
    if (this != &o) {
      layers_.clear();
      for (const auto& l : o.layers_) layers_.push_back(l->clone());
    }
    return *this;
  }
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  void push(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  Tensor forward(const Tensor& x) {
    Tensor y = x;
    for (auto& l : layers_) y = l->forward(y);
    return y;
  }

  Tensor backward(const Tensor& g) {
    Tensor d = g;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = (*it)->backward(d);
    return d;
  }

  /// Like backward, for a stack fed directly by data: stops at the first
  /// layer with parameters and skips its input gradient.
  void backward_params(const Tensor& g) {
    std::size_t first = layers_.size();
    for (std::size_t i = 0; i < layers_.size(); ++i)
      if (!layers_[i]->params().empty()) {
        first = i;
        break;
      }
    if (first == layers_.size()) return;
    Tensor d = g;
    for (std::size_t i = layers_.size() - 1; i > first; --i) d = layers_[i]->backward(d);
    layers_[first]->backward_params(d);
  }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }

  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

inline void zero_grads(const std::vector<Param*>& params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace radar_forge::nn
