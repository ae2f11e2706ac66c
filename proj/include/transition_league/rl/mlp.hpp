#pragma once

// Dense tanh network over a flat parameter vector, with manual backprop.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "../core/error.hpp"
#include "../core/rng.hpp"

namespace tl {

class Mlp {
 public:
  struct Cache {
    std::vector<std::vector<double>> activations;  // input, each hidden output, final output
  };

  Mlp() = default;

  /// `sizes` = {inputs, hidden..., outputs}; hidden layers use tanh.
  explicit Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw Error(Errc::DimensionMismatch, "network needs input and output sizes");
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(n);
      n += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    params_.assign(n, 0.0);
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t inputs() const { return sizes_.front(); }
  std::size_t outputs() const { return sizes_.back(); }
  std::size_t num_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Gaussian weights with std gain/sqrt(fan_in); the last layer uses
  /// `output_gain`. Biases start at zero.
  void init(Rng& rng, double gain = 1.0, double output_gain = 0.01) {
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const double g = (l + 2 == sizes_.size()) ? output_gain : gain;
      const double sd = g / std::sqrt(static_cast<double>(sizes_[l]));
      double* w = params_.data() + offsets_[l];
      for (std::size_t k = 0; k < sizes_[l] * sizes_[l + 1]; ++k) w[k] = sd * standard_normal(rng);
      for (std::size_t k = 0; k < sizes_[l + 1]; ++k) w[sizes_[l] * sizes_[l + 1] + k] = 0.0;
    }
  }

  std::vector<double> forward(std::span<const double> x, Cache* cache = nullptr) const {
    if (x.size() != inputs())
      throw Error(Errc::DimensionMismatch, "network expects " + std::to_string(inputs()) + " inputs, got " +
                                               std::to_string(x.size()));
    std::vector<double> a(x.begin(), x.end());
    if (cache) {
      cache->activations.clear();
      cache->activations.push_back(a);
    }
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + in * out;
      std::vector<double> z(out);
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
        z[o] = (l + 1 < layers) ? std::tanh(s) : s;
      }
      a = std::move(z);
      if (cache) cache->activations.push_back(a);
    }
    return a;
  }

  /// Accumulates dLoss/dparams into `grad` given dLoss/doutput.
  void backward(const Cache& cache, std::span<const double> dout, std::span<double> grad) const {
    const std::size_t layers = sizes_.size() - 1;
    std::vector<double> delta(dout.begin(), dout.end());
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      if (l + 1 < layers) {
        const auto& y = cache.activations[l + 1];
        for (std::size_t o = 0; o < out; ++o) delta[o] *= 1.0 - y[o] * y[o];
      }
      const auto& a = cache.activations[l];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + in * out;
      std::vector<double> prev(l > 0 ? in : 0, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* grow = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * a[i];
        if (l == 0) continue;
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) prev[i] += d * row[i];
      }
      delta = std::move(prev);
    }
  }

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

}  // namespace tl
