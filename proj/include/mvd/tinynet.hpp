#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mvd/circulant.hpp"
#include "mvd/rng.hpp"
#include "mvd/signal1d.hpp"

namespace mvd {

// Depth-k single-channel CNN:
//
//   f(x) = A relu(C_k(...relu(C_1 x + b_1)...) + b_k) + b_A
//
// with each C_i a length-D circulant (same index convention as
// apply_circulant) and A an unconstrained D x D matrix. Depth 0 degenerates
// to the affine map A x + b_A. Everything is 64-bit; training is exact
// backpropagation plus Nesterov-momentum SGD.

struct ConvLayer {
  std::vector<double> kernel_first_row;
  std::vector<double> bias;
};

struct AffineHead {
  std::vector<double> weight;  // D x D, row-major
  std::vector<double> bias;
};

struct TinyNet {
  std::size_t dim = 0;
  int depth = 0;
  // 0 means the full length-D circulant kernel; otherwise an odd tap count
  // s restricts trainable kernel entries to offsets {0..s/2} and {D-s/2..D-1}.
  int kernel_support = 0;
  std::vector<ConvLayer> conv;
  AffineHead head;

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(depth) * 2 * dim + dim * dim + dim;
  }
  bool kernel_offset_free(std::size_t offset) const {
    if (kernel_support == 0) return true;
    const std::size_t half = static_cast<std::size_t>(kernel_support) / 2;
    return offset <= half || offset >= dim - half;
  }
};

struct NetGradients {
  std::vector<ConvLayer> conv;  // same shapes as the net's layers
  AffineHead head;

  void resize_like(const TinyNet& net) {
    conv.resize(net.conv.size());
    for (std::size_t i = 0; i < conv.size(); ++i) {
      conv[i].kernel_first_row.assign(net.dim, 0.0);
      conv[i].bias.assign(net.dim, 0.0);
    }
    head.weight.assign(net.dim * net.dim, 0.0);
    head.bias.assign(net.dim, 0.0);
  }
  void zero() {
    for (auto& layer : conv) {
      std::fill(layer.kernel_first_row.begin(), layer.kernel_first_row.end(), 0.0);
      std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    std::fill(head.weight.begin(), head.weight.end(), 0.0);
    std::fill(head.bias.begin(), head.bias.end(), 0.0);
  }
};

// Weights uniform on (-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
// Draw order: conv kernels in layer order (free offsets ascending), then the
// head weight row-major.
inline TinyNet init_network(int depth, std::size_t dim, Rng& rng, int kernel_support = 0) {
  if (depth < 0 || depth > 3) throw std::invalid_argument("init_network: depth must be in {0,1,2,3}");
  if (dim < 1) throw std::invalid_argument("init_network: D >= 1 required");
  if (kernel_support != 0 &&
      (kernel_support % 2 == 0 || static_cast<std::size_t>(kernel_support) > dim))
    throw std::invalid_argument("init_network: kernel support must be odd and <= D");
  TinyNet net;
  net.dim = dim;
  net.depth = depth;
  net.kernel_support = kernel_support;
  const std::size_t taps = kernel_support == 0 ? dim : static_cast<std::size_t>(kernel_support);
  const double conv_bound = 1.0 / std::sqrt(static_cast<double>(taps));
  net.conv.resize(static_cast<std::size_t>(depth));
  for (auto& layer : net.conv) {
    layer.kernel_first_row.assign(dim, 0.0);
    layer.bias.assign(dim, 0.0);
    for (std::size_t offset = 0; offset < dim; ++offset)
      if (net.kernel_offset_free(offset))
        layer.kernel_first_row[offset] = rng.uniform(-conv_bound, conv_bound);
  }
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(dim));
  net.head.weight.resize(dim * dim);
  for (auto& w : net.head.weight) w = rng.uniform(-head_bound, head_bound);
  net.head.bias.assign(dim, 0.0);
  return net;
}

namespace detail {

inline void affine_apply(const AffineHead& head, std::span<const double> x, std::span<double> y) {
  const std::size_t d = head.bias.size();
  for (std::size_t i = 0; i < d; ++i) {
    const double* row = head.weight.data() + i * d;
    double acc = head.bias[i];
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

// Per-layer activations for one sample; reused across samples.
struct ForwardScratch {
  std::vector<std::vector<double>> pre;   // conv output + bias, per layer
  std::vector<std::vector<double>> post;  // relu(pre), per layer
  std::vector<double> out;
  std::vector<double> grad;

  void resize(const TinyNet& net) {
    pre.assign(net.conv.size(), std::vector<double>(net.dim));
    post.assign(net.conv.size(), std::vector<double>(net.dim));
    out.resize(net.dim);
    grad.resize(net.dim);
  }
};

inline void forward_into(const TinyNet& net, std::span<const double> x, ForwardScratch& s) {
  std::span<const double> cur = x;
  for (std::size_t i = 0; i < net.conv.size(); ++i) {
    circ::correlate(net.conv[i].kernel_first_row, cur, s.pre[i]);
    for (std::size_t j = 0; j < net.dim; ++j) {
      s.pre[i][j] += net.conv[i].bias[j];
      s.post[i][j] = s.pre[i][j] > 0.0 ? s.pre[i][j] : 0.0;
    }
    cur = s.post[i];
  }
  affine_apply(net.head, cur, s.out);
}

}  // namespace detail

inline std::vector<double> forward(const TinyNet& net, std::span<const double> x) {
  if (x.size() != net.dim) throw std::invalid_argument("forward: length mismatch");
  detail::ForwardScratch s;
  s.resize(net);
  detail::forward_into(net, x, s);
  return s.out;
}

namespace detail {

inline double loss_and_gradients_indexed(const TinyNet& net, std::span<const SamplePair1D> data,
                                         std::span<const std::size_t> batch, NetGradients& grads,
                                         ForwardScratch& s, std::vector<double>& gnext) {
  const std::size_t d = net.dim;
  const std::size_t k = net.conv.size();
  grads.zero();
  gnext.resize(d);
  const double scale = 2.0 / (static_cast<double>(d) * static_cast<double>(batch.size()));
  double loss = 0.0;

  for (const std::size_t sample : batch) {
    const auto& pair = data[sample];
    detail::forward_into(net, pair.phi_data, s);
    // d(loss)/d(out)
    for (std::size_t j = 0; j < d; ++j) {
      const double e = s.out[j] - pair.phi[j];
      loss += e * e;
      s.grad[j] = scale * e;
    }
    // Head: dA = grad outer z_k, z_k = last activation (or the input for k=0).
    std::span<const double> zk = k == 0 ? std::span<const double>(pair.phi_data)
                                        : std::span<const double>(s.post[k - 1]);
    for (std::size_t i = 0; i < d; ++i) {
      double* grow = grads.head.weight.data() + i * d;
      const double gi = s.grad[i];
      for (std::size_t j = 0; j < d; ++j) grow[j] += gi * zk[j];
      grads.head.bias[i] += gi;
    }
    if (k == 0) continue;
    // Back through the head: g = A^T grad.
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += net.head.weight[i * d + j] * s.grad[i];
      gnext[j] = acc;
    }
    for (std::size_t layer = k; layer-- > 0;) {
      // ReLU mask (subgradient 0 at exactly 0).
      for (std::size_t j = 0; j < d; ++j)
        if (s.pre[layer][j] <= 0.0) gnext[j] = 0.0;
      std::span<const double> zin = layer == 0 ? std::span<const double>(pair.phi_data)
                                               : std::span<const double>(s.post[layer - 1]);
      // Kernel gradient: dK[m] = sum_j g_j z_in[(j+m) mod D].
      auto& gk = grads.conv[layer].kernel_first_row;
      for (std::size_t m = 0; m < d; ++m) {
        if (!net.kernel_offset_free(m)) continue;
        double acc = 0.0;
        std::size_t j = 0;
        for (; j < d - m; ++j) acc += gnext[j] * zin[j + m];
        for (; j < d; ++j) acc += gnext[j] * zin[j + m - d];
        gk[m] += acc;
      }
      for (std::size_t j = 0; j < d; ++j) grads.conv[layer].bias[j] += gnext[j];
      if (layer > 0) {
        // Propagate: g = C^T g.
        circ::correlate_transpose(net.conv[layer].kernel_first_row, gnext, s.grad);
        std::swap(gnext, s.grad);
      }
    }
  }
  return loss / (static_cast<double>(d) * static_cast<double>(batch.size()));
}

}  // namespace detail

// Loss over a batch, (1/(D*|batch|)) sum ||f(phi_data) - phi||^2, and its
// exact gradients. Restricted-support nets get zero gradient outside the
// free kernel offsets.
inline double loss_and_gradients(const TinyNet& net, std::span<const SamplePair1D> batch,
                                 NetGradients& grads) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  for (const auto& pair : batch)
    if (pair.phi.size() != net.dim || pair.phi_data.size() != net.dim)
      throw std::invalid_argument("loss_and_gradients: sample dimension mismatch");
  grads.resize_like(net);
  detail::ForwardScratch s;
  s.resize(net);
  std::vector<std::size_t> all(batch.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<double> gnext;
  return detail::loss_and_gradients_indexed(net, batch, all, grads, s, gnext);
}

// Nesterov-momentum SGD with the update rule
//   v <- mu v + g,   theta <- theta - eta (g + mu v)
// applied per parameter tensor.
class NesterovSgd {
 public:
  NesterovSgd(double learning_rate, double momentum = 0.9)
      : lr_(learning_rate), momentum_(momentum) {}

  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }

  void step(TinyNet& net, const NetGradients& grads) {
    if (velocity_.conv.size() != net.conv.size() || velocity_.head.weight.size() != net.head.weight.size())
      velocity_.resize_like(net);
    for (std::size_t i = 0; i < net.conv.size(); ++i) {
      update(net.conv[i].kernel_first_row, grads.conv[i].kernel_first_row,
             velocity_.conv[i].kernel_first_row);
      update(net.conv[i].bias, grads.conv[i].bias, velocity_.conv[i].bias);
    }
    update(net.head.weight, grads.head.weight, velocity_.head.weight);
    update(net.head.bias, grads.head.bias, velocity_.head.bias);
  }

 private:
  void update(std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& v) {
    if (theta.size() != g.size() || theta.size() != v.size())
      throw std::invalid_argument("NesterovSgd: shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      theta[i] -= lr_ * (g[i] + momentum_ * v[i]);
    }
  }

  double lr_;
  double momentum_;
  NetGradients velocity_;
};

// Seeded Fisher-Yates; consumes the stream identically for any contents.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
    std::swap(idx[i - 1], idx[j < i ? j : i - 1]);
  }
  return idx;
}

struct TrainConfig {
  int epochs = 50;
  int batch_size = 10;
};

// Mini-batch SGD: per epoch, shuffle with stream.fork(epoch) and take one
// optimizer step per batch (the last partial batch is kept). No early
// stopping; the final-epoch parameters are returned. If the loss goes
// non-finite the run stops where it is -- downstream evaluation then
// reports non-finite MSE and selection ranks the run last.
inline TinyNet train(TinyNet net, std::span<const SamplePair1D> data, const TrainConfig& cfg,
                     NesterovSgd& opt, RngStream shuffle_stream) {
  if (data.empty()) throw std::invalid_argument("train: empty training set");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw std::invalid_argument("train: bad config");
  for (const auto& pair : data)
    if (pair.phi.size() != net.dim || pair.phi_data.size() != net.dim)
      throw std::invalid_argument("train: sample dimension mismatch");
  NetGradients grads;
  grads.resize_like(net);
  detail::ForwardScratch scratch;
  scratch.resize(net);
  std::vector<double> gnext;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = shuffle_stream.fork(static_cast<std::uint64_t>(epoch)).rng();
    const auto order = shuffled_indices(data.size(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const double loss = detail::loss_and_gradients_indexed(net, data, batch, grads, scratch, gnext);
      if (!std::isfinite(loss)) return net;
      opt.step(net, grads);
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Parameter file "MVP1": header {magic "MVP1", version u16, depth u16,
// kernel_support u16, D u32}, then little-endian doubles in tensor order:
// per conv layer its kernel first row then its bias, then the head weight
// (row-major), then the head bias.

inline void save_network(const std::string& path, const TinyNet& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_network: cannot open " + path);
  os.write("MVP1", 4);
  detail::write_pod(os, static_cast<std::uint16_t>(1));
  detail::write_pod(os, static_cast<std::uint16_t>(net.depth));
  detail::write_pod(os, static_cast<std::uint16_t>(net.kernel_support));
  detail::write_pod(os, static_cast<std::uint32_t>(net.dim));
  auto dump = [&](const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
  };
  for (const auto& layer : net.conv) {
    dump(layer.kernel_first_row);
    dump(layer.bias);
  }
  dump(net.head.weight);
  dump(net.head.bias);
  if (!os) throw std::runtime_error("save_network: write failed for " + path);
}

inline TinyNet load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_network: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MVP1", 4) != 0)
    throw std::runtime_error("load_network: bad magic in " + path);
  if (detail::read_pod<std::uint16_t>(is) != 1)
    throw std::runtime_error("load_network: unsupported version");
  TinyNet net;
  net.depth = detail::read_pod<std::uint16_t>(is);
  net.kernel_support = detail::read_pod<std::uint16_t>(is);
  net.dim = detail::read_pod<std::uint32_t>(is);
  auto slurp = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
  };
  net.conv.resize(static_cast<std::size_t>(net.depth));
  for (auto& layer : net.conv) {
    slurp(layer.kernel_first_row, net.dim);
    slurp(layer.bias, net.dim);
  }
  slurp(net.head.weight, net.dim * net.dim);
  slurp(net.head.bias, net.dim);
  if (!is) throw std::runtime_error("load_network: truncated file " + path);
  return net;
}

}  // namespace mvd
