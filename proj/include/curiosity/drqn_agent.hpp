#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curiosity/common.hpp"
#include "curiosity/episode_env.hpp"

namespace curiosity::nn {

using Vec = Eigen::VectorXd;
using Row = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;

struct ConvSpec {
  int channels = 0;
  int kernel = 0;
  int stride = 0;
  bool operator==(const ConvSpec&) const = default;
};

enum class ScalePreset : std::uint32_t { full = 0, mini = 1, custom = 2 };

inline const char* to_string(ScalePreset p) {
  switch (p) {
    case ScalePreset::full: return "full";
    case ScalePreset::mini: return "mini";
    case ScalePreset::custom: return "custom";
  }
  return "?";
}

struct NetworkShape {
  int input_size = 84;
  int input_channels = AgentObservation::kChannels;
  std::vector<ConvSpec> conv{{32, 8, 4}, {64, 4, 2}, {64, 3, 1}};
  int fc_image = 512;
  int fc_position = 16;
  int fc_fusion = 512;
  int n_fusion = 2;
  int hidden = 512;
  int n_actions = kActionCount;

  static constexpr int kPositionDims = 2;
  bool operator==(const NetworkShape&) const = default;
};

inline NetworkShape full_shape() { return {}; }

// Desk-scale network for 32 px inputs.
inline NetworkShape mini_shape() {
  NetworkShape s;
  s.input_size = 32;
  s.conv = {{8, 4, 2}, {16, 3, 2}, {16, 3, 1}};
  s.fc_image = 128;
  s.fc_position = 8;
  s.fc_fusion = 128;
  s.hidden = 64;
  return s;
}

inline NetworkShape shape_for(ScalePreset p) {
  switch (p) {
    case ScalePreset::full: return full_shape();
    case ScalePreset::mini: return mini_shape();
    default: throw ConfigError("no built-in network shape for the custom preset");
  }
}

// Spatial size after each conv layer.
inline std::vector<int> conv_output_sizes(const NetworkShape& s) {
  std::vector<int> out;
  int n = s.input_size;
  for (const auto& c : s.conv) {
    if (c.channels < 1 || c.kernel < 1 || c.stride < 1) throw ConfigError("network: invalid conv layer");
    if (n < c.kernel) throw ConfigError("network: input too small for the conv stack");
    n = (n - c.kernel) / c.stride + 1;
    out.push_back(n);
  }
  return out;
}

struct Block {
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

struct Layout {
  std::vector<int> sizes;
  int flat = 0;
  std::vector<Block> conv_w, conv_b;
  Block img_w, img_b, pos_w, pos_b;
  std::vector<Block> fuse_w, fuse_b;
  Block lstm_w, lstm_b;
  Block v_w, v_b, a_w, a_b;
  std::size_t total = 0;
};

inline Layout make_layout(const NetworkShape& s) {
  if (s.input_channels < 1 || s.fc_image < 1 || s.fc_position < 1 || s.fc_fusion < 1 || s.n_fusion < 1 ||
      s.hidden < 1 || s.n_actions < 1 || s.conv.empty())
    throw ConfigError("network: layer sizes must be positive");
  Layout L;
  L.sizes = conv_output_sizes(s);
  auto block = [&](int rows, int cols) {
    Block b{L.total, rows, cols};
    L.total += b.size();
    return b;
  };
  int cin = s.input_channels;
  for (const auto& c : s.conv) {
    L.conv_w.push_back(block(c.kernel * c.kernel * cin, c.channels));
    L.conv_b.push_back(block(1, c.channels));
    cin = c.channels;
  }
  L.flat = L.sizes.back() * L.sizes.back() * cin;
  L.img_w = block(L.flat, s.fc_image);
  L.img_b = block(1, s.fc_image);
  L.pos_w = block(NetworkShape::kPositionDims, s.fc_position);
  L.pos_b = block(1, s.fc_position);
  int in = s.fc_image + s.fc_position;
  for (int i = 0; i < s.n_fusion; ++i) {
    L.fuse_w.push_back(block(in, s.fc_fusion));
    L.fuse_b.push_back(block(1, s.fc_fusion));
    in = s.fc_fusion;
  }
  L.lstm_w = block(s.fc_fusion + s.hidden, 4 * s.hidden);
  L.lstm_b = block(1, 4 * s.hidden);
  L.v_w = block(s.hidden, 1);
  L.v_b = block(1, 1);
  L.a_w = block(s.hidden, s.n_actions);
  L.a_b = block(1, s.n_actions);
  return L;
}

struct Network {
  NetworkShape shape;
  Layout layout;
  Vec params;
};

inline Eigen::Map<const Mat> view(const Vec& p, const Block& b) {
  return {p.data() + b.offset, b.rows, b.cols};
}
inline Eigen::Map<Mat> view(Vec& p, const Block& b) { return {p.data() + b.offset, b.rows, b.cols}; }
inline Eigen::Map<const Row> row_view(const Vec& p, const Block& b) {
  return {p.data() + b.offset, static_cast<Eigen::Index>(b.size())};
}
inline Eigen::Map<Row> row_view(Vec& p, const Block& b) {
  return {p.data() + b.offset, static_cast<Eigen::Index>(b.size())};
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline void fill_uniform(Vec& p, const Block& b, double limit, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < b.size(); ++i) p[static_cast<Eigen::Index>(b.offset + i)] = (2.0 * uniform01(rng) - 1.0) * limit;
}

}  // namespace detail

// He-uniform weights for ReLU layers, zero biases, forget-gate bias 1.
inline Network make_network(const NetworkShape& shape, std::uint64_t seed) {
  Network net{shape, make_layout(shape), {}};
  const auto& L = net.layout;
  net.params = Vec::Zero(static_cast<Eigen::Index>(L.total));
  std::mt19937_64 rng(mix_seed(seed, 0x0DE7));
  auto he = [&](const Block& b) { detail::fill_uniform(net.params, b, std::sqrt(6.0 / b.rows), rng); };
  for (const auto& b : L.conv_w) he(b);
  he(L.img_w);
  he(L.pos_w);
  for (const auto& b : L.fuse_w) he(b);
  detail::fill_uniform(net.params, L.lstm_w, 1.0 / std::sqrt(static_cast<double>(shape.hidden)), rng);
  const int H = shape.hidden;
  for (int i = 0; i < H; ++i) net.params[static_cast<Eigen::Index>(L.lstm_b.offset + H + i)] = 1.0;
  detail::fill_uniform(net.params, L.v_w, 0.1 / std::sqrt(static_cast<double>(H)), rng);
  detail::fill_uniform(net.params, L.a_w, 0.1 / std::sqrt(static_cast<double>(H)), rng);
  return net;
}

struct Hidden {
  Row h;
  Row c;
  static Hidden zeros(int n) { return {Row::Zero(n), Row::Zero(n)}; }
  bool operator==(const Hidden&) const = default;
};

// Intermediate values of one forward step, kept for backpropagation.
struct StepCache {
  std::vector<Mat> patches;
  std::vector<Mat> conv_out;
  Row flat, img, pos_in, pos, concat;
  std::vector<Row> fuse;
  Row x_lstm, i, f, g, o, c_prev, c, tanh_c, h;
};

namespace detail {

// Activations are channel-major: column p holds the channels of pixel p,
// which matches the interleaved observation bytes.
inline Mat observation_matrix(const NetworkShape& s, const AgentObservation& obs) {
  if (obs.size != s.input_size || obs.matrix.size() != static_cast<std::size_t>(s.input_size) * s.input_size *
                                                           static_cast<std::size_t>(s.input_channels))
    throw std::invalid_argument("forward_q: observation does not match the network input shape");
  Mat x(s.input_channels, s.input_size * s.input_size);
  for (std::size_t i = 0; i < obs.matrix.size(); ++i) x.data()[i] = obs.matrix[i] / 255.0;
  return x;
}

inline Mat im2col(const Mat& x, int in, int k, int s, int out) {
  const int cin = static_cast<int>(x.rows());
  Mat p(k * k * cin, out * out);
  for (int oy = 0; oy < out; ++oy)
    for (int ox = 0; ox < out; ++ox) {
      double* dst = p.col(oy * out + ox).data();
      for (int ky = 0; ky < k; ++ky) {
        const double* src = x.col((oy * s + ky) * in + ox * s).data();
        std::copy(src, src + k * cin, dst + ky * k * cin);
      }
    }
  return p;
}

inline Mat col2im(const Mat& dp, int in, int cin, int k, int s, int out) {
  Mat dx = Mat::Zero(cin, in * in);
  for (int oy = 0; oy < out; ++oy)
    for (int ox = 0; ox < out; ++ox) {
      const double* src = dp.col(oy * out + ox).data();
      for (int ky = 0; ky < k; ++ky) {
        double* dst = dx.col((oy * s + ky) * in + ox * s).data();
        for (int i = 0; i < k * cin; ++i) dst[i] += src[ky * k * cin + i];
      }
    }
  return dx;
}

inline Row sigmoid(const Row& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }
inline Row relu(const Row& z) { return z.cwiseMax(0.0); }
inline Row relu_mask(const Row& y) { return (y.array() > 0.0).cast<double>().matrix(); }

}  // namespace detail

// One recurrent step; fills `cache` when given.
inline Vec forward_q(const Network& net, const AgentObservation& obs, Hidden& hidden, StepCache* cache = nullptr) {
  const auto& s = net.shape;
  const auto& L = net.layout;
  const auto& P = net.params;
  if (hidden.h.size() != s.hidden || hidden.c.size() != s.hidden)
    throw std::invalid_argument("forward_q: hidden state size mismatch");

  Mat x = detail::observation_matrix(s, obs);
  int in = s.input_size;
  StepCache local;
  StepCache& k = cache ? *cache : local;
  k.patches.clear();
  k.conv_out.clear();
  for (std::size_t l = 0; l < s.conv.size(); ++l) {
    const auto& c = s.conv[l];
    const int out = L.sizes[l];
    Mat p = detail::im2col(x, in, c.kernel, c.stride, out);
    Mat z = view(P, L.conv_w[l]).transpose() * p;
    z.colwise() += row_view(P, L.conv_b[l]).transpose();
    x = z.cwiseMax(0.0);
    if (cache) {
      k.patches.push_back(std::move(p));
      k.conv_out.push_back(x);
    }
    in = out;
  }
  Row flat = Eigen::Map<const Row>(x.data(), L.flat);

  Row img = detail::relu(flat * view(P, L.img_w) + row_view(P, L.img_b));
  Row pos_in(2);
  pos_in << obs.p0, obs.p1;
  Row pos = detail::relu(pos_in * view(P, L.pos_w) + row_view(P, L.pos_b));
  Row concat(img.size() + pos.size());
  concat << img, pos;
  k.fuse.clear();
  Row u = concat;
  for (int l = 0; l < s.n_fusion; ++l) {
    u = detail::relu(u * view(P, L.fuse_w[l]) + row_view(P, L.fuse_b[l]));
    if (cache) k.fuse.push_back(u);
  }

  const int H = s.hidden;
  Row xl(u.size() + H);
  xl << u, hidden.h;
  Row z = xl * view(P, L.lstm_w) + row_view(P, L.lstm_b);
  Row gi = detail::sigmoid(z.segment(0, H));
  Row gf = detail::sigmoid(z.segment(H, H));
  Row gg = z.segment(2 * H, H).array().tanh().matrix();
  Row go = detail::sigmoid(z.segment(3 * H, H));
  Row c = gf.cwiseProduct(hidden.c) + gi.cwiseProduct(gg);
  Row tc = c.array().tanh().matrix();
  Row h = go.cwiseProduct(tc);

  const double v = (h * view(P, L.v_w))(0, 0) + P[static_cast<Eigen::Index>(L.v_b.offset)];
  Row adv = h * view(P, L.a_w) + row_view(P, L.a_b);
  Vec q = (adv.array() - adv.mean() + v).matrix().transpose();

  if (cache) {
    k.flat = std::move(flat);
    k.img = std::move(img);
    k.pos_in = std::move(pos_in);
    k.pos = std::move(pos);
    k.concat = std::move(concat);
    k.x_lstm = std::move(xl);
    k.i = std::move(gi);
    k.f = std::move(gf);
    k.g = std::move(gg);
    k.o = std::move(go);
    k.c_prev = hidden.c;
    k.c = c;
    k.tanh_c = std::move(tc);
    k.h = h;
  }
  hidden.h = std::move(h);
  hidden.c = std::move(c);
  return q;
}

// Backward through one step. `dq` is dLoss/dQ for this step; dh/dc carry the
// gradient from the following step and are replaced by the gradient w.r.t.
// this step's incoming hidden state.
inline void backward_step(const Network& net, const StepCache& k, const Vec& dq, Row& dh, Row& dc, Vec& grad) {
  const auto& s = net.shape;
  const auto& L = net.layout;
  const auto& P = net.params;
  const int H = s.hidden;

  const double dv = dq.sum();
  const Row dadv = (dq.array() - dq.mean()).matrix().transpose();
  view(grad, L.v_w).noalias() += k.h.transpose() * dv;
  grad[static_cast<Eigen::Index>(L.v_b.offset)] += dv;
  view(grad, L.a_w).noalias() += k.h.transpose() * dadv;
  row_view(grad, L.a_b) += dadv;

  Row dhh = dh + dv * view(P, L.v_w).transpose() + dadv * view(P, L.a_w).transpose();
  const Row d_o = dhh.cwiseProduct(k.tanh_c);
  Row dcc = dc + dhh.cwiseProduct(k.o).cwiseProduct((1.0 - k.tanh_c.array().square()).matrix());
  const Row d_i = dcc.cwiseProduct(k.g);
  const Row d_g = dcc.cwiseProduct(k.i);
  const Row d_f = dcc.cwiseProduct(k.c_prev);
  dc = dcc.cwiseProduct(k.f);

  Row dz(4 * H);
  dz << d_i.cwiseProduct((k.i.array() * (1.0 - k.i.array())).matrix()),
      d_f.cwiseProduct((k.f.array() * (1.0 - k.f.array())).matrix()),
      d_g.cwiseProduct((1.0 - k.g.array().square()).matrix()),
      d_o.cwiseProduct((k.o.array() * (1.0 - k.o.array())).matrix());
  view(grad, L.lstm_w).noalias() += k.x_lstm.transpose() * dz;
  row_view(grad, L.lstm_b) += dz;
  const Row dxl = dz * view(P, L.lstm_w).transpose();
  Row du = dxl.segment(0, s.fc_fusion);
  dh = dxl.segment(s.fc_fusion, H);

  for (int l = s.n_fusion - 1; l >= 0; --l) {
    const Row& out = k.fuse[static_cast<std::size_t>(l)];
    const Row& in = l == 0 ? k.concat : k.fuse[static_cast<std::size_t>(l - 1)];
    const Row dpre = du.cwiseProduct(detail::relu_mask(out));
    view(grad, L.fuse_w[l]).noalias() += in.transpose() * dpre;
    row_view(grad, L.fuse_b[l]) += dpre;
    du = dpre * view(P, L.fuse_w[l]).transpose();
  }

  const Row dpos = du.segment(s.fc_image, s.fc_position).cwiseProduct(detail::relu_mask(k.pos));
  view(grad, L.pos_w).noalias() += k.pos_in.transpose() * dpos;
  row_view(grad, L.pos_b) += dpos;

  const Row dimg = du.segment(0, s.fc_image).cwiseProduct(detail::relu_mask(k.img));
  view(grad, L.img_w).noalias() += k.flat.transpose() * dimg;
  row_view(grad, L.img_b) += dimg;
  const Row dflat = dimg * view(P, L.img_w).transpose();

  const std::size_t n_conv = s.conv.size();
  const Mat& last = k.conv_out.back();
  Mat dy = Eigen::Map<const Mat>(dflat.data(), last.rows(), last.cols());

  for (std::size_t l = n_conv; l-- > 0;) {
    const Mat dzc = dy.cwiseProduct((k.conv_out[l].array() > 0.0).cast<double>().matrix());
    view(grad, L.conv_w[l]).noalias() += k.patches[l] * dzc.transpose();
    row_view(grad, L.conv_b[l]) += dzc.rowwise().sum().transpose();
    if (l == 0) break;
    const Mat dp = view(P, L.conv_w[l]) * dzc;
    const auto& c = s.conv[l];
    dy = detail::col2im(dp, L.sizes[l - 1], s.conv[l - 1].channels, c.kernel, c.stride, L.sizes[l]);
  }
}

// ---------------------------------------------------------------------------
// Double-Q targets and the TD loss

inline int greedy_action(const Vec& q) {
  int best = 0;
  for (int a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

// y = r when terminal, otherwise r + gamma * Q_target(s', argmax_a Q_online(s', a)).
inline double double_q_target(double r, bool terminal, double gamma, const Vec& q_online_next, const Vec& q_target_next) {
  if (terminal) return r;
  return r + gamma * q_target_next[greedy_action(q_online_next)];
}

// A stored sub-sequence: obs has one more entry than actions.
struct SequenceRef {
  std::vector<const AgentObservation*> obs;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminal;

  std::size_t length() const { return actions.size(); }
};

inline std::vector<Vec> forward_sequence(const Network& net, std::span<const AgentObservation* const> obs,
                                         std::vector<StepCache>* caches = nullptr) {
  Hidden hidden = Hidden::zeros(net.shape.hidden);
  std::vector<Vec> qs;
  qs.reserve(obs.size());
  if (caches) caches->assign(obs.size(), {});
  for (std::size_t t = 0; t < obs.size(); ++t)
    qs.push_back(forward_q(net, *obs[t], hidden, caches ? &(*caches)[t] : nullptr));
  return qs;
}

// Recurrent state is threaded along the sequence from a zero start in both nets.
inline std::vector<double> td_targets_double_q(const SequenceRef& seq, const Network& online, const Network& target,
                                               double gamma) {
  if (seq.obs.size() != seq.length() + 1) throw std::invalid_argument("td targets: malformed sequence");
  const auto q_on = forward_sequence(online, seq.obs);
  const auto q_tg = forward_sequence(target, seq.obs);
  std::vector<double> y(seq.length());
  for (std::size_t t = 0; t < seq.length(); ++t)
    y[t] = double_q_target(seq.rewards[t], seq.terminal[t] != 0, gamma, q_on[t + 1], q_tg[t + 1]);
  return y;
}

struct LossAndGradient {
  double loss = 0.0;
  Vec grad;
  std::size_t count = 0;
};

// 0.5 * mean squared TD error over all transitions of the batch, with fixed targets.
inline LossAndGradient td_loss_gradient(const Network& net, std::span<const SequenceRef> batch,
                                        std::span<const std::vector<double>> targets) {
  LossAndGradient out;
  out.grad = Vec::Zero(net.params.size());
  for (const auto& seq : batch) out.count += seq.length();
  if (out.count == 0) throw std::invalid_argument("td loss: empty batch");
  const double scale = 1.0 / static_cast<double>(out.count);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& seq = batch[b];
    const std::size_t T = seq.length();
    std::vector<StepCache> caches;
    const auto qs = forward_sequence(net, std::span(seq.obs.data(), T), &caches);
    std::vector<Vec> dqs(T, Vec::Zero(net.shape.n_actions));
    for (std::size_t t = 0; t < T; ++t) {
      const double err = qs[t][seq.actions[t]] - targets[b][t];
      out.loss += 0.5 * err * err * scale;
      dqs[t][seq.actions[t]] = err * scale;
    }
    Row dh = Row::Zero(net.shape.hidden), dc = Row::Zero(net.shape.hidden);
    for (std::size_t t = T; t-- > 0;) backward_step(net, caches[t], dqs[t], dh, dc, out.grad);
  }
  return out;
}

// Same loss with double-Q targets computed on the fly; the online forward pass
// over the sequence is shared between prediction and action selection.
inline LossAndGradient double_q_loss_gradient(const Network& online, const Network& target,
                                              std::span<const SequenceRef> batch, double gamma) {
  LossAndGradient out;
  out.grad = Vec::Zero(online.params.size());
  for (const auto& seq : batch) out.count += seq.length();
  if (out.count == 0) throw std::invalid_argument("td loss: empty batch");
  const double scale = 1.0 / static_cast<double>(out.count);
  for (const auto& seq : batch) {
    const std::size_t T = seq.length();
    if (seq.obs.size() != T + 1) throw std::invalid_argument("td loss: malformed sequence");
    std::vector<StepCache> caches;
    const auto q_on = forward_sequence(online, seq.obs, &caches);
    const auto q_tg = forward_sequence(target, seq.obs);
    std::vector<Vec> dqs(T, Vec::Zero(online.shape.n_actions));
    for (std::size_t t = 0; t < T; ++t) {
      const double y = double_q_target(seq.rewards[t], seq.terminal[t] != 0, gamma, q_on[t + 1], q_tg[t + 1]);
      const double err = q_on[t][seq.actions[t]] - y;
      out.loss += 0.5 * err * err * scale;
      dqs[t][seq.actions[t]] = err * scale;
    }
    Row dh = Row::Zero(online.shape.hidden), dc = Row::Zero(online.shape.hidden);
    for (std::size_t t = T; t-- > 0;) backward_step(online, caches[t], dqs[t], dh, dc, out.grad);
  }
  return out;
}

inline double td_loss(const Network& net, std::span<const SequenceRef> batch,
                      std::span<const std::vector<double>> targets) {
  std::size_t count = 0;
  for (const auto& seq : batch) count += seq.length();
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto qs = forward_sequence(net, std::span(batch[b].obs.data(), batch[b].length()));
    for (std::size_t t = 0; t < batch[b].length(); ++t) {
      const double err = qs[t][batch[b].actions[t]] - targets[b][t];
      loss += 0.5 * err * err;
    }
  }
  return loss / static_cast<double>(count);
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_norm = 0.0;
};

// Central finite differences over every parameter.
inline GradientCheckResult gradient_check(Network net, std::span<const SequenceRef> batch,
                                          std::span<const std::vector<double>> targets, double h = 1e-5) {
  const auto analytic = td_loss_gradient(net, batch, targets);
  GradientCheckResult r;
  r.analytic_norm = analytic.grad.norm();
  for (Eigen::Index i = 0; i < net.params.size(); ++i) {
    const double saved = net.params[i];
    net.params[i] = saved + h;
    const double up = td_loss(net, batch, targets);
    net.params[i] = saved - h;
    const double down = td_loss(net, batch, targets);
    net.params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.grad[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    if (rel > r.max_relative_error) {
      r.max_relative_error = rel;
      r.worst_index = static_cast<std::size_t>(i);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayEpisode {
  std::vector<AgentObservation> obs;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminal;

  std::size_t transitions() const { return actions.size(); }
};

// Whole episodes, oldest evicted first once the transition count exceeds
// capacity. The most recent episode may still be open.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int seq_len) : capacity_(capacity), seq_len_(seq_len) {
    if (capacity == 0 || seq_len < 1) throw std::invalid_argument("replay: capacity and sequence length must be positive");
  }

  void begin_episode(AgentObservation first) {
    episodes_.push_back({});
    episodes_.back().obs.push_back(std::move(first));
  }

  void add(int action, double reward, bool terminal, AgentObservation next) {
    if (episodes_.empty()) throw std::logic_error("replay: add before begin_episode");
    auto& ep = episodes_.back();
    ep.actions.push_back(action);
    ep.rewards.push_back(reward);
    ep.terminal.push_back(terminal ? 1 : 0);
    ep.obs.push_back(std::move(next));
    ++size_;
    while (size_ > capacity_ && episodes_.size() > 1) {
      size_ -= episodes_.front().transitions();
      episodes_.pop_front();
    }
  }

  std::size_t size() const { return size_; }
  std::size_t episode_count() const { return episodes_.size(); }
  const std::deque<ReplayEpisode>& episodes() const { return episodes_; }

  // Transition-uniform draw of a start; the window is shifted back to fit
  // inside its episode and shortened only when the episode itself is shorter.
  std::vector<SequenceRef> sample(std::size_t batch, std::mt19937_64& rng) const {
    if (size_ == 0) throw std::logic_error("replay: sample from an empty buffer");
    std::vector<SequenceRef> out;
    out.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      std::size_t idx = rng() % size_;
      std::size_t e = 0;
      while (idx >= episodes_[e].transitions()) idx -= episodes_[e++].transitions();
      const auto& ep = episodes_[e];
      const std::size_t L = std::min<std::size_t>(seq_len_, ep.transitions());
      const std::size_t start = std::min(idx, ep.transitions() - L);
      SequenceRef s;
      for (std::size_t t = start; t <= start + L; ++t) s.obs.push_back(&ep.obs[t]);
      s.actions.assign(ep.actions.begin() + start, ep.actions.begin() + start + L);
      s.rewards.assign(ep.rewards.begin() + start, ep.rewards.begin() + start + L);
      s.terminal.assign(ep.terminal.begin() + start, ep.terminal.begin() + start + L);
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  std::size_t capacity_;
  int seq_len_;
  std::size_t size_ = 0;
  std::deque<ReplayEpisode> episodes_;
};

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double gamma = 0.99;
  double learning_rate = 0.01;
  double eps_start = 1.0;
  double eps_end = 0.1;
  std::int64_t eps_anneal_steps = 50000;
  std::int64_t target_sync = 2500;
  int batch_size = 8;
  int seq_len = 8;
  std::int64_t replay_capacity = 100000;
  int episodes = 1000;
  std::int64_t warmup_steps = 1000;
  int train_every = 4;
  double grad_clip = 10.0;
  ScalePreset preset = ScalePreset::full;
  std::uint64_t seed = 1;
  bool operator==(const TrainConfig&) const = default;
};

inline void validate(const TrainConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ConfigError("agent: gamma must lie in [0, 1)");
  if (!(c.eps_start >= 0.0 && c.eps_start <= 1.0 && c.eps_end >= 0.0 && c.eps_end <= 1.0))
    throw ConfigError("agent: epsilon must lie in [0, 1]");
  if (!(c.learning_rate > 0.0)) throw ConfigError("agent: learning_rate must be positive");
  if (c.eps_anneal_steps < 1 || c.target_sync < 1 || c.batch_size < 1 || c.seq_len < 1 || c.replay_capacity < 1 ||
      c.episodes < 0 || c.warmup_steps < 0 || c.train_every < 1 || !(c.grad_clip > 0.0))
    throw ConfigError("agent: counts must be positive");
  if (c.preset == ScalePreset::custom) throw ConfigError("agent: preset must be full or mini");
}

inline double epsilon_at(const TrainConfig& c, std::int64_t step) {
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(c.eps_anneal_steps));
  return c.eps_start + (c.eps_end - c.eps_start) * frac;
}

// Greedy with probability 1 - eps, uniform otherwise; ties go to the lowest id.
// The hidden state always advances.
inline std::pair<int, Vec> act(const Network& net, const AgentObservation& obs, Hidden& hidden, double eps,
                               std::mt19937_64& rng) {
  Vec q = forward_q(net, obs, hidden);
  const double u = detail::uniform01(rng);
  if (u < eps) return {static_cast<int>(rng() % static_cast<std::uint64_t>(net.shape.n_actions)), q};
  return {greedy_action(q), q};
}

struct AgentCheckpoint {
  TrainConfig config;
  Network online;
  Network target;
  std::string rng_state;
  std::int64_t episodes_done = 0;
  std::int64_t env_steps = 0;
  std::int64_t sgd_steps = 0;
};

inline std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline std::mt19937_64 rng_from_string(const std::string& s) {
  std::mt19937_64 rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw IoError("checkpoint: corrupt RNG state");
  return rng;
}

inline AgentCheckpoint fresh_checkpoint(const TrainConfig& cfg) {
  validate(cfg);
  AgentCheckpoint ck;
  ck.config = cfg;
  ck.online = make_network(shape_for(cfg.preset), cfg.seed);
  ck.target = ck.online;
  ck.rng_state = rng_to_string(std::mt19937_64(mix_seed(cfg.seed, 0xAC7)));
  return ck;
}

// One SGD step on a sampled batch; returns the batch loss.
inline double sgd_step(AgentCheckpoint& ck, const ReplayBuffer& replay, std::mt19937_64& rng) {
  const auto batch = replay.sample(static_cast<std::size_t>(ck.config.batch_size), rng);
  auto lg = double_q_loss_gradient(ck.online, ck.target, batch, ck.config.gamma);
  const double norm = lg.grad.norm();
  if (norm > ck.config.grad_clip) lg.grad *= ck.config.grad_clip / norm;
  ck.online.params -= ck.config.learning_rate * lg.grad;
  ++ck.sgd_steps;
  return lg.loss;
}

struct EpisodeLog {
  std::int64_t episode = 0;
  std::uint64_t scene_seed = 0;
  bool win = false;
  int steps = 0;
  double t_elapsed = 0.0;
  int interactions = 0;
  double mean_loss = std::numeric_limits<double>::quiet_NaN();  // NaN before the first SGD step
  double epsilon = 0.0;
  double final_ap = 0.0;
};

inline std::uint64_t training_scene_seed(std::uint64_t seed, std::int64_t episode) {
  return mix_seed(mix_seed(seed, 0x7EA1), static_cast<std::uint64_t>(episode));
}

// Runs episodes until `ck.config.episodes` are done, continuing from the
// checkpoint's counters. The replay buffer lives only for this call.
inline void train_agent(CuriosityEnv& env, AgentCheckpoint& ck,
                        const std::function<void(const EpisodeLog&, const AgentCheckpoint&)>& on_episode = {}) {
  const auto& cfg = ck.config;
  validate(cfg);
  if (env.config().episode.mode != EpisodeMode::train) throw std::invalid_argument("train_agent: env must be in train mode");
  std::mt19937_64 rng = rng_from_string(ck.rng_state);
  ReplayBuffer replay(static_cast<std::size_t>(cfg.replay_capacity), cfg.seq_len);

  while (ck.episodes_done < cfg.episodes) {
    EpisodeLog log;
    log.episode = ck.episodes_done;
    log.scene_seed = training_scene_seed(cfg.seed, ck.episodes_done);
    AgentObservation obs = env.reset(log.scene_seed);
    replay.begin_episode(obs);
    Hidden hidden = Hidden::zeros(ck.online.shape.hidden);
    double loss_sum = 0.0;
    int loss_count = 0;
    while (!env.done()) {
      const double eps = epsilon_at(cfg, ck.env_steps);
      const int a = act(ck.online, obs, hidden, eps, rng).first;
      auto [next, out] = env.step(action_from_id(a));
      replay.add(a, out.rewards.r_total, out.win, next);
      obs = std::move(next);
      ++ck.env_steps;
      log.interactions += out.user_interaction;
      log.epsilon = eps;
      if (ck.env_steps >= cfg.warmup_steps && ck.env_steps % cfg.train_every == 0) {
        loss_sum += sgd_step(ck, replay, rng);
        ++loss_count;
      }
      if (ck.env_steps % cfg.target_sync == 0) ck.target.params = ck.online.params;
      if (out.done) {
        log.win = out.win;
        log.steps = out.step;
        log.t_elapsed = out.t_elapsed;
        log.final_ap = out.ap;
      }
    }
    if (loss_count > 0) log.mean_loss = loss_sum / loss_count;
    ++ck.episodes_done;
    ck.rng_state = rng_to_string(rng);
    if (on_episode) on_episode(log, ck);
  }
}

// ---------------------------------------------------------------------------
// Checkpoint files

inline constexpr std::uint32_t kCheckpointMagic = 0x4E514443;  // "CDQN"
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_shape(std::ostream& os, const NetworkShape& s) {
  using binio::write;
  write<std::int32_t>(os, s.input_size);
  write<std::int32_t>(os, s.input_channels);
  write<std::int32_t>(os, static_cast<std::int32_t>(s.conv.size()));
  for (const auto& c : s.conv) {
    write<std::int32_t>(os, c.channels);
    write<std::int32_t>(os, c.kernel);
    write<std::int32_t>(os, c.stride);
  }
  for (int v : {s.fc_image, s.fc_position, s.fc_fusion, s.n_fusion, s.hidden, s.n_actions})
    write<std::int32_t>(os, v);
}

inline NetworkShape read_shape(std::istream& is) {
  using binio::read;
  NetworkShape s;
  s.input_size = read<std::int32_t>(is);
  s.input_channels = read<std::int32_t>(is);
  const int n = read<std::int32_t>(is);
  if (n < 1 || n > 16) throw IoError("checkpoint: bad conv layer count");
  s.conv.resize(static_cast<std::size_t>(n));
  for (auto& c : s.conv) {
    c.channels = read<std::int32_t>(is);
    c.kernel = read<std::int32_t>(is);
    c.stride = read<std::int32_t>(is);
  }
  for (int* v : {&s.fc_image, &s.fc_position, &s.fc_fusion, &s.n_fusion, &s.hidden, &s.n_actions})
    *v = read<std::int32_t>(is);
  return s;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const AgentCheckpoint& ck) {
  using binio::write;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write<std::uint32_t>(os, kCheckpointMagic);
  write<std::uint32_t>(os, kCheckpointVersion);
  write<std::uint32_t>(os, static_cast<std::uint32_t>(ck.config.preset));
  detail::write_shape(os, ck.online.shape);
  const auto& c = ck.config;
  for (double v : {c.gamma, c.learning_rate, c.eps_start, c.eps_end, c.grad_clip}) write<double>(os, v);
  for (std::int64_t v : {c.eps_anneal_steps, c.target_sync, c.replay_capacity, c.warmup_steps}) write<std::int64_t>(os, v);
  for (int v : {c.batch_size, c.seq_len, c.episodes, c.train_every}) write<std::int32_t>(os, v);
  write<std::uint64_t>(os, c.seed);
  binio::write_string(os, ck.rng_state);
  write<std::int64_t>(os, ck.episodes_done);
  write<std::int64_t>(os, ck.env_steps);
  write<std::int64_t>(os, ck.sgd_steps);
  write<std::uint64_t>(os, static_cast<std::uint64_t>(ck.online.params.size()));
  binio::write_doubles(os, ck.online.params.data(), static_cast<std::size_t>(ck.online.params.size()));
  binio::write_doubles(os, ck.target.params.data(), static_cast<std::size_t>(ck.target.params.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

inline AgentCheckpoint load_checkpoint(const std::filesystem::path& path) {
  using binio::read;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  if (read<std::uint32_t>(is) != kCheckpointMagic) throw IoError("not an agent checkpoint: " + path.string());
  if (read<std::uint32_t>(is) != kCheckpointVersion) throw IoError("unsupported checkpoint version: " + path.string());
  AgentCheckpoint ck;
  auto& c = ck.config;
  c.preset = static_cast<ScalePreset>(read<std::uint32_t>(is));
  const NetworkShape shape = detail::read_shape(is);
  if (c.preset != ScalePreset::custom && shape != shape_for(c.preset))
    throw IoError("checkpoint: network shape does not match its preset");
  for (double* v : {&c.gamma, &c.learning_rate, &c.eps_start, &c.eps_end, &c.grad_clip}) *v = read<double>(is);
  for (std::int64_t* v : {&c.eps_anneal_steps, &c.target_sync, &c.replay_capacity, &c.warmup_steps})
    *v = read<std::int64_t>(is);
  for (int* v : {&c.batch_size, &c.seq_len, &c.episodes, &c.train_every}) *v = read<std::int32_t>(is);
  c.seed = read<std::uint64_t>(is);
  ck.rng_state = binio::read_string(is);
  ck.episodes_done = read<std::int64_t>(is);
  ck.env_steps = read<std::int64_t>(is);
  ck.sgd_steps = read<std::int64_t>(is);
  const auto n = read<std::uint64_t>(is);
  ck.online = Network{shape, make_layout(shape), {}};
  if (n != ck.online.layout.total) throw IoError("checkpoint: parameter count mismatch");
  ck.online.params.resize(static_cast<Eigen::Index>(n));
  binio::read_doubles(is, ck.online.params.data(), n);
  ck.target = ck.online;
  binio::read_doubles(is, ck.target.params.data(), n);
  rng_from_string(ck.rng_state);
  return ck;
}

}  // namespace curiosity::nn
