#include "glsda/model.hpp"

#include <cmath>
#include <fstream>

#include "glsda/binary_io.hpp"
#include "glsda/errors.hpp"
#include "glsda/rng.hpp"

namespace glsda {

namespace {

constexpr char kCheckpointMagic[4] = {'G', 'L', 'S', 'D'};
constexpr std::uint32_t kCheckpointVersion = 1;

void fill_glorot(Rng& rng, std::vector<double>& w, std::size_t fan_in,
                 std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : w) v = rng.uniform(-bound, bound);
}

ConvLayer make_conv(std::size_t kernel, std::size_t in_ch, std::size_t out_ch) {
  ConvLayer layer;
  layer.kernel = kernel;
  layer.in_ch = in_ch;
  layer.out_ch = out_ch;
  layer.w.assign(kernel * in_ch * out_ch, 0.0);
  layer.b.assign(out_ch, 0.0);
  layer.gw.assign(layer.w.size(), 0.0);
  layer.gb.assign(layer.b.size(), 0.0);
  return layer;
}

LinearLayer make_linear(std::size_t in, std::size_t out) {
  LinearLayer layer;
  layer.in = in;
  layer.out = out;
  layer.w.assign(in * out, 0.0);
  layer.b.assign(out, 0.0);
  layer.gw.assign(layer.w.size(), 0.0);
  layer.gb.assign(layer.b.size(), 0.0);
  return layer;
}

// out[t][o] = tanh(sum_k sum_i w[k][i][o] * x[stride*t + k][i] + b[o])
Matrix conv_forward(const ConvLayer& layer, const Matrix& x) {
  const std::size_t t_out = conv_out_len(x.rows, layer.kernel, kStride);
  Matrix out(t_out, layer.out_ch);
  for (std::size_t t = 0; t < t_out; ++t) {
    double* out_row = out.row(t);
    for (std::size_t o = 0; o < layer.out_ch; ++o) out_row[o] = layer.b[o];
    for (std::size_t k = 0; k < layer.kernel; ++k) {
      const double* x_row = x.row(t * kStride + k);
      const double* w_k = layer.w.data() + k * layer.in_ch * layer.out_ch;
      for (std::size_t i = 0; i < layer.in_ch; ++i) {
        const double xv = x_row[i];
        const double* w_ki = w_k + i * layer.out_ch;
        for (std::size_t o = 0; o < layer.out_ch; ++o) {
          out_row[o] += xv * w_ki[o];
        }
      }
    }
    for (std::size_t o = 0; o < layer.out_ch; ++o) out_row[o] = std::tanh(out_row[o]);
  }
  return out;
}

// Backward through conv + tanh. `act` is the post-tanh output, `grad_act`
// the gradient at that output. Returns the gradient at the input when
// `want_input_grad` is set.
Matrix conv_backward(ConvLayer& layer, const Matrix& x, const Matrix& act,
                     const Matrix& grad_act, bool want_input_grad) {
  Matrix grad_x;
  if (want_input_grad) grad_x = Matrix(x.rows, x.cols);
  for (std::size_t t = 0; t < act.rows; ++t) {
    const double* act_row = act.row(t);
    const double* g_row = grad_act.row(t);
    for (std::size_t o = 0; o < layer.out_ch; ++o) {
      const double g_pre = g_row[o] * (1.0 - act_row[o] * act_row[o]);
      if (g_pre == 0.0) continue;
      layer.gb[o] += g_pre;
      for (std::size_t k = 0; k < layer.kernel; ++k) {
        const double* x_row = x.row(t * kStride + k);
        double* gw_k = layer.gw.data() + k * layer.in_ch * layer.out_ch;
        for (std::size_t i = 0; i < layer.in_ch; ++i) {
          gw_k[i * layer.out_ch + o] += x_row[i] * g_pre;
        }
        if (want_input_grad) {
          const double* w_k = layer.w.data() + k * layer.in_ch * layer.out_ch;
          double* gx_row = grad_x.row(t * kStride + k);
          for (std::size_t i = 0; i < layer.in_ch; ++i) {
            gx_row[i] += w_k[i * layer.out_ch + o] * g_pre;
          }
        }
      }
    }
  }
  return grad_x;
}

void write_tensor(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_le<double>(out, v);
}

void read_tensor(std::istream& in, std::span<double> values) {
  for (double& v : values) v = read_le<double>(in, "checkpoint tensor");
}

}  // namespace

void ModelState::zero_grad() {
  auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
  zero(conv1.gw);
  zero(conv1.gb);
  zero(conv2.gw);
  zero(conv2.gb);
  zero(proj.gw);
  zero(proj.gb);
  zero(cls.gw);
  zero(cls.gb);
}

std::vector<std::span<double>> ModelState::parameters() {
  return {conv1.w, conv1.b, conv2.w, conv2.b, proj.w, proj.b, cls.w, cls.b};
}

std::vector<std::span<double>> ModelState::gradients() {
  return {conv1.gw, conv1.gb, conv2.gw, conv2.gb, proj.gw, proj.gb, cls.gw, cls.gb};
}

std::vector<std::span<const double>> ModelState::parameters() const {
  return {conv1.w, conv1.b, conv2.w, conv2.b, proj.w, proj.b, cls.w, cls.b};
}

void ModelState::validate_finite() const {
  for (const auto& tensor : parameters()) {
    for (double v : tensor) {
      if (!std::isfinite(v)) throw NumericError("non-finite model parameter");
    }
  }
}

ModelState init_params(std::uint64_t seed, std::size_t in_channels, std::size_t d,
                       std::size_t num_classes) {
  if (in_channels == 0 || d == 0 || num_classes == 0) {
    throw UsageError("init_params: dimensions must be positive");
  }
  ModelState state;
  state.conv1 = make_conv(kKernel, in_channels, kConv1Out);
  state.conv2 = make_conv(kKernel, kConv1Out, kConv2Out);
  state.proj = make_linear(kConv2Out, d);
  state.cls = make_linear(d, num_classes);

  Rng rng(seed);
  fill_glorot(rng, state.conv1.w, kKernel * in_channels, kKernel * kConv1Out);
  fill_glorot(rng, state.conv2.w, kKernel * kConv1Out, kKernel * kConv2Out);
  fill_glorot(rng, state.proj.w, kConv2Out, d);
  fill_glorot(rng, state.cls.w, d, num_classes);
  return state;
}

ForwardRecord forward(const ModelState& state, const Matrix& feature) {
  if (feature.cols != state.in_channels()) {
    throw UsageError("forward: feature has " + std::to_string(feature.cols) +
                     " channels, model expects " +
                     std::to_string(state.in_channels()));
  }
  if (feature.rows < kMinTimeLen) {
    throw UsageError("forward: need time length >= " + std::to_string(kMinTimeLen));
  }
  for (double v : feature.data) {
    if (!std::isfinite(v)) throw DataError("forward: non-finite input");
  }

  ForwardRecord rec;
  rec.input = feature;
  rec.act1 = conv_forward(state.conv1, rec.input);
  rec.act2 = conv_forward(state.conv2, rec.act1);

  const std::size_t t2 = rec.act2.rows;
  const std::size_t d = state.proj.out;
  rec.segments = Matrix(t2, d);
  for (std::size_t t = 0; t < t2; ++t) {
    const double* h = rec.act2.row(t);
    double* z = rec.segments.row(t);
    for (std::size_t j = 0; j < d; ++j) z[j] = state.proj.b[j];
    for (std::size_t c = 0; c < state.proj.in; ++c) {
      const double hv = h[c];
      const double* w_c = state.proj.w.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) z[j] += hv * w_c[j];
    }
  }

  rec.pooled.assign(d, 0.0);
  for (std::size_t t = 0; t < t2; ++t) {
    const double* z = rec.segments.row(t);
    for (std::size_t j = 0; j < d; ++j) rec.pooled[j] += z[j];
  }
  for (std::size_t j = 0; j < d; ++j) rec.pooled[j] /= static_cast<double>(t2);

  const std::size_t n_cls = state.cls.out;
  rec.logits.assign(n_cls, 0.0);
  for (std::size_t c = 0; c < n_cls; ++c) rec.logits[c] = state.cls.b[c];
  for (std::size_t j = 0; j < d; ++j) {
    const double zv = rec.pooled[j];
    const double* w_j = state.cls.w.data() + j * n_cls;
    for (std::size_t c = 0; c < n_cls; ++c) rec.logits[c] += zv * w_j[c];
  }
  return rec;
}

void backward(ModelState& state, const ForwardRecord& record,
              const Matrix& grad_segments, std::span<const double> grad_pooled,
              std::span<const double> grad_logits) {
  const std::size_t t2 = record.segments.rows;
  const std::size_t d = state.proj.out;
  const std::size_t n_cls = state.cls.out;
  if (grad_segments.data.size() &&
      !(grad_segments.rows == t2 && grad_segments.cols == d)) {
    throw UsageError("backward: grad_segments shape mismatch");
  }
  if (!grad_pooled.empty() && grad_pooled.size() != d) {
    throw UsageError("backward: grad_pooled size mismatch");
  }
  if (!grad_logits.empty() && grad_logits.size() != n_cls) {
    throw UsageError("backward: grad_logits size mismatch");
  }

  // Classifier head; its input gradient joins the pooled gradient.
  std::vector<double> g_pooled(grad_pooled.begin(), grad_pooled.end());
  g_pooled.resize(d, 0.0);
  if (!grad_logits.empty()) {
    for (std::size_t c = 0; c < n_cls; ++c) state.cls.gb[c] += grad_logits[c];
    for (std::size_t j = 0; j < d; ++j) {
      const double zv = record.pooled[j];
      double* gw_j = state.cls.gw.data() + j * n_cls;
      const double* w_j = state.cls.w.data() + j * n_cls;
      double acc = 0.0;
      for (std::size_t c = 0; c < n_cls; ++c) {
        gw_j[c] += zv * grad_logits[c];
        acc += w_j[c] * grad_logits[c];
      }
      g_pooled[j] += acc;
    }
  }

  // Mean pooling spreads the pooled gradient evenly over segments.
  Matrix g_segments(t2, d);
  if (grad_segments.data.size()) g_segments = grad_segments;
  const double inv_t2 = 1.0 / static_cast<double>(t2);
  for (std::size_t t = 0; t < t2; ++t) {
    double* g = g_segments.row(t);
    for (std::size_t j = 0; j < d; ++j) g[j] += g_pooled[j] * inv_t2;
  }

  // Projection head.
  Matrix g_act2(t2, state.proj.in);
  for (std::size_t t = 0; t < t2; ++t) {
    const double* h = record.act2.row(t);
    const double* gz = g_segments.row(t);
    double* gh = g_act2.row(t);
    for (std::size_t j = 0; j < d; ++j) state.proj.gb[j] += gz[j];
    for (std::size_t c = 0; c < state.proj.in; ++c) {
      const double hv = h[c];
      double* gw_c = state.proj.gw.data() + c * d;
      const double* w_c = state.proj.w.data() + c * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        gw_c[j] += hv * gz[j];
        acc += w_c[j] * gz[j];
      }
      gh[c] = acc;
    }
  }

  const Matrix g_act1 =
      conv_backward(state.conv2, record.act1, record.act2, g_act2, true);
  conv_backward(state.conv1, record.input, record.act1, g_act1, false);
}

// --- checkpoint io -------------------------------------------------------------

void save_checkpoint(const ModelState& state, const std::filesystem::path& dest) {
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + dest.string());
  out.write(kCheckpointMagic, 4);
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.conv1.in_ch));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.conv1.out_ch));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.conv2.out_ch));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.proj.out));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.cls.out));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.conv1.kernel));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.conv2.kernel));
  for (const auto& tensor : state.parameters()) write_tensor(out, tensor);
  if (!out) throw DataError("failed to write checkpoint");
}

ModelState load_checkpoint(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + source.string());
  expect_magic(in, kCheckpointMagic, "GLSD checkpoint");
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto in_ch = read_le<std::uint32_t>(in, "in_channels");
  const auto c1_out = read_le<std::uint32_t>(in, "conv1_out");
  const auto c2_out = read_le<std::uint32_t>(in, "conv2_out");
  const auto d = read_le<std::uint32_t>(in, "embed_dim");
  const auto n_cls = read_le<std::uint32_t>(in, "num_classes");
  const auto k1 = read_le<std::uint32_t>(in, "kernel1");
  const auto k2 = read_le<std::uint32_t>(in, "kernel2");
  if (in_ch == 0 || c1_out == 0 || c2_out == 0 || d == 0 || n_cls == 0 ||
      k1 == 0 || k2 == 0) {
    throw DataError("checkpoint dims invalid");
  }

  ModelState state;
  state.conv1 = make_conv(k1, in_ch, c1_out);
  state.conv2 = make_conv(k2, c1_out, c2_out);
  state.proj = make_linear(c2_out, d);
  state.cls = make_linear(d, n_cls);
  for (auto tensor : state.parameters()) read_tensor(in, tensor);
  state.validate_finite();
  return state;
}

}  // namespace glsda
