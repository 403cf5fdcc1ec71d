#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glsda/matrix.hpp"

namespace glsda {

inline constexpr std::size_t kKernel = 5;
inline constexpr std::size_t kStride = 2;
inline constexpr std::size_t kConv1Out = 32;
inline constexpr std::size_t kConv2Out = 64;

// Valid (no padding) convolution output length.
inline std::size_t conv_out_len(std::size_t n, std::size_t kernel = kKernel,
                                std::size_t stride = kStride) {
  return n < kernel ? 0 : (n - kernel) / stride + 1;
}

// Minimum input length that leaves at least two temporal positions after
// both convolutions (required by the temporal consistency loss).
inline constexpr std::size_t kMinTimeLen = 25;

struct ConvLayer {
  std::size_t kernel{0}, in_ch{0}, out_ch{0};
  std::vector<double> w;   // [kernel][in_ch][out_ch]
  std::vector<double> b;   // [out_ch]
  std::vector<double> gw;  // gradient buffers, shape-identical
  std::vector<double> gb;

  double weight(std::size_t k, std::size_t i, std::size_t o) const {
    return w[(k * in_ch + i) * out_ch + o];
  }
};

struct LinearLayer {
  std::size_t in{0}, out{0};
  std::vector<double> w;  // [in][out]
  std::vector<double> b;  // [out]
  std::vector<double> gw;
  std::vector<double> gb;
};

// Student encoder: conv1 (k5 s2) -> tanh -> conv2 (k5 s2) -> tanh ->
// per-position projection head -> mean pool -> classifier head.
struct ModelState {
  ConvLayer conv1;  // in_channels -> 32
  ConvLayer conv2;  // 32 -> 64
  LinearLayer proj;  // 64 -> d, semantic head
  LinearLayer cls;   // d -> C, classifier head

  std::size_t in_channels() const { return conv1.in_ch; }
  std::size_t embed_dim() const { return proj.out; }
  std::size_t num_classes() const { return cls.out; }

  void zero_grad();

  // Parameter / gradient tensors in checkpoint order:
  // conv1.w, conv1.b, conv2.w, conv2.b, proj.w, proj.b, cls.w, cls.b.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<double>> gradients();
  std::vector<std::span<const double>> parameters() const;

  void validate_finite() const;
};

struct ForwardRecord {
  Matrix input;     // [T x in_channels], cached for backward
  Matrix act1;      // post-tanh conv1 output [T1 x 32]
  Matrix act2;      // post-tanh conv2 output [T2 x 64]
  Matrix segments;  // z^t, [T2 x d]
  std::vector<double> pooled;  // z_CSI, mean over segments
  std::vector<double> logits;  // p_CSI

  std::size_t seq_len() const { return segments.rows; }
};

ModelState init_params(std::uint64_t seed, std::size_t in_channels, std::size_t d,
                       std::size_t num_classes);

ForwardRecord forward(const ModelState& state, const Matrix& feature);

// Exact reverse-mode gradients of forward, accumulated (+=) into the
// state's gradient buffers. Incoming gradients may be empty to mean zero.
void backward(ModelState& state, const ForwardRecord& record,
              const Matrix& grad_segments, std::span<const double> grad_pooled,
              std::span<const double> grad_logits);

// Checkpoint format: "GLSD" | u32 version | u32 dims | f64 tensors.
void save_checkpoint(const ModelState& state, const std::filesystem::path& dest);
ModelState load_checkpoint(const std::filesystem::path& source);

}  // namespace glsda
