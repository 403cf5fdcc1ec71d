#include "glsda/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "glsda/binary_io.hpp"
#include "glsda/errors.hpp"

namespace glsda {

namespace {

constexpr char kRatioMagic[4] = {'C', 'R', 'F', '1'};
constexpr char kDfsMagic[4] = {'D', 'F', 'S', '1'};

double median_of(std::vector<double>& scratch) {
  const std::size_t n = scratch.size();
  const std::size_t mid = n / 2;
  std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
  double m = scratch[mid];
  if (n % 2 == 0) {
    const double lo = *std::max_element(scratch.begin(), scratch.begin() + mid);
    m = 0.5 * (lo + m);
  }
  return m;
}

}  // namespace

std::vector<double> hampel_filter(std::span<const double> series, int half_window,
                                  double k) {
  if (series.empty()) throw UsageError("hampel_filter: empty series");
  if (half_window < 1) throw UsageError("hampel_filter: half_window must be >= 1");
  if (!(k > 0.0)) throw UsageError("hampel_filter: k must be > 0");

  constexpr double kMadScale = 1.4826;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(series.size());
  const std::ptrdiff_t w = half_window;
  std::vector<double> out(series.begin(), series.end());
  std::vector<double> window, deviations;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - w);
    const std::ptrdiff_t hi = std::min(n - 1, i + w);
    window.assign(series.begin() + lo, series.begin() + hi + 1);
    const double m = median_of(window);
    deviations.resize(window.size());
    for (std::size_t j = 0; j < window.size(); ++j) {
      deviations[j] = std::abs(series[lo + j] - m);
    }
    const double mad = median_of(deviations);
    if (std::abs(series[i] - m) > k * kMadScale * mad) {
      out[i] = m;
    }
  }
  return out;
}

std::vector<double> unwrap_phase(std::span<const double> series) {
  if (series.empty()) throw UsageError("unwrap_phase: empty series");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out(series.size());
  out[0] = series[0];
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double delta = series[i] - series[i - 1];
    // Shift the difference into (-pi, pi].
    const double wrapped =
        delta - two_pi * std::ceil((delta - std::numbers::pi) / two_pi);
    out[i] = out[i - 1] + wrapped;
  }
  return out;
}

namespace {

template <typename T>
std::vector<T> resample_impl(std::span<const T> series, std::size_t target_len) {
  if (series.size() < 2) throw UsageError("resample_uniform: need length >= 2");
  if (target_len < 2) throw UsageError("resample_uniform: target_len must be >= 2");
  const std::size_t n = series.size();
  std::vector<T> out(target_len);
  for (std::size_t i = 0; i < target_len; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(n - 1) /
                       static_cast<double>(target_len - 1);
    std::size_t j = static_cast<std::size_t>(pos);
    if (j >= n - 1) j = n - 2;
    const double frac = pos - static_cast<double>(j);
    out[i] = series[j] * (1.0 - frac) + series[j + 1] * frac;
  }
  out[0] = series[0];
  out[target_len - 1] = series[n - 1];
  return out;
}

}  // namespace

std::vector<double> resample_uniform(std::span<const double> series,
                                     std::size_t target_len) {
  return resample_impl(series, target_len);
}

std::vector<std::complex<double>> resample_uniform(
    std::span<const std::complex<double>> series, std::size_t target_len) {
  return resample_impl(series, target_len);
}

std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t i = 0; i < len; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i /
                                 static_cast<double>(len - 1)));
  }
  return w;
}

namespace {

template <typename T>
StftFrames stft_impl(std::span<const T> series, std::size_t window_len,
                     std::size_t hop) {
  if (window_len < 2) throw UsageError("stft: window_len must be >= 2");
  if (hop < 1 || hop > window_len) throw UsageError("stft: need 1 <= hop <= window_len");
  if (series.size() < window_len) {
    throw UsageError("stft: series shorter than the window");
  }
  const std::size_t n_frames = 1 + (series.size() - window_len) / hop;
  const auto window = hann_window(window_len);

  // Precomputed twiddle table: e^{-2 pi i m / W} for one period.
  std::vector<std::complex<double>> twiddle(window_len);
  for (std::size_t m = 0; m < window_len; ++m) {
    const double angle = -2.0 * std::numbers::pi * m / static_cast<double>(window_len);
    twiddle[m] = {std::cos(angle), std::sin(angle)};
  }

  StftFrames frames;
  frames.n_frames = n_frames;
  frames.width = window_len;
  frames.bins.resize(n_frames * window_len);
  std::vector<std::complex<double>> windowed(window_len);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < window_len; ++i) {
      windowed[i] = std::complex<double>(series[start + i]) * window[i];
    }
    for (std::size_t k = 0; k < window_len; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t i = 0; i < window_len; ++i) {
        acc += windowed[i] * twiddle[(k * i) % window_len];
      }
      frames.bins[f * window_len + k] = acc;
    }
  }
  return frames;
}

}  // namespace

StftFrames stft(std::span<const double> series, std::size_t window_len,
                std::size_t hop) {
  return stft_impl(series, window_len, hop);
}

StftFrames stft(std::span<const std::complex<double>> series,
                std::size_t window_len, std::size_t hop) {
  return stft_impl(series, window_len, hop);
}

// --- CSI-Ratio ---------------------------------------------------------------

namespace {

// Complex antenna ratio series for one (antenna, subcarrier) pair, with the
// denominator magnitude floored at kRatioEpsilon.
std::vector<std::complex<double>> ratio_series(const CsiTrace& trace,
                                               std::uint32_t antenna,
                                               std::uint32_t ref_antenna,
                                               std::uint32_t s) {
  std::vector<std::complex<double>> r(trace.t_len);
  for (std::uint32_t t = 0; t < trace.t_len; ++t) {
    const std::complex<double> num = trace.at(t, s, antenna);
    std::complex<double> den = trace.at(t, s, ref_antenna);
    const double mag = std::abs(den);
    if (mag < kRatioEpsilon) {
      den = (mag == 0.0) ? std::complex<double>(kRatioEpsilon, 0.0)
                         : den * (kRatioEpsilon / mag);
    }
    r[t] = num / den;
  }
  return r;
}

void check_ratio_preconditions(const CsiTrace& trace, std::uint32_t ref_antenna) {
  trace.validate();
  if (ref_antenna >= trace.n_ant) {
    throw UsageError("ref_antenna " + std::to_string(ref_antenna) +
                     " out of range (A = " + std::to_string(trace.n_ant) + ")");
  }
}

}  // namespace

std::vector<Matrix> csi_ratio_phases(const CsiTrace& trace, const RatioParams& params) {
  check_ratio_preconditions(trace, params.ref_antenna);
  const std::uint32_t L = params.target_len;
  std::vector<Matrix> result;
  for (std::uint32_t a = 0; a < trace.n_ant; ++a) {
    if (a == params.ref_antenna) continue;
    Matrix phases(L, trace.n_sub);
    for (std::uint32_t s = 0; s < trace.n_sub; ++s) {
      const auto ratio = ratio_series(trace, a, params.ref_antenna, s);
      std::vector<double> angle(ratio.size());
      for (std::size_t t = 0; t < ratio.size(); ++t) {
        angle[t] = std::arg(ratio[t]);
      }
      const auto filtered =
          hampel_filter(angle, params.hampel_half_window, params.hampel_k);
      const auto unwrapped = unwrap_phase(filtered);
      const auto resampled = resample_uniform(std::span<const double>(unwrapped), L);
      for (std::uint32_t t = 0; t < L; ++t) {
        phases(t, s) = resampled[t];
      }
    }
    result.push_back(std::move(phases));
  }
  return result;
}

std::vector<CsiRatioFeature> csi_ratio(const CsiTrace& trace, const RatioParams& params) {
  const auto phases = csi_ratio_phases(trace, params);
  std::vector<CsiRatioFeature> features;
  features.reserve(phases.size());
  std::size_t slot = 0;
  for (std::uint32_t a = 0; a < trace.n_ant; ++a) {
    if (a == params.ref_antenna) continue;
    const Matrix& m = phases[slot++];
    CsiRatioFeature f;
    f.len = params.target_len;
    f.n_sub = trace.n_sub;
    f.antenna_index = a;
    f.label = trace.label;
    f.location_id = trace.location_id;
    f.orientation_id = trace.orientation_id;
    f.subject_id = trace.subject_id;
    f.phase.resize(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      f.phase[i] = static_cast<float>(m.data[i]);
    }
    features.push_back(std::move(f));
  }
  return features;
}

// --- DFS spectrogram ----------------------------------------------------------

DfsSpectrogram dfs_spectrogram(const CsiTrace& trace, const DfsParams& params) {
  check_ratio_preconditions(trace, params.ref_antenna);
  const std::uint32_t L = params.target_len;
  const std::size_t W = params.window_len;
  if (L < W) throw UsageError("dfs_spectrogram: resampled length below window");
  const std::size_t F = 1 + (L - W) / params.hop;

  std::vector<double> accum(F * W, 0.0);
  std::size_t n_series = 0;
  for (std::uint32_t a = 0; a < trace.n_ant; ++a) {
    if (a == params.ref_antenna) continue;
    for (std::uint32_t s = 0; s < trace.n_sub; ++s) {
      auto ratio = ratio_series(trace, a, params.ref_antenna, s);
      auto resampled =
          resample_uniform(std::span<const std::complex<double>>(ratio), L);
      std::complex<double> mean{0.0, 0.0};
      for (const auto& v : resampled) mean += v;
      mean /= static_cast<double>(L);
      for (auto& v : resampled) v -= mean;
      const auto frames =
          stft(std::span<const std::complex<double>>(resampled), W, params.hop);
      // fftshift: bin b holds DFT index (b + ceil(W/2)) mod W, so zero
      // frequency lands at floor(W/2).
      const std::size_t shift = (W + 1) / 2;
      for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t b = 0; b < W; ++b) {
          const std::size_t k = (b + shift) % W;
          accum[f * W + b] += std::abs(frames.at(f, k));
        }
      }
      ++n_series;
    }
  }

  DfsSpectrogram spec;
  spec.n_frames = static_cast<std::uint32_t>(F);
  spec.n_bins = static_cast<std::uint32_t>(W);
  const double resampled_rate =
      trace.sample_rate * static_cast<double>(L - 1) / static_cast<double>(trace.t_len - 1);
  spec.frame_rate = resampled_rate / static_cast<double>(params.hop);
  spec.label = trace.label;
  spec.location_id = trace.location_id;
  spec.orientation_id = trace.orientation_id;
  spec.subject_id = trace.subject_id;
  spec.magnitude.resize(accum.size());
  for (std::size_t i = 0; i < accum.size(); ++i) {
    spec.magnitude[i] = static_cast<float>(accum[i] / static_cast<double>(n_series));
  }
  return spec;
}

// --- feature file io -----------------------------------------------------------

std::size_t write_feature(const CsiRatioFeature& feature,
                          const std::filesystem::path& dest) {
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + dest.string());
  out.write(kRatioMagic, 4);
  write_le<std::uint32_t>(out, feature.len);
  write_le<std::uint32_t>(out, feature.n_sub);
  write_le<std::uint32_t>(out, feature.antenna_index);
  write_le<std::uint16_t>(out, feature.label);
  write_le<std::uint16_t>(out, feature.location_id);
  write_le<std::uint16_t>(out, feature.orientation_id);
  write_le<std::uint16_t>(out, feature.subject_id);
  for (float v : feature.phase) write_le<float>(out, v);
  if (!out) throw DataError("failed to write feature file");
  return 4 + 20 + feature.phase.size() * 4;
}

CsiRatioFeature read_ratio_feature(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw DataError("cannot open feature file: " + source.string());
  expect_magic(in, kRatioMagic, "CRF1 feature");
  CsiRatioFeature f;
  f.len = read_le<std::uint32_t>(in, "L");
  f.n_sub = read_le<std::uint32_t>(in, "S");
  f.antenna_index = read_le<std::uint32_t>(in, "antenna_index");
  f.label = read_le<std::uint16_t>(in, "label");
  f.location_id = read_le<std::uint16_t>(in, "location_id");
  f.orientation_id = read_le<std::uint16_t>(in, "orientation_id");
  f.subject_id = read_le<std::uint16_t>(in, "subject_id");
  const std::uint64_t count = static_cast<std::uint64_t>(f.len) * f.n_sub;
  if (count == 0 || count > (1ull << 30)) throw DataError("feature dims invalid");
  f.phase.resize(count);
  for (auto& v : f.phase) {
    v = read_le<float>(in, "phase payload");
    if (!std::isfinite(v)) throw DataError("non-finite phase value");
  }
  return f;
}

std::size_t write_feature(const DfsSpectrogram& feature,
                          const std::filesystem::path& dest) {
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + dest.string());
  out.write(kDfsMagic, 4);
  write_le<std::uint32_t>(out, feature.n_frames);
  write_le<std::uint32_t>(out, feature.n_bins);
  write_le<double>(out, feature.frame_rate);
  write_le<std::uint16_t>(out, feature.label);
  write_le<std::uint16_t>(out, feature.location_id);
  write_le<std::uint16_t>(out, feature.orientation_id);
  write_le<std::uint16_t>(out, feature.subject_id);
  for (float v : feature.magnitude) write_le<float>(out, v);
  if (!out) throw DataError("failed to write feature file");
  return 4 + 24 + feature.magnitude.size() * 4;
}

DfsSpectrogram read_dfs_feature(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw DataError("cannot open feature file: " + source.string());
  expect_magic(in, kDfsMagic, "DFS1 feature");
  DfsSpectrogram f;
  f.n_frames = read_le<std::uint32_t>(in, "F");
  f.n_bins = read_le<std::uint32_t>(in, "B");
  f.frame_rate = read_le<double>(in, "frame_rate");
  f.label = read_le<std::uint16_t>(in, "label");
  f.location_id = read_le<std::uint16_t>(in, "location_id");
  f.orientation_id = read_le<std::uint16_t>(in, "orientation_id");
  f.subject_id = read_le<std::uint16_t>(in, "subject_id");
  const std::uint64_t count = static_cast<std::uint64_t>(f.n_frames) * f.n_bins;
  if (count == 0 || count > (1ull << 30)) throw DataError("feature dims invalid");
  f.magnitude.resize(count);
  for (auto& v : f.magnitude) {
    v = read_le<float>(in, "magnitude payload");
    if (!std::isfinite(v) || v < 0.0f) throw DataError("invalid magnitude value");
  }
  return f;
}

}  // namespace glsda
