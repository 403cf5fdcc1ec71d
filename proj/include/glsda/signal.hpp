#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glsda/csi_data.hpp"
#include "glsda/matrix.hpp"

namespace glsda {

// --- feature types ----------------------------------------------------------

// Unwrapped CSI-Ratio phase, row-major (t, s), one instance per
// non-reference antenna. Stored as f32 to match the on-disk format.
struct CsiRatioFeature {
  std::uint32_t len{0};    // L, resampled length
  std::uint32_t n_sub{0};  // S
  std::uint32_t antenna_index{0};
  std::uint16_t label{0};
  std::uint16_t location_id{0};
  std::uint16_t orientation_id{0};
  std::uint16_t subject_id{0};
  std::vector<float> phase;  // L * S

  float at(std::uint32_t t, std::uint32_t s) const { return phase[t * n_sub + s]; }
};

// Zero-centered Doppler magnitude map, row-major (frame, bin).
struct DfsSpectrogram {
  std::uint32_t n_frames{0};  // F
  std::uint32_t n_bins{0};    // B
  double frame_rate{0.0};     // Hz
  std::uint16_t label{0};
  std::uint16_t location_id{0};
  std::uint16_t orientation_id{0};
  std::uint16_t subject_id{0};
  std::vector<float> magnitude;  // F * B

  float at(std::uint32_t f, std::uint32_t b) const { return magnitude[f * n_bins + b]; }
};

// --- scalar pipeline stages -------------------------------------------------

// Sliding-window outlier rejection: a point deviating from the local median
// by more than k scaled MADs is replaced by that median. Windows are
// truncated at the sequence bounds.
std::vector<double> hampel_filter(std::span<const double> series, int half_window,
                                  double k);

// Removes 2-pi discontinuities; consecutive output differences lie in
// (-pi, pi] and every element stays congruent to the input mod 2-pi.
std::vector<double> unwrap_phase(std::span<const double> series);

// Linear interpolation onto target_len uniformly spaced positions,
// endpoints preserved exactly.
std::vector<double> resample_uniform(std::span<const double> series,
                                     std::size_t target_len);
std::vector<std::complex<double>> resample_uniform(
    std::span<const std::complex<double>> series, std::size_t target_len);

// Hann-windowed short-time Fourier transform, frame count
// F = 1 + floor((len - W) / H). Bins are in natural DFT order.
struct StftFrames {
  std::size_t n_frames{0};
  std::size_t width{0};  // W
  std::vector<std::complex<double>> bins;  // n_frames * width

  std::complex<double> at(std::size_t f, std::size_t k) const {
    return bins[f * width + k];
  }
};

StftFrames stft(std::span<const double> series, std::size_t window_len,
                std::size_t hop);
StftFrames stft(std::span<const std::complex<double>> series,
                std::size_t window_len, std::size_t hop);

std::vector<double> hann_window(std::size_t len);

// --- trace-level feature extraction ------------------------------------------

struct RatioParams {
  std::uint32_t ref_antenna{0};
  std::uint32_t target_len{256};  // L
  int hampel_half_window{3};
  double hampel_k{3.0};
};

// Denominator magnitudes are floored at this value before dividing.
inline constexpr double kRatioEpsilon = 1e-8;

// Double-precision core of the CSI-Ratio pipeline: one [L x S] phase matrix
// per non-reference antenna, in antenna order. Exposed so invariance
// properties can be checked before the f32 cast.
std::vector<Matrix> csi_ratio_phases(const CsiTrace& trace, const RatioParams& params);

std::vector<CsiRatioFeature> csi_ratio(const CsiTrace& trace, const RatioParams& params);

struct DfsParams {
  std::uint32_t ref_antenna{0};
  std::uint32_t target_len{256};  // L, resampled ratio-series length
  std::size_t window_len{64};     // W
  std::size_t hop{16};            // H
};

DfsSpectrogram dfs_spectrogram(const CsiTrace& trace, const DfsParams& params);

// --- feature file formats ("CRF1", "DFS1") -----------------------------------

std::size_t write_feature(const CsiRatioFeature& feature, const std::filesystem::path& dest);
CsiRatioFeature read_ratio_feature(const std::filesystem::path& source);
std::size_t write_feature(const DfsSpectrogram& feature, const std::filesystem::path& dest);
DfsSpectrogram read_dfs_feature(const std::filesystem::path& source);

}  // namespace glsda
