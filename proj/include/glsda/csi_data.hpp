#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace glsda {

inline constexpr int kNumClasses = 6;

inline constexpr const char* kClassNames[kNumClasses] = {
    "PushPull", "Sweep", "Clap", "Slide", "DrawO", "DrawZigZag"};

// Raw complex channel response, row-major (t, s, a), plus domain metadata.
struct CsiTrace {
  std::uint32_t t_len{0};   // T, time samples
  std::uint32_t n_sub{0};   // S, subcarriers
  std::uint32_t n_ant{0};   // A, receive antennas
  double sample_rate{0.0};  // Hz
  std::uint16_t label{0};
  std::uint16_t location_id{0};
  std::uint16_t orientation_id{0};
  std::uint16_t subject_id{0};
  std::vector<std::complex<float>> samples;

  std::complex<float>& at(std::uint32_t t, std::uint32_t s, std::uint32_t a) {
    return samples[(static_cast<std::size_t>(t) * n_sub + s) * n_ant + a];
  }
  std::complex<float> at(std::uint32_t t, std::uint32_t s, std::uint32_t a) const {
    return samples[(static_cast<std::size_t>(t) * n_sub + s) * n_ant + a];
  }

  // Throws DataError if any invariant is violated (dims, finiteness, label).
  void validate() const;
};

struct DatasetSplit {
  enum class Scenario { InDomain, CrossLocation, CrossOrientation };
  Scenario scenario{Scenario::InDomain};
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
};

const char* scenario_name(DatasetSplit::Scenario s);
DatasetSplit::Scenario scenario_from_name(const std::string& name);

// --- trace file format ("CSI1") ------------------------------------------

std::size_t write_trace(const CsiTrace& trace, std::ostream& out);
std::size_t write_trace(const CsiTrace& trace, const std::filesystem::path& dest);
CsiTrace read_trace(std::istream& in);
CsiTrace read_trace(const std::filesystem::path& source);

// --- synthetic multi-domain generator -------------------------------------

struct SynthParams {
  int n_per_class_per_domain{4};
  int locations{3};
  int orientations{5};
  std::uint32_t t_len{300};
  std::uint32_t n_sub{30};
  std::uint32_t n_ant{3};
  double sample_rate{100.0};
  double noise_sigma{0.05};
};

// Orientation scales the injected Doppler trajectory amplitude.
double orientation_factor(int orientation_id);

// Per-antenna coupling of the motion phase; ratios to antenna 0 keep a
// class-dependent component because the coupling differs across antennas.
double antenna_coupling(std::uint32_t antenna);

// The injected phase pattern for one class: an amplitude-scaled sinusoid
// whose instantaneous frequency sweeps linearly between a class-specific
// start and end frequency. `jitter` shifts the evaluation time (seconds).
std::vector<double> class_phase_pattern(int class_id, int orientation_id,
                                        std::uint32_t t_len, double sample_rate,
                                        double jitter);

// The timing jitter (seconds) the generator applies to a given trace.
double synth_trace_jitter(std::uint64_t seed, int class_id, int location_id,
                          int orientation_id, int index, double duration);

std::vector<CsiTrace> synth_dataset(const SynthParams& params, std::uint64_t seed);

// --- split protocols -------------------------------------------------------

// In-domain: stratified-by-class random split at train_fraction.
// Cross-location / cross-orientation: train on the held attribute value,
// test on all others.
DatasetSplit make_splits(const std::vector<CsiTrace>& traces,
                         DatasetSplit::Scenario scenario,
                         int holdout_attr_value, double train_fraction,
                         std::uint64_t seed);

// --- dataset manifest (one trace file path per line) -----------------------

void write_manifest(const std::vector<std::filesystem::path>& files,
                    const std::filesystem::path& manifest);
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest);
std::vector<CsiTrace> load_manifest(const std::filesystem::path& manifest);

}  // namespace glsda
