#include "glsda/csi_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "glsda/binary_io.hpp"
#include "glsda/errors.hpp"
#include "glsda/rng.hpp"

namespace glsda {

namespace {

constexpr char kTraceMagic[4] = {'C', 'S', 'I', '1'};

// Class-specific chirp shapes: start frequency, end frequency (Hz) and
// amplitude of the injected phase pattern.
struct ChirpSpec {
  double f0, f1, amp;
};

constexpr ChirpSpec kClassChirps[kNumClasses] = {
    {1.0, 3.0, 1.00},  // PushPull
    {3.0, 1.0, 1.00},  // Sweep
    {2.0, 2.0, 1.30},  // Clap
    {1.5, 4.0, 0.80},  // Slide
    {4.0, 1.5, 1.10},  // DrawO
    {2.5, 5.0, 0.90},  // DrawZigZag
};

std::uint64_t trace_stream(int class_id, int location_id, int orientation_id,
                           int index) {
  return (static_cast<std::uint64_t>(class_id) << 48) |
         (static_cast<std::uint64_t>(location_id) << 32) |
         (static_cast<std::uint64_t>(orientation_id) << 16) |
         static_cast<std::uint64_t>(index);
}

}  // namespace

void CsiTrace::validate() const {
  if (t_len < 2) throw DataError("CsiTrace: need T >= 2 time samples");
  if (n_sub < 1) throw DataError("CsiTrace: need S >= 1 subcarriers");
  if (n_ant < 2) throw DataError("CsiTrace: CSI-Ratio requires A >= 2 antennas");
  if (sample_rate <= 0.0 || !std::isfinite(sample_rate)) {
    throw DataError("CsiTrace: sample_rate must be positive and finite");
  }
  if (label >= kNumClasses) {
    throw DataError("CsiTrace: label " + std::to_string(label) + " out of range (< 6)");
  }
  const std::size_t expected =
      static_cast<std::size_t>(t_len) * n_sub * n_ant;
  if (samples.size() != expected) {
    throw DataError("CsiTrace: sample buffer size does not match dims");
  }
  for (const auto& v : samples) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DataError("CsiTrace: non-finite sample value");
    }
  }
}

const char* scenario_name(DatasetSplit::Scenario s) {
  switch (s) {
    case DatasetSplit::Scenario::InDomain: return "in-domain";
    case DatasetSplit::Scenario::CrossLocation: return "cross-location";
    case DatasetSplit::Scenario::CrossOrientation: return "cross-orientation";
  }
  return "unknown";
}

DatasetSplit::Scenario scenario_from_name(const std::string& name) {
  if (name == "in-domain") return DatasetSplit::Scenario::InDomain;
  if (name == "cross-location") return DatasetSplit::Scenario::CrossLocation;
  if (name == "cross-orientation") return DatasetSplit::Scenario::CrossOrientation;
  throw UsageError("unknown scenario '" + name +
                   "' (expected in-domain, cross-location or cross-orientation)");
}

// --- trace file io -----------------------------------------------------------

std::size_t write_trace(const CsiTrace& trace, std::ostream& out) {
  trace.validate();
  out.write(kTraceMagic, 4);
  write_le<std::uint32_t>(out, trace.t_len);
  write_le<std::uint32_t>(out, trace.n_sub);
  write_le<std::uint32_t>(out, trace.n_ant);
  write_le<double>(out, trace.sample_rate);
  write_le<std::uint16_t>(out, trace.label);
  write_le<std::uint16_t>(out, trace.location_id);
  write_le<std::uint16_t>(out, trace.orientation_id);
  write_le<std::uint16_t>(out, trace.subject_id);
  for (const auto& v : trace.samples) {
    write_le<float>(out, v.real());
    write_le<float>(out, v.imag());
  }
  if (!out) throw DataError("failed to write trace");
  return 4 + 28 + trace.samples.size() * 8;
}

std::size_t write_trace(const CsiTrace& trace, const std::filesystem::path& dest) {
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + dest.string());
  return write_trace(trace, out);
}

CsiTrace read_trace(std::istream& in) {
  expect_magic(in, kTraceMagic, "CSI1 trace");
  CsiTrace trace;
  trace.t_len = read_le<std::uint32_t>(in, "T");
  trace.n_sub = read_le<std::uint32_t>(in, "S");
  trace.n_ant = read_le<std::uint32_t>(in, "A");
  trace.sample_rate = read_le<double>(in, "sample_rate");
  trace.label = read_le<std::uint16_t>(in, "label");
  trace.location_id = read_le<std::uint16_t>(in, "location_id");
  trace.orientation_id = read_le<std::uint16_t>(in, "orientation_id");
  trace.subject_id = read_le<std::uint16_t>(in, "subject_id");
  const std::uint64_t count = static_cast<std::uint64_t>(trace.t_len) *
                              trace.n_sub * trace.n_ant;
  if (count > (1ull << 30)) throw DataError("trace dims unreasonably large");
  trace.samples.resize(count);
  for (auto& v : trace.samples) {
    const float re = read_le<float>(in, "sample payload");
    const float im = read_le<float>(in, "sample payload");
    v = {re, im};
  }
  trace.validate();
  return trace;
}

CsiTrace read_trace(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw DataError("cannot open trace file: " + source.string());
  return read_trace(in);
}

// --- synthetic generator -----------------------------------------------------

double orientation_factor(int orientation_id) {
  return 0.6 + 0.2 * orientation_id;
}

double antenna_coupling(std::uint32_t antenna) { return 0.5 * antenna; }

std::vector<double> class_phase_pattern(int class_id, int orientation_id,
                                        std::uint32_t t_len, double sample_rate,
                                        double jitter) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw DataError("class id out of range");
  }
  const ChirpSpec& chirp = kClassChirps[class_id];
  const double duration = t_len / sample_rate;
  const double scale = orientation_factor(orientation_id) * chirp.amp;
  std::vector<double> pattern(t_len);
  for (std::uint32_t t = 0; t < t_len; ++t) {
    const double u = t / sample_rate + jitter;
    const double theta =
        2.0 * std::numbers::pi *
        (chirp.f0 * u + 0.5 * (chirp.f1 - chirp.f0) * u * u / duration);
    pattern[t] = scale * std::sin(theta);
  }
  return pattern;
}

double synth_trace_jitter(std::uint64_t seed, int class_id, int location_id,
                          int orientation_id, int index, double duration) {
  Rng rng(seed, trace_stream(class_id, location_id, orientation_id, index));
  return rng.uniform(-0.05, 0.05) * duration;
}

std::vector<CsiTrace> synth_dataset(const SynthParams& params, std::uint64_t seed) {
  if (params.n_per_class_per_domain < 1 || params.locations < 1 ||
      params.orientations < 1) {
    throw UsageError("synth_dataset: counts must be positive");
  }
  if (params.noise_sigma < 0.0) {
    throw UsageError("synth_dataset: noise_sigma must be >= 0");
  }
  if (params.t_len < 2 || params.n_sub < 1 || params.n_ant < 2) {
    throw UsageError("synth_dataset: dims below trace invariants");
  }

  // Static multipath gains, one stream per location so the draw does not
  // depend on how many locations are requested.
  std::vector<std::vector<std::complex<double>>> gains(params.locations);
  for (int loc = 0; loc < params.locations; ++loc) {
    Rng rng(seed, 0x9A1D5000ull + static_cast<std::uint64_t>(loc));
    auto& g = gains[loc];
    g.resize(static_cast<std::size_t>(params.n_sub) * params.n_ant);
    for (auto& v : g) {
      const double mag = rng.uniform(0.5, 1.5);
      const double phase = rng.uniform(-std::numbers::pi, std::numbers::pi);
      v = std::polar(mag, phase);
    }
  }

  const double duration = params.t_len / params.sample_rate;
  std::vector<CsiTrace> traces;
  traces.reserve(static_cast<std::size_t>(kNumClasses) * params.locations *
                 params.orientations * params.n_per_class_per_domain);

  for (int cls = 0; cls < kNumClasses; ++cls) {
    for (int loc = 0; loc < params.locations; ++loc) {
      for (int orient = 0; orient < params.orientations; ++orient) {
        for (int idx = 0; idx < params.n_per_class_per_domain; ++idx) {
          Rng rng(seed, trace_stream(cls, loc, orient, idx));
          const double jitter = rng.uniform(-0.05, 0.05) * duration;
          const auto pattern = class_phase_pattern(
              cls, orient, params.t_len, params.sample_rate, jitter);

          CsiTrace trace;
          trace.t_len = params.t_len;
          trace.n_sub = params.n_sub;
          trace.n_ant = params.n_ant;
          trace.sample_rate = params.sample_rate;
          trace.label = static_cast<std::uint16_t>(cls);
          trace.location_id = static_cast<std::uint16_t>(loc);
          trace.orientation_id = static_cast<std::uint16_t>(orient);
          trace.subject_id = static_cast<std::uint16_t>(idx);
          trace.samples.resize(static_cast<std::size_t>(params.t_len) *
                               params.n_sub * params.n_ant);
          for (std::uint32_t t = 0; t < params.t_len; ++t) {
            for (std::uint32_t s = 0; s < params.n_sub; ++s) {
              for (std::uint32_t a = 0; a < params.n_ant; ++a) {
                const auto g = gains[loc][s * params.n_ant + a];
                std::complex<double> v =
                    g * std::polar(1.0, antenna_coupling(a) * pattern[t]);
                if (params.noise_sigma > 0.0) {
                  v += std::complex<double>(params.noise_sigma * rng.normal(),
                                            params.noise_sigma * rng.normal());
                }
                trace.at(t, s, a) = {static_cast<float>(v.real()),
                                     static_cast<float>(v.imag())};
              }
            }
          }
          traces.push_back(std::move(trace));
        }
      }
    }
  }
  return traces;
}

// --- splits ------------------------------------------------------------------

namespace {

DatasetSplit cross_split(const std::vector<CsiTrace>& traces,
                         DatasetSplit::Scenario scenario, int holdout) {
  DatasetSplit split;
  split.scenario = scenario;
  const bool by_location = scenario == DatasetSplit::Scenario::CrossLocation;
  bool holdout_seen = false;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const int attr = by_location ? traces[i].location_id : traces[i].orientation_id;
    if (attr == holdout) {
      split.train_ids.push_back(i);
      holdout_seen = true;
    } else {
      split.test_ids.push_back(i);
    }
  }
  if (!holdout_seen) {
    throw DataError("holdout attribute value not present in the dataset");
  }
  if (split.test_ids.empty()) {
    throw DataError("empty test set: all traces share the held attribute value");
  }
  bool class_in_train[kNumClasses] = {};
  bool class_in_data[kNumClasses] = {};
  for (std::size_t id : split.train_ids) class_in_train[traces[id].label] = true;
  for (const auto& t : traces) class_in_data[t.label] = true;
  for (int c = 0; c < kNumClasses; ++c) {
    if (class_in_data[c] && !class_in_train[c]) {
      throw DataError("class " + std::to_string(c) + " absent from train set");
    }
  }
  return split;
}

DatasetSplit in_domain_split(const std::vector<CsiTrace>& traces,
                             double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(kNumClasses);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    by_class[traces[i].label].push_back(i);
  }

  // Largest-remainder allocation so the global ratio is hit exactly while
  // every present class keeps at least one training trace.
  const auto target = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(traces.size())));
  std::size_t base_total = 0;
  std::vector<std::size_t> take(kNumClasses, 0);
  std::vector<std::pair<double, int>> remainders;
  for (int c = 0; c < kNumClasses; ++c) {
    if (by_class[c].empty()) continue;
    const double exact = train_fraction * static_cast<double>(by_class[c].size());
    take[c] = std::max<std::size_t>(1, static_cast<std::size_t>(exact));
    take[c] = std::min(take[c], by_class[c].size());
    base_total += take[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [rem, c] : remainders) {
    if (base_total >= target) break;
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++base_total;
    }
  }

  DatasetSplit split;
  split.scenario = DatasetSplit::Scenario::InDomain;
  Rng rng(seed);
  for (int c = 0; c < kNumClasses; ++c) {
    auto ids = by_class[c];
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < take[c] ? split.train_ids : split.test_ids).push_back(ids[i]);
    }
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  if (split.test_ids.empty()) throw DataError("empty test set after split");
  return split;
}

}  // namespace

DatasetSplit make_splits(const std::vector<CsiTrace>& traces,
                         DatasetSplit::Scenario scenario, int holdout_attr_value,
                         double train_fraction, std::uint64_t seed) {
  if (traces.empty()) throw DataError("make_splits: no traces");
  switch (scenario) {
    case DatasetSplit::Scenario::InDomain:
      return in_domain_split(traces, train_fraction, seed);
    case DatasetSplit::Scenario::CrossLocation:
    case DatasetSplit::Scenario::CrossOrientation:
      return cross_split(traces, scenario, holdout_attr_value);
  }
  throw UsageError("make_splits: bad scenario");
}

// --- manifest ----------------------------------------------------------------

void write_manifest(const std::vector<std::filesystem::path>& files,
                    const std::filesystem::path& manifest) {
  std::ofstream out(manifest);
  if (!out) throw DataError("cannot open for writing: " + manifest.string());
  for (const auto& f : files) out << f.generic_string() << "\n";
}

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest: " + manifest.string());
  std::vector<std::filesystem::path> paths;
  std::string line;
  const auto base = manifest.parent_path();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::filesystem::path p(line);
    paths.push_back(p.is_absolute() ? p : base / p);
  }
  if (paths.empty()) throw DataError("manifest lists no files: " + manifest.string());
  return paths;
}

std::vector<CsiTrace> load_manifest(const std::filesystem::path& manifest) {
  std::vector<CsiTrace> traces;
  for (const auto& p : read_manifest(manifest)) {
    traces.push_back(read_trace(p));
  }
  return traces;
}

}  // namespace glsda
