#include "imfault/machine_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "imfault/error.hpp"
#include "imfault/parallel.hpp"
#include "imfault/rng.hpp"

namespace imfault::sim {

namespace {

constexpr const char* kModule = "machine-sim";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidSpec, kModule, what); }

int severity_level(const FaultSpec& f) {
  switch (f.kind) {
    case FaultKind::Healthy: return 0;
    case FaultKind::Eccentricity: return static_cast<int>(std::lround(f.severity * 4.0));
    case FaultKind::BrokenBars: return f.broken_bars;
    case FaultKind::Bearing: return static_cast<int>(std::lround(f.severity * 3.0));
  }
  return 0;
}

// sum of cos(2 pi f t + phase) into out, amplitude may be time varying
template <typename AmplitudeFn>
void add_tone(std::vector<double>& out, double sample_rate, double freq, double phase, AmplitudeFn amp) {
  const double w = kTwoPi * freq / sample_rate;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i);
    out[i] += amp(i) * std::cos(w * t + phase);
  }
}

}  // namespace

void MachineSpec::validate() const {
  if (!(supply_frequency > 0.0)) invalid("supply_frequency must be > 0");
  if (pole_pairs < 1) invalid("pole_pairs must be >= 1");
  if (!(rated_current > 0.0)) invalid("rated_current must be > 0");
  if (!(sample_rate >= 10.0 * supply_frequency)) invalid("sample_rate must be >= 10 * supply_frequency");
  if (!(duration > 0.0)) invalid("duration must be > 0");
}

std::size_t MachineSpec::sample_count() const {
  return static_cast<std::size_t>(std::llround(sample_rate * duration));
}

double LoadSlipMap::slip_for(double load_torque) const {
  if (points.empty()) invalid("load/slip map is empty");
  for (const auto& [load, slip] : points)
    if (load == load_torque) return slip;
  // piecewise-linear between listed points, clamped at the ends
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end());
  if (load_torque <= sorted.front().first) return sorted.front().second;
  if (load_torque >= sorted.back().first) return sorted.back().second;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (load_torque <= sorted[i].first) {
      const auto [l0, s0] = sorted[i - 1];
      const auto [l1, s1] = sorted[i];
      return s0 + (s1 - s0) * (load_torque - l0) / (l1 - l0);
    }
  }
  return sorted.back().second;
}

double BearingFrequencies::of(BearingSite site) const {
  switch (site) {
    case BearingSite::Ball: return ball;
    case BearingSite::Inner: return inner;
    case BearingSite::Outer: return outer;
  }
  return ball;
}

FaultSpec FaultSpec::healthy() { return FaultSpec{}; }

FaultSpec FaultSpec::make_eccentricity(EccentricityType type, int level) {
  if (level < 1 || level > 4) invalid("eccentricity level must be 1..4");
  FaultSpec f;
  f.kind = FaultKind::Eccentricity;
  f.eccentricity = type;
  f.severity = 0.25 * level;
  return f;
}

FaultSpec FaultSpec::make_broken_bars(int count) {
  if (count < 1 || count > 3) invalid("broken bar count must be 1..3");
  FaultSpec f;
  f.kind = FaultKind::BrokenBars;
  f.broken_bars = count;
  f.severity = count / 3.0;
  return f;
}

FaultSpec FaultSpec::make_bearing(BearingSite site, int level, double fv) {
  if (level < 1 || level > 3) invalid("bearing defect level must be 1..3");
  FaultSpec f;
  f.kind = FaultKind::Bearing;
  f.site = site;
  f.severity = level / 3.0;
  f.fv = fv;
  return f;
}

void FaultSpec::validate() const {
  if (!(severity >= 0.0 && severity <= 1.0)) invalid("severity must lie in [0, 1]");
  switch (kind) {
    case FaultKind::Healthy:
      if (severity != 0.0) invalid("healthy label must have zero severity");
      break;
    case FaultKind::BrokenBars:
      if (broken_bars < 1 || broken_bars > 3) invalid("broken bar count must be 1..3");
      break;
    case FaultKind::Bearing:
      if (!(fv > 0.0)) throw Error(Errc::InvalidFv, kModule, "bearing fv must be > 0");
      break;
    case FaultKind::Eccentricity: break;
  }
}

std::optional<FaultType> FaultSpec::type() const {
  switch (kind) {
    case FaultKind::Healthy: return std::nullopt;
    case FaultKind::Eccentricity: return FaultType::Eccentricity;
    case FaultKind::BrokenBars: return FaultType::BarBreakage;
    case FaultKind::Bearing: return FaultType::Bearing;
  }
  return std::nullopt;
}

std::string FaultSpec::condition() const {
  switch (kind) {
    case FaultKind::Healthy: return "healthy";
    case FaultKind::Eccentricity: return "eccentricity_" + to_string(eccentricity);
    case FaultKind::BrokenBars: return "broken_bars_" + std::to_string(broken_bars);
    case FaultKind::Bearing: return "bearing_" + to_string(site);
  }
  return "unknown";
}

std::string FaultSpec::family() const {
  const auto t = type();
  return t ? to_string(*t) : "healthy";
}

std::string to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::Healthy: return "healthy";
    case FaultKind::Eccentricity: return "eccentricity";
    case FaultKind::BrokenBars: return "broken_bars";
    case FaultKind::Bearing: return "bearing";
  }
  return "unknown";
}

std::string to_string(EccentricityType type) {
  switch (type) {
    case EccentricityType::Static: return "static";
    case EccentricityType::Dynamic: return "dynamic";
    case EccentricityType::Mixed: return "mixed";
  }
  return "unknown";
}

std::string to_string(BearingSite site) {
  switch (site) {
    case BearingSite::Ball: return "ball";
    case BearingSite::Inner: return "inner";
    case BearingSite::Outer: return "outer";
  }
  return "unknown";
}

std::string to_string(FaultType type) {
  switch (type) {
    case FaultType::Eccentricity: return "eccentricity";
    case FaultType::BarBreakage: return "bar_breakage";
    case FaultType::Bearing: return "bearing";
  }
  return "unknown";
}

FaultKind fault_kind_from_string(const std::string& s) {
  for (auto k : {FaultKind::Healthy, FaultKind::Eccentricity, FaultKind::BrokenBars, FaultKind::Bearing})
    if (to_string(k) == s) return k;
  invalid("unknown fault kind '" + s + "'");
}

EccentricityType eccentricity_from_string(const std::string& s) {
  for (auto t : {EccentricityType::Static, EccentricityType::Dynamic, EccentricityType::Mixed})
    if (to_string(t) == s) return t;
  invalid("unknown eccentricity type '" + s + "'");
}

BearingSite bearing_site_from_string(const std::string& s) {
  for (auto t : {BearingSite::Ball, BearingSite::Inner, BearingSite::Outer})
    if (to_string(t) == s) return t;
  invalid("unknown bearing site '" + s + "'");
}

std::pair<double, double> brb_frequency(double fs, double slip, int pole_pairs, int k) {
  if (!(slip >= 0.0 && slip < 1.0))
    throw Error(Errc::InvalidSlip, kModule, "slip " + std::to_string(slip) + " outside [0, 1)");
  if (k < 1 || pole_pairs < 1) invalid("harmonic index and pole pairs must be >= 1");
  const double base = k * (1.0 - slip) / pole_pairs;
  return {std::max(0.0, fs * (base + slip)), std::max(0.0, fs * (base - slip))};
}

std::pair<double, double> brb_sidebands(double fs, double slip) {
  if (!(slip >= 0.0 && slip < 1.0))
    throw Error(Errc::InvalidSlip, kModule, "slip " + std::to_string(slip) + " outside [0, 1)");
  // f_s -+ 2 s f_s rounds once at the end, so round inputs give exact lines
  const double offset = 2.0 * slip * fs;
  return {fs - offset, fs + offset};
}

std::vector<double> bearing_frequencies(double fs, double fv, int m_max) {
  if (!(fv > 0.0)) throw Error(Errc::InvalidFv, kModule, "fv must be > 0, got " + std::to_string(fv));
  if (m_max < 1) invalid("m_max must be >= 1");
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(m_max));
  for (int m = 1; m <= m_max; ++m) {
    out.push_back(std::abs(fs - m * fv));
    out.push_back(std::abs(fs + m * fv));
  }
  return out;
}

double rotor_frequency(double fs, double slip, int pole_pairs) { return fs * (1.0 - slip) / pole_pairs; }

Recording synthesize(const MachineSpec& machine, const OperatingPoint& op, const FaultSpec& fault,
                     std::optional<double> noise_snr_db, std::uint64_t seed, const SynthesisParams& params) {
  machine.validate();
  fault.validate();
  if (!(op.slip >= 0.0 && op.slip < 1.0))
    throw Error(Errc::InvalidSlip, kModule, "slip " + std::to_string(op.slip) + " outside [0, 1)");
  if (noise_snr_db && !std::isfinite(*noise_snr_db)) invalid("noise_snr_db must be finite");

  const std::size_t n = machine.sample_count();
  const double sr = machine.sample_rate;
  const double fs = machine.supply_frequency;
  const double amp = machine.rated_current;
  const double s = op.slip;
  const double fr = rotor_frequency(fs, s, machine.pole_pairs);
  const std::array<double, 3> phase_offsets{0.0, -kTwoPi / 3.0, kTwoPi / 3.0};
  auto constant = [](double a) { return [a](std::size_t) { return a; }; };

  Recording rec;
  rec.sample_rate = sr;
  rec.label = fault;
  rec.operating_point = op;
  rec.seed = seed;
  rec.channels.assign(4, std::vector<double>(n, 0.0));

  for (std::size_t c = 0; c < 3; ++c) {
    auto& x = rec.channels[c];
    const double phi = phase_offsets[c];
    add_tone(x, sr, fs, phi, constant(amp));
    switch (fault.kind) {
      case FaultKind::BrokenBars: {
        const double a = fault.severity * params.kappa_brb * amp;
        const auto [lo, hi] = brb_sidebands(fs, s);
        add_tone(x, sr, lo, phi, constant(a));
        add_tone(x, sr, hi, phi, constant(a));
        break;
      }
      case FaultKind::Eccentricity: {
        // rotor-frequency sidebands f_s +- f_r; dynamic eccentricity rotates
        // with the rotor and is modulated at the slip frequency, mixed carries
        // half of each contribution
        const double a = fault.severity * params.kappa_ecc * amp;
        double depth = 0.0;
        if (fault.eccentricity == EccentricityType::Dynamic) depth = params.dynamic_depth;
        if (fault.eccentricity == EccentricityType::Mixed) depth = 0.5 * params.dynamic_depth;
        const double wm = kTwoPi * s * fs / sr;
        auto envelope = [a, depth, wm](std::size_t i) {
          return a * (1.0 + depth * std::cos(wm * static_cast<double>(i)));
        };
        add_tone(x, sr, fs - fr, phi, envelope);
        add_tone(x, sr, fs + fr, phi, envelope);
        break;
      }
      default: break;
    }
  }

  auto& vib = rec.channels[3];
  add_tone(vib, sr, fr, 0.0, constant(params.vibration_amplitude));
  if (fault.kind == FaultKind::Bearing) {
    const auto freqs = bearing_frequencies(fs, fault.fv, params.bearing_harmonics);
    double a = fault.severity * params.kappa_bear * params.vibration_amplitude;
    for (std::size_t m = 0; m < freqs.size(); m += 2) {
      add_tone(vib, sr, freqs[m], 0.0, constant(a));
      add_tone(vib, sr, freqs[m + 1], 0.0, constant(a));
      a *= params.bearing_decay;
    }
  }

  if (noise_snr_db) {
    const double ratio = std::pow(10.0, *noise_snr_db / 10.0);
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      auto& x = rec.channels[c];
      double power = 0.0;
      for (double v : x) power += v * v;
      power /= static_cast<double>(n);
      const double sigma = std::sqrt(power / ratio);
      Rng rng(derive_seed(seed, c));
      for (double& v : x) v += sigma * rng.normal();
    }
  }
  return rec;
}

std::vector<Recording> generate_catalog(const MachineSpec& machine, std::uint64_t seed,
                                        const CatalogOptions& options) {
  machine.validate();
  struct Entry {
    double load;
    FaultSpec fault;
  };
  std::vector<Entry> grid;
  for (double load : options.loads) grid.push_back({load, FaultSpec::healthy()});
  for (auto type : {EccentricityType::Static, EccentricityType::Dynamic, EccentricityType::Mixed})
    for (double load : options.loads)
      for (int level = 1; level <= 4; ++level) grid.push_back({load, FaultSpec::make_eccentricity(type, level)});
  for (double load : options.loads)
    for (int bars = 1; bars <= 3; ++bars) grid.push_back({load, FaultSpec::make_broken_bars(bars)});
  for (auto site : {BearingSite::Ball, BearingSite::Inner, BearingSite::Outer})
    for (double load : options.loads)
      for (int level = 1; level <= 3; ++level)
        grid.push_back({load, FaultSpec::make_bearing(site, level, options.bearing_fv.of(site))});

  const std::size_t reps = static_cast<std::size_t>(std::max(0, options.replicates));
  std::vector<Recording> out(reps * grid.size());
  parallel_for(out.size(), [&](std::size_t idx) {
    const std::size_t rep = idx / grid.size();
    const auto& entry = grid[idx % grid.size()];
    const std::uint64_t rec_seed = derive_seed(seed, idx);
    Recording rec = synthesize(machine, options.slip_map.at(entry.load), entry.fault, options.noise_snr_db,
                               rec_seed, options.params);
    char id[96];
    std::snprintf(id, sizeof id, "r%zu-%03zu-%s-load%g-lvl%d", rep, idx % grid.size(),
                  entry.fault.condition().c_str(), entry.load, severity_level(entry.fault));
    rec.id = id;
    out[idx] = std::move(rec);
  });
  return out;
}

}  // namespace imfault::sim
