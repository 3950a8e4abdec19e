#pragma once
// Synthetic three-phase induction machine recordings with injected
// eccentricity, broken-rotor-bar and bearing signatures.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace imfault::sim {

struct MachineSpec {
  double supply_frequency = 50.0;  // Hz
  int pole_pairs = 2;
  double rated_current = 10.0;     // A, amplitude of each phase current
  double sample_rate = 10000.0;    // Hz
  double duration = 1.0;           // s

  void validate() const;
  std::size_t sample_count() const;
};

struct OperatingPoint {
  double load_torque = 0.0;  // N*m
  double slip = 0.01;
};

// Load torque to slip. Strictly increasing so load classes stay distinguishable.
struct LoadSlipMap {
  std::vector<std::pair<double, double>> points{{0.0, 0.01}, {10.0, 0.02}, {30.0, 0.04}, {40.0, 0.05}};

  double slip_for(double load_torque) const;
  OperatingPoint at(double load_torque) const { return {load_torque, slip_for(load_torque)}; }
};

enum class FaultKind { Healthy, Eccentricity, BrokenBars, Bearing };
enum class EccentricityType { Static, Dynamic, Mixed };
enum class BearingSite { Ball, Inner, Outer };

// Output classes of the type head, in head order.
enum class FaultType { Eccentricity = 0, BarBreakage = 1, Bearing = 2 };
inline constexpr std::size_t kFaultTypeCount = 3;

struct FaultSpec {
  FaultKind kind = FaultKind::Healthy;
  EccentricityType eccentricity = EccentricityType::Static;
  int broken_bars = 0;
  BearingSite site = BearingSite::Ball;
  double severity = 0.0;  // normalized to [0, 1]
  double fv = 0.0;        // bearing characteristic frequency, Hz

  static FaultSpec healthy();
  // level 1..4 -> 10/20/30/40 % eccentricity
  static FaultSpec make_eccentricity(EccentricityType type, int level);
  static FaultSpec make_broken_bars(int count);
  // level 1..3 -> defect size code 7/14/21
  static FaultSpec make_bearing(BearingSite site, int level, double fv);

  void validate() const;
  bool is_fault() const { return kind != FaultKind::Healthy; }
  std::optional<FaultType> type() const;
  // e.g. "healthy", "eccentricity_dynamic", "broken_bars_2", "bearing_outer"
  std::string condition() const;
  // "healthy", "eccentricity", "bar_breakage", "bearing"
  std::string family() const;

  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

std::string to_string(FaultKind kind);
std::string to_string(EccentricityType type);
std::string to_string(BearingSite site);
std::string to_string(FaultType type);
FaultKind fault_kind_from_string(const std::string& s);
EccentricityType eccentricity_from_string(const std::string& s);
BearingSite bearing_site_from_string(const std::string& s);

inline const std::array<std::string, 4> kChannelNames{"phase_a", "phase_b", "phase_c", "vibration"};

struct Recording {
  std::string id;
  std::vector<std::string> channel_names{kChannelNames.begin(), kChannelNames.end()};
  std::vector<std::vector<double>> channels;
  double sample_rate = 0.0;
  FaultSpec label;
  OperatingPoint operating_point;
  std::uint64_t seed = 0;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

struct SynthesisParams {
  double kappa_brb = 0.05;
  double kappa_ecc = 0.04;
  double kappa_bear = 0.5;
  double vibration_amplitude = 1.0;  // g, running-speed component of the vibration channel
  int bearing_harmonics = 3;         // m_max in |f_s +- m f_v|
  double bearing_decay = 0.5;        // amplitude ratio between consecutive m
  double dynamic_depth = 0.5;        // modulation depth of dynamic eccentricity
};

struct BearingFrequencies {
  double ball = 60.0;
  double inner = 120.0;
  double outer = 90.0;

  double of(BearingSite site) const;
};

// f_s [k (1 - s)/p +- s], both clamped to >= 0.
std::pair<double, double> brb_frequency(double fs, double slip, int pole_pairs, int k);
// (1 - 2s) f_s, (1 + 2s) f_s
std::pair<double, double> brb_sidebands(double fs, double slip);
// |f_s - m f_v|, |f_s + m f_v| for m = 1..m_max, in that order
std::vector<double> bearing_frequencies(double fs, double fv, int m_max);
double rotor_frequency(double fs, double slip, int pole_pairs);

// noise_snr_db == nullopt synthesizes noise-free channels.
Recording synthesize(const MachineSpec& machine, const OperatingPoint& op, const FaultSpec& fault,
                     std::optional<double> noise_snr_db, std::uint64_t seed,
                     const SynthesisParams& params = {});

struct CatalogOptions {
  int replicates = 1;
  std::optional<double> noise_snr_db = 30.0;
  std::array<double, 4> loads{0.0, 10.0, 30.0, 40.0};
  LoadSlipMap slip_map;
  BearingFrequencies bearing_fv;
  SynthesisParams params;
};

// Full condition grid, 100 recordings per replicate, deterministic order.
std::vector<Recording> generate_catalog(const MachineSpec& machine, std::uint64_t seed,
                                        const CatalogOptions& options = {});

}  // namespace imfault::sim
