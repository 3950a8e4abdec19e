#pragma once
// Dataset directory layout:
//   manifest.json           machine spec + one entry per recording
//   recordings/<id>.csv     t,phase_a,phase_b,phase_c,vibration

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "imfault/machine_sim.hpp"

namespace imfault::sim {

struct Dataset {
  MachineSpec machine;
  std::vector<Recording> recordings;
};

// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_recording_csv(const std::filesystem::path& path, const Recording& rec);
// Reads channels and infers the sample rate from the t column. Label fields
// are left default; the manifest carries them.
Recording read_recording_csv(const std::filesystem::path& path);

void write_dataset(const std::filesystem::path& dir, const MachineSpec& machine,
                   const std::vector<Recording>& recordings);
Dataset read_dataset(const std::filesystem::path& dir);

std::map<std::string, std::size_t> condition_counts(const std::vector<Recording>& recordings);

}  // namespace imfault::sim
