#include "imfault/recording_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "imfault/error.hpp"
#include "imfault/parallel.hpp"

namespace imfault::sim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModule = "machine-sim";

[[noreturn]] void io_error(const std::string& what) { throw Error(Errc::IoError, kModule, what); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error("cannot write " + path.string());
  out << content;
  if (!out) io_error("write failed for " + path.string());
}

json fault_to_json(const FaultSpec& f) {
  json j{{"kind", to_string(f.kind)}, {"condition", f.condition()}, {"severity", f.severity}};
  if (f.kind == FaultKind::Eccentricity) j["subtype"] = to_string(f.eccentricity);
  if (f.kind == FaultKind::BrokenBars) j["broken_bars"] = f.broken_bars;
  if (f.kind == FaultKind::Bearing) {
    j["site"] = to_string(f.site);
    j["fv"] = f.fv;
  }
  return j;
}

FaultSpec fault_from_json(const json& j) {
  FaultSpec f;
  f.kind = fault_kind_from_string(j.at("kind").get<std::string>());
  f.severity = j.at("severity").get<double>();
  if (f.kind == FaultKind::Eccentricity) f.eccentricity = eccentricity_from_string(j.at("subtype").get<std::string>());
  if (f.kind == FaultKind::BrokenBars) f.broken_bars = j.at("broken_bars").get<int>();
  if (f.kind == FaultKind::Bearing) {
    f.site = bearing_site_from_string(j.at("site").get<std::string>());
    f.fv = j.at("fv").get<double>();
  }
  f.validate();
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_recording_csv(const fs::path& path, const Recording& rec) {
  std::string out = "t";
  for (const auto& name : rec.channel_names) out += "," + name;
  out += '\n';
  const std::size_t n = rec.length();
  out.reserve(out.size() + n * 22 * (rec.channels.size() + 1));
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    auto r = std::to_chars(buf, buf + sizeof buf, static_cast<double>(i) / rec.sample_rate);
    out.append(buf, r.ptr);
    for (const auto& ch : rec.channels) {
      out += ',';
      r = std::to_chars(buf, buf + sizeof buf, ch[i]);
      out.append(buf, r.ptr);
    }
    out += '\n';
  }
  write_file(path, out);
}

Recording read_recording_csv(const fs::path& path) {
  const std::string text = read_file(path);
  Recording rec;
  rec.id = path.stem().string();
  rec.channel_names.clear();
  std::vector<double> times;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto parse_error = [&](const std::string& what) -> Error {
    return Error(Errc::ParseError, kModule, path.string() + " line " + std::to_string(line_no) + ": " + what);
  };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1) {
      std::size_t start = 0;
      std::vector<std::string> cols;
      while (true) {
        const std::size_t comma = line.find(',', start);
        cols.emplace_back(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (cols.empty() || cols.front() != "t") throw parse_error("header must start with 't'");
      rec.channel_names.assign(cols.begin() + 1, cols.end());
      if (rec.channel_names.empty()) throw parse_error("no channel columns");
      rec.channels.assign(rec.channel_names.size(), {});
      continue;
    }
    const char* p = line.data();
    const char* last = line.data() + line.size();
    const std::size_t expected = rec.channel_names.size() + 1;
    for (std::size_t col = 0; col < expected; ++col) {
      double v = 0.0;
      auto res = std::from_chars(p, last, v);
      if (res.ec != std::errc() || !std::isfinite(v))
        throw parse_error("column " + std::to_string(col + 1) + " is not a finite number");
      p = res.ptr;
      if (col + 1 < expected) {
        if (p == last || *p != ',') throw parse_error("expected " + std::to_string(expected) + " columns");
        ++p;
      }
      if (col == 0)
        times.push_back(v);
      else
        rec.channels[col - 1].push_back(v);
    }
    if (p != last) throw parse_error("trailing characters after " + std::to_string(expected) + " columns");
  }
  if (line_no == 0) throw Error(Errc::ParseError, kModule, path.string() + ": empty file");
  if (times.size() < 2) throw Error(Errc::ParseError, kModule, path.string() + ": need at least two samples");
  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw Error(Errc::ParseError, kModule, path.string() + ": time column is not increasing");
  double sr = static_cast<double>(times.size() - 1) / span;
  const double rounded = std::round(sr);
  if (std::abs(sr - rounded) <= 1e-6 * rounded) sr = rounded;
  rec.sample_rate = sr;
  return rec;
}

void write_dataset(const fs::path& dir, const MachineSpec& machine, const std::vector<Recording>& recordings) {
  std::error_code ec;
  if (!dir.parent_path().empty() && !fs::exists(dir.parent_path()))
    io_error("parent directory does not exist: " + dir.parent_path().string());
  fs::create_directories(dir / "recordings", ec);
  if (ec) io_error("cannot create " + (dir / "recordings").string() + ": " + ec.message());

  json manifest;
  manifest["format"] = "imfault-dataset/1";
  manifest["machine"] = {{"supply_frequency", machine.supply_frequency},
                         {"pole_pairs", machine.pole_pairs},
                         {"rated_current", machine.rated_current},
                         {"sample_rate", machine.sample_rate},
                         {"duration", machine.duration}};
  json entries = json::array();
  for (const auto& rec : recordings) {
    entries.push_back({{"id", rec.id},
                       {"file", "recordings/" + rec.id + ".csv"},
                       {"fault", fault_to_json(rec.label)},
                       {"load_torque", rec.operating_point.load_torque},
                       {"slip", rec.operating_point.slip},
                       {"seed", rec.seed},
                       {"samples", rec.length()}});
  }
  manifest["recordings"] = std::move(entries);
  json counts = json::object();
  for (const auto& [cond, n] : condition_counts(recordings)) counts[cond] = n;
  manifest["counts"] = std::move(counts);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  parallel_for(recordings.size(), [&](std::size_t i) {
    write_recording_csv(dir / "recordings" / (recordings[i].id + ".csv"), recordings[i]);
  });
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, kModule, manifest_path.string() + ": " + e.what());
  }
  Dataset ds;
  try {
    const auto& m = manifest.at("machine");
    ds.machine.supply_frequency = m.at("supply_frequency").get<double>();
    ds.machine.pole_pairs = m.at("pole_pairs").get<int>();
    ds.machine.rated_current = m.at("rated_current").get<double>();
    ds.machine.sample_rate = m.at("sample_rate").get<double>();
    ds.machine.duration = m.at("duration").get<double>();
    const auto& entries = manifest.at("recordings");
    ds.recordings.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      auto& rec = ds.recordings[i];
      rec.id = e.at("id").get<std::string>();
      rec.label = fault_from_json(e.at("fault"));
      rec.operating_point.load_torque = e.at("load_torque").get<double>();
      rec.operating_point.slip = e.at("slip").get<double>();
      rec.seed = e.at("seed").get<std::uint64_t>();
    }
    parallel_for(entries.size(), [&](std::size_t i) {
      Recording data = read_recording_csv(dir / entries[i].at("file").get<std::string>());
      auto& rec = ds.recordings[i];
      rec.channel_names = std::move(data.channel_names);
      rec.channels = std::move(data.channels);
      rec.sample_rate = ds.machine.sample_rate;
    });
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, kModule, manifest_path.string() + ": " + e.what());
  }
  ds.machine.validate();
  return ds;
}

std::map<std::string, std::size_t> condition_counts(const std::vector<Recording>& recordings) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : recordings) ++counts[r.label.condition()];
  return counts;
}

}  // namespace imfault::sim
