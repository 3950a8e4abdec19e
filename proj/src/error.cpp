#include "imfault/error.hpp"

namespace imfault {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptySignal: return "EmptySignal";
    case Errc::NonFinite: return "NonFinite";
    case Errc::AsymmetricSpectrum: return "AsymmetricSpectrum";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidSlip: return "InvalidSlip";
    case Errc::InvalidFv: return "InvalidFv";
    case Errc::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case Errc::ShiftTooLarge: return "ShiftTooLarge";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::NegativeSigma: return "NegativeSigma";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::NoSpectralContent: return "NoSpectralContent";
    case Errc::ZeroPower: return "ZeroPower";
    case Errc::RecordingTooShort: return "RecordingTooShort";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::TooFewWindows: return "TooFewWindows";
    case Errc::NegativeWeight: return "NegativeWeight";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::FeatureDimMismatch: return "FeatureDimMismatch";
    case Errc::EmptyCatalog: return "EmptyCatalog";
    case Errc::UndefinedMetric: return "UndefinedMetric";
    case Errc::IoError: return "IoError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ParseError: return "ParseError";
    case Errc::ChannelMismatch: return "ChannelMismatch";
  }
  return "Unknown";
}

namespace {
std::string compose(Errc code, std::string_view module, const std::string& detail) {
  std::string out(module);
  out += ": ";
  out += to_string(code);
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}
}  // namespace

Error::Error(Errc code, std::string_view module, const std::string& detail)
    : std::runtime_error(compose(code, module, detail)),
      code_(code),
      module_(module),
      detail_(detail) {}

}  // namespace imfault
