#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imfault {

enum class Errc {
  EmptySignal,
  NonFinite,
  AsymmetricSpectrum,
  ShapeMismatch,
  InvalidSpec,
  InvalidSlip,
  InvalidFv,
  CutoffAboveNyquist,
  ShiftTooLarge,
  NonPositiveScale,
  NegativeSigma,
  EmptyWindow,
  NoSpectralContent,
  ZeroPower,
  RecordingTooShort,
  ZeroVector,
  TooFewWindows,
  NegativeWeight,
  EmptyDataset,
  FeatureDimMismatch,
  EmptyCatalog,
  UndefinedMetric,
  IoError,
  InvalidConfig,
  ParseError,
  ChannelMismatch,
};

std::string_view to_string(Errc code);

// Every error carries the module that raised it. what() reads
// "<module>: <Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string_view module, const std::string& detail);

  Errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string module_;
  std::string detail_;
};

}  // namespace imfault
