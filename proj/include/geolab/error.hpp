#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geolab {

enum class ErrorKind {
  PointOffSurface,
  ChartUnavailable,
  LeftChartDomain,
  StepTooLarge,
  NoConvergence,
  DegenerateJacobian,
  NotAGeodesic,
  GridTooCoarse,
  AmbiguousCluster,
  OffsetTooLarge,
  VertexNotOnStrand,
  D0TooLarge,
  NotReducible,
  OriginMismatch,
  NotGPlus,
  EtaTooLarge,
  FlowLeftSurface,
  SeedBudgetExhausted,
  ConfigInvalid,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind; the CLI
// renders it as {"error": {"kind": ..., "message": ...}}.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace geolab
