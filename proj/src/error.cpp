#include "geolab/error.hpp"

namespace geolab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PointOffSurface: return "PointOffSurface";
    case ErrorKind::ChartUnavailable: return "ChartUnavailable";
    case ErrorKind::LeftChartDomain: return "LeftChartDomain";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorKind::NotAGeodesic: return "NotAGeodesic";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::AmbiguousCluster: return "AmbiguousCluster";
    case ErrorKind::OffsetTooLarge: return "OffsetTooLarge";
    case ErrorKind::VertexNotOnStrand: return "VertexNotOnStrand";
    case ErrorKind::D0TooLarge: return "D0TooLarge";
    case ErrorKind::NotReducible: return "NotReducible";
    case ErrorKind::OriginMismatch: return "OriginMismatch";
    case ErrorKind::NotGPlus: return "NotGPlus";
    case ErrorKind::EtaTooLarge: return "EtaTooLarge";
    case ErrorKind::FlowLeftSurface: return "FlowLeftSurface";
    case ErrorKind::SeedBudgetExhausted: return "SeedBudgetExhausted";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace geolab
