#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "geolab/network.hpp"

namespace geolab {

using AxisField = std::function<Vec3(double)>;
using PlaneField = std::function<Vec3(double, double)>;

/// U(x, y) = u1(x) + u2(y) - u1(0). Throws OriginMismatch when u1(0) != u2(0).
PlaneField cross_extension(AxisField u_axis1, AxisField u_axis2);

/// Scalar normal profile per curve, one value per sample; the normal field
/// along curve c is phi_c * n_c with n_c the tangent rotated by +90 degrees.
using NormalProfiles = std::vector<std::vector<double>>;

/// Crossing data: the refined intersection point, both strands' forward unit
/// tangents there and the tangential coefficients t0, t1 solving
/// X0 + t0 T0 = X1 + t1 T1.
struct CrossingFrame {
  Vec3 point;
  std::array<int, 2> curves{};
  std::array<double, 2> params{};       // fractional sample index at the crossing
  std::array<Vec3, 2> tangents;
  std::array<double, 2> tangential{};   // t0, t1
  Vec3 e1, e2;                          // orthonormal tangent basis at the crossing
};

class AmbientField {
 public:
  AmbientField() = default;
  AmbientField(std::function<Vec3(const Vec3&)> eval, std::string support_description)
      : support_description(std::move(support_description)), eval_(std::move(eval)) {}

  Vec3 evaluate(const Vec3& x) const { return eval_ ? eval_(x) : Vec3{}; }
  /// Pointwise sum; bookkeeping is taken from *this.
  AmbientField plus(const AmbientField& other) const;

  std::string support_description;
  double eta = 0.0;             // crossing-ball radius actually used
  double delta = 0.0;
  double tube_radius = 0.0;
  double support_measure = 0.0; // curve length inside the crossing balls' cutoff support
  std::vector<CrossingFrame> crossings;

 private:
  std::function<Vec3(const Vec3&)> eval_;
};

/// Ambient extension of normal fields over a network in G+:
///   crossing balls B_eta: cross formula in exponential coordinates whose axes
///     are the two strands, strand values X + t T with the tangential
///     coefficients from the transverse 2x2 system;
///   tubes around the curves: first-order normal transport of X;
///   radial plateau cutoffs (1 on B_{5 eta/8}, 0 off B_{7 eta/8}) blend the two.
/// The ball radius used is min(eta, delta / (3.5 x crossings)), so the curve
/// length carrying tangential parts stays within delta.
AmbientField extend_normal_field(const GeodesicNetwork& network, const NormalProfiles& normal_fields, double delta,
                                 double eta);

struct VariationReport {
  double Q_form = 0.0;
  double Q_flow = 0.0;
  double rel_error = 0.0;  // |Q_flow - Q_form| / max(|Q_form|, total length)
  double support_measure = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double total_length = 0.0;
};

struct FlowOptions {
  int substeps = 4;
  double surface_tolerance = 1e-4;  // off-surface drift per step before re-projection
};

/// Total length of the network curves after flowing every sample for time tau.
double flowed_length(const GeodesicNetwork& network, const AmbientField& field, double tau,
                     const FlowOptions& options = {});

/// Second variation from the quadratic form against the centered second
/// difference of total length under the flow of the ambient field.
VariationReport verify_second_variation_match(const GeodesicNetwork& network, const NormalProfiles& normal_fields,
                                              const AmbientField& field, double flow_step,
                                              const FlowOptions& options = {});

}  // namespace geolab
