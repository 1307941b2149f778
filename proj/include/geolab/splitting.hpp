#pragma once

#include <array>
#include <memory>
#include <vector>

#include "geolab/network.hpp"

namespace geolab {

/// Detour of one chart-straight strand around a vertex. In the strand frame
/// (origin O at the vertex, unit direction d, normal nu = d rotated by +90
/// degrees in the chart plane) the detour is the graph s -> O + s d + u(s) nu:
///   u = 0 outside [s0, s3]
///   rho   on [s0, s1]: quintic Hermite, C^2 to the strand at P and to sigma at p_t
///   sigma on [s1, s2]: the geodesic from p_t = p + t nu to q
///   tau   on [s2, s3]: quintic Hermite, C^2 to sigma at q and to the strand at Q
/// with s0 = -7r/8, s1 = -r/2, s2 = r/2, s3 = 7r/8 for ball radius r.
class DetourCurve {
 public:
  Vec3 origin, dir, normal;
  double radius = 0.0;
  double offset = 0.0;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int strand = 0;          // curve id in the network
  GeodesicCurve curve;     // sampled replacement for the whole strand

  /// u^{(k)}(s) for k = 0, 1, 2.
  double graph(double s, int k) const;
  Vec3 point(double s) const { return origin + s * dir + graph(s, 0) * normal; }
  Vec3 d1(double s) const { return dir + graph(s, 1) * normal; }
  Vec3 d2(double s) const { return graph(s, 2) * normal; }
  /// Signed geodesic curvature of the detour at s in the given metric.
  double curvature(const Surface& surface, double s) const;
  bool on_sigma(double s) const { return s >= s1 && s <= s2; }

  std::array<double, 6> rho{}, tau{};       // coefficients in x = (s - a) / L
  std::vector<double> sig_s, sig_v, sig_dv, sig_ddv;
};

struct DetourOptions {
  double ball_radius = 0.0;        // <= 0: working-ball rule
  double max_ball_radius = 0.5;
  int min_bridge_samples = 300;
};

/// Working-ball radius at a vertex: 0.9 x min(0.2 x injectivity estimate,
/// half the distance to the nearest other vertex, half the distance to curves
/// not through the vertex, distance to the ends of its open strands, the cap).
double working_ball_radius(const GeodesicNetwork& network, const VertexRecord& vertex, double cap = 0.5);

std::shared_ptr<const DetourCurve> build_detour(const Surface& surface, const GeodesicNetwork& network,
                                                const VertexRecord& vertex, int strand_id, double offset_t,
                                                const DetourOptions& options = {});

/// Conformal factor f = -chi(e) (e / lambda) k(s*) psi(s*) in Fermi data of
/// the detour: s* the nearest detour parameter, e the signed chart distance,
/// lambda the chart-normal / metric-normal cosine, chi a plateau bump in e
/// (1 on |e| <= d0/2, 0 for |e| >= d0), psi a plateau bump that is 1 on [s0, s3].
class ConformalFactorField final : public ConformalFactor {
 public:
  ConformalFactorField(std::shared_ptr<const DetourCurve> detour, Surface base, double d0);

  double value(const Vec3& x) const override;
  /// Exact in e; d/ds of the curvature profile by central differences.
  Vec3 gradient(const Vec3& x) const override;

  const DetourCurve& detour() const { return *detour_; }
  double d0() const { return d0_; }
  double psi_margin() const { return margin_; }
  const std::vector<double>& curvature_samples() const { return k_samples_; }
  /// Nearest detour parameter and signed chart distance.
  std::pair<double, double> fermi(const Vec3& x) const;
  /// k(s) psi(s) / lambda(s); zero off the bridges.
  double profile(double s) const;

 private:
  bool quick_reject(const Vec3& x) const;

  std::shared_ptr<const DetourCurve> detour_;
  Surface base_;
  double d0_;
  double margin_;
  double max_slope_ = 0.0;
  std::vector<double> k_samples_;
};

/// Largest admissible d0: half the distance from the bridges to the other
/// strands, below half the radius of curvature of the detour.
double max_admissible_d0(const DetourCurve& detour, const Surface& surface, const GeodesicNetwork& network);

/// d0 <= 0 picks min(max admissible, radius / 10). Throws D0TooLarge when the
/// requested tube would touch another strand or leave the working ball.
std::shared_ptr<const ConformalFactorField> conformal_factor_for(std::shared_ptr<const DetourCurve> detour,
                                                                 const Surface& surface,
                                                                 const GeodesicNetwork& network, double d0 = 0.0);

struct SplitStep {
  Vec3 vertex;
  int order_before = 0;
  int strand_id = 0;
  double ball_radius = 0.0;
  double offset_t = 0.0;
  double d0 = 0.0;
  double max_f = 0.0;
  double curvature_residual_before = 0.0;  // max |k| of the detour in g
  double curvature_residual_after = 0.0;   // max |k| of the detour in e^{2f} g
  std::vector<int> vertex_orders_after;
};

struct SplitResult {
  Surface surface;
  GeodesicNetwork network;
  std::vector<SplitStep> transcript;
  std::vector<std::shared_ptr<const ConformalFactorField>> factors;
};

struct SplitOptions {
  double offset_fraction = 0.2;   // t = offset_fraction x ball radius
  double max_ball_radius = 0.5;
  double clustering_fraction = 1e-3;  // clustering radius relative to the ball
};

/// One split of an order >= 3 vertex: detours the lowest-index strand through
/// it and composes the metric with the new conformal factor.
SplitResult split_vertex(const Surface& surface, const GeodesicNetwork& network, std::size_t vertex_index,
                         const SplitOptions& options = {});

/// Splits repeatedly until the vertex and all vertices created from it have order 2.
SplitResult reduce_vertex(const Surface& surface, const GeodesicNetwork& network, std::size_t vertex_index,
                          const SplitOptions& options = {});

}  // namespace geolab
