#pragma once

#include <string>
#include <vector>

#include "geolab/geodesic.hpp"

namespace geolab {

/// One local strand through a vertex: curve id, sampling parameter
/// (fractional sample index) and unit tangent at the crossing.
struct StrandRef {
  int curve = 0;
  double parameter = 0.0;
  Vec3 tangent;
};

struct VertexRecord {
  Vec3 position;
  int order = 0;
  std::vector<double> strand_angles;  // tangent line angles in a local frame, radians
  bool transverse = true;
  double min_angle = 0.0;             // smallest pairwise angle between strand lines
  std::vector<StrandRef> strands;
};

struct GeodesicNetwork {
  Surface surface;
  std::vector<GeodesicCurve> curves;
  std::vector<VertexRecord> vertices;
  double clustering_radius = 0.0;
  double angle_threshold = 1e-2;
};

struct DetectOptions {
  double clustering_radius = 0.0;  // <= 0: 1e-4 x surface diameter
  double angle_threshold = 1e-2;
};

/// Every pairwise and self intersection of the curves, clustered. Each
/// cluster's order is the number of distinct local strands through it.
std::vector<VertexRecord> detect_vertices(const Surface& surface, const std::vector<GeodesicCurve>& curves,
                                          const DetectOptions& options = {});

/// Detects vertices and checks that no two curves share an image.
GeodesicNetwork make_network(const Surface& surface, std::vector<GeodesicCurve> curves,
                             const DetectOptions& options = {});

/// Sum over vertices of C(ord, 2).
long weighted_vertex_count(const std::vector<VertexRecord>& vertices);

/// Every vertex has order 2 and is transverse.
bool is_g_plus(const GeodesicNetwork& network);

struct AppendixReport {
  int p = 0;
  double K0 = 0.0;
  double omega1 = 0.0;
  long edge_count = 0;              // edges counted with multiplicity
  double edge_bound = 0.0;          // p * omega1 / pi
  bool edge_bound_checked = false;  // false when the curvature hypothesis fails
  bool edge_bound_pass = false;
  double length_bound = 0.0;        // pi * p / sqrt(K0)
  bool length_bound_checked = false;
  std::vector<double> lengths;
  std::vector<bool> length_pass;
  bool length_bound_pass = false;
  double sampled_min_curvature = 0.0;
  double sampled_max_curvature = 0.0;
  std::vector<std::string> hypothesis_violations;
};

/// Edge bound e_G <= p * omega1 / pi (requires 1 >= K >= c0 > 0 on the sampled
/// curves) and per-curve length bound length <= pi * p / sqrt(K0) (requires
/// K >= K0 > 0). Violated hypotheses are reported and the affected bound is
/// skipped rather than raised.
AppendixReport check_appendix_bounds(const GeodesicNetwork& network, int p, double K0, double omega1,
                                     const std::vector<int>& multiplicities = {});

/// Symmetric Hausdorff distance between two sampled curves.
double hausdorff_distance(const GeodesicCurve& a, const GeodesicCurve& b, double early_exit = 0.0);

}  // namespace geolab
