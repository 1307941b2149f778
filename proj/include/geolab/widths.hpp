#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geolab/geodesic.hpp"

namespace geolab {

/// Level circles {x3 = c} of an M_k instance, c swept uniformly over
/// [-h, h] with h = k^(1/(2 mu)); the two endpoint circles are points.
struct OneSweepout {
  std::string family;
  std::vector<double> parameters;  // t in [0, 1]
  std::vector<double> heights;     // c(t)
  std::vector<double> masses;
  double max_mass = 0.0;
  double argmax_t = 0.0;
  double argmax_height = 0.0;
  int samples = 0;
};

/// Every width figure carries one of these two labels.
inline constexpr const char* kUpperBoundLabel = "upper bound (constructed sweepout)";
inline constexpr const char* kReferenceLabel = "reference (paper value)";

struct WidthBound {
  int p = 0;
  double upper_bound = 0.0;
  std::string construction;
  std::string label = kUpperBoundLabel;
  std::optional<double> reference_value;
  std::string reference_label;
  double grid_max = 0.0;       // simplex grid search over sum_i mass(sigma(t_i))
  int grid_points_per_axis = 0;
  bool grid_consistent = true; // grid_max <= upper_bound + 1e-9
};

/// points_per_curve: samples on each level circle used for its length.
OneSweepout level_circle_sweepout(const Surface& mk_surface, int samples, int points_per_curve = 2048);

/// Guth p-sweepout sigma_p(t_1..t_p) = sum sigma(t_i). For p <= 6 the
/// ordered simplex is enumerated with grid_points_per_axis nodes per axis as
/// a cross-check; 0 disables the enumeration.
WidthBound guth_p_sweepout_bound(const OneSweepout& sweepout, int p, int grid_points_per_axis = 20);

/// 2 pi floor(sqrt(p)).
double round_sphere_width(int p);

struct FoundGeodesic {
  int first_seed = 0;        // seed index that produced this class first
  int hits = 0;              // seeds that landed in the class
  double length = 0.0;
  double closure_residual = 0.0;
  double max_abs_height = 0.0;
  double min_abs_height = 0.0;
  bool intersects_equator = false;
  bool is_gamma0 = false;     // length 2 pi and within the clustering radius of {x3 = 0}
  int self_vertices = 0;
  int index = 0;
  int nullity = 0;
  std::vector<double> eigenvalues;
  GeodesicCurve curve;
};

struct WidthRow {
  int l = 0;
  double upper_bound = 0.0;
  double reference = 0.0;
  double gap = 0.0;
};

struct MkExperimentOptions {
  double latitude_band = 0.25;  // seeds have |x3| <= band * h
  int close_samples = 4096;
  double close_tolerance = 1e-10;
  int spectrum_grid = 1024;
  int p = 5;                    // rows of the width table
  int sweepout_samples = 512;
  double short_gap = 0.1;       // classes shorter than 2 pi + gap must be gamma_0
  int threads = 0;              // <= 0: GEOLAB_THREADS or hardware concurrency
};

struct MkSeed {
  Vec3 point;
  Vec3 direction;
};

struct MkExperimentReport {
  double k = 0.0, mu = 1.0, length_cap = 0.0;
  int n_seeds = 0;
  std::uint64_t seed = 0;
  MkExperimentOptions options;
  double clustering_radius = 0.0;
  double dedup_tolerance = 0.0;
  std::vector<MkSeed> seeds;
  int converged = 0;
  int failed = 0;
  int above_cap = 0;
  std::vector<FoundGeodesic> found;  // sorted by length, ties by first_seed
  std::vector<WidthRow> widths;
  bool all_intersect_equator = true;
  bool short_class_is_gamma0 = true;   // every class below 2 pi + gap is gamma_0
  bool gamma0_found = false;
  int gamma0_class = -1;               // is_gamma0 class closest to {x3 = 0}
  int gamma0_classes = 0;              // > 1 only near a degenerate equator
  bool index_bound = true;             // index(l gamma_0) <= l for l <= p
  bool vertex_bound = true;            // #Vert(l gamma_0) <= l
  bool shortest_is_simple = true;      // Calabi-Cao sanity
  bool widths_dominate_reference = true;
  bool pass() const;
};

/// Deterministic seeds: golden-ratio sequences over (height, azimuth,
/// direction angle) with a Cranley-Patterson shift keyed by `seed`.
std::vector<MkSeed> mk_seeds(const Surface& mk_surface, int n_seeds, std::uint64_t seed, double latitude_band);

MkExperimentReport mk_multiplicity_experiment(double k, double mu, double length_cap, int n_seeds,
                                              std::uint64_t seed, const MkExperimentOptions& options = {});

/// Circumference of the plane ellipse with semi-axes (a, b), trapezoidal rule
/// on the periodic integrand refined until two levels agree to tol.
double ellipse_circumference(double a, double b, double tol = 1e-14);

struct EllipsoidGeodesic {
  int plane = 0;                 // gamma_i lies in {x_i = 0}
  std::array<double, 2> semi_axes{};
  double length = 0.0;
  double quadrature_length = 0.0;
  double length_error = 0.0;
  double plane_residual = 0.0;   // max |x_i| along the curve
  int attempts = 0;
  std::array<int, 3> index{};    // covers m = 1, 2, 3
  std::array<int, 3> nullity{};
  GeodesicCurve curve;
};

struct MultiplicityRow {
  int p = 0;
  double omega_reference = 0.0;
  std::vector<std::array<int, 3>> representations;  // admissible (m1, m2, m3)
  bool all_ones_admissible = false;
  bool multiplicity_forced = false;  // every admissible representation has some m_i >= 2
};

struct EllipsoidOptions {
  int seed_budget = 16;
  int close_samples = 4096;
  double close_tolerance = 1e-10;
  int spectrum_grid = 1024;
  int max_p = 16;
};

struct EllipsoidReport {
  std::array<double, 3> a{};
  std::vector<EllipsoidGeodesic> geodesics;
  std::vector<MultiplicityRow> multiplicity;
  bool lengths_match = true;     // within 1e-6 of quadrature
  bool nondegenerate = true;     // nullity 0 for m <= 3
  bool distinct_lengths = true;
  bool pass() const;
};

/// Shoots for the three coordinate-plane geodesics E cap {x_i = 0}; throws
/// SeedBudgetExhausted when one of them is not found within the budget.
EllipsoidReport ellipsoid_experiment(double a1, double a2, double a3, const EllipsoidOptions& options = {});

}  // namespace geolab
