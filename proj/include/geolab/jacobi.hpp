#pragma once

#include <string>
#include <vector>

#include "geolab/geodesic.hpp"
#include "geolab/network.hpp"

namespace geolab {

struct SpectrumReport {
  std::vector<double> eigenvalues;       // lowest eigenvalues, ascending
  std::vector<double> error_estimates;   // per eigenvalue, from a half-grid comparison
  int index = 0;
  int nullity = 0;
  int grid_size = 0;
  double zero_tolerance = 0.0;
  int cover_multiplicity = 1;
  double period = 0.0;                   // m * length
  double max_abs_curvature = 0.0;
};

struct SpectrumOptions {
  int count = 12;                 // eigenvalues to report
  double geodesic_tolerance = 1e-6;
};

/// Polarized second variation: integral of phi' psi' - K phi psi over the
/// curve. Inputs with m * samples entries live on the m-fold cover.
double second_variation(const GeodesicCurve& curve, const std::vector<double>& phi,
                        const std::vector<double>& psi, const Surface& surface,
                        double geodesic_tolerance = 1e-6);

/// Lowest eigenvalues of -phi'' - K phi, periodic on [0, m * length], from the
/// fourth-order (Numerov) cyclic pencil on an N-point grid.
SpectrumReport jacobi_spectrum(const GeodesicCurve& curve, const Surface& surface, int cover_multiplicity,
                               int grid_size, const SpectrumOptions& options = {});

struct NetworkIndex {
  int index = 0;
  std::vector<int> multiplicities;
  std::vector<SpectrumReport> spectra;  // per curve, primitive parametrization
  std::string form;                     // weighted form descriptor
};

/// index(Gamma) = sum of per-curve indices; positive weights m_gamma do not
/// change the negative-subspace dimension of sum m_gamma Q_gamma.
NetworkIndex network_index(const GeodesicNetwork& network, const std::vector<int>& multiplicities,
                           int grid_size = 1024);

/// True iff 2 pi m / sqrt(k) lies in pi Z, i.e. 2 m / sqrt(k) is an integer.
/// This is conservative: a zero mode on the m-fold cover needs m / sqrt(k)
/// to be an integer.
bool degeneracy_criterion_mk(double k, int m);

/// Sharp version of the criterion above (m / sqrt(k) integer).
bool degeneracy_exact_mk(double k, int m);

/// Pencil (A, B) with A = S - M_K and B = M_N for the given periodic
/// curvature samples; exposed for testing against dense solvers.
void build_jacobi_pencil(const std::vector<double>& K, double h, std::vector<double>& a_diag,
                         std::vector<double>& a_off, std::vector<double>& b_diag, std::vector<double>& b_off);

/// Lowest `count` generalized eigenvalues of the cyclic pencil by bisection
/// on inertia counts.
std::vector<double> pencil_lowest_eigenvalues(const std::vector<double>& a_diag, const std::vector<double>& a_off,
                                              const std::vector<double>& b_diag, const std::vector<double>& b_off,
                                              int count, double lower_bound);

}  // namespace geolab
