#include "geolab/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace geolab {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void to_json(Json& j, const Vec3& v) { j = Json::array({v.x, v.y, v.z}); }

void to_json(Json& j, const GeodesicCurve& c) {
  j = Json{{"length", c.length},
           {"closure_residual", c.closure_residual},
           {"closed", c.closed},
           {"primitive", c.primitive},
           {"cover_multiplicity", c.cover_multiplicity},
           {"degenerate_shooting", c.degenerate_shooting},
           {"iterations", c.iterations},
           {"samples", c.samples.size()}};
}

void to_json(Json& j, const SpectrumReport& r) {
  j = Json{{"eigenvalues", r.eigenvalues},
           {"error_estimates", r.error_estimates},
           {"index", r.index},
           {"nullity", r.nullity},
           {"grid_size", r.grid_size},
           {"zero_tolerance", r.zero_tolerance},
           {"cover_multiplicity", r.cover_multiplicity},
           {"period", r.period},
           {"max_abs_curvature", r.max_abs_curvature}};
}

void to_json(Json& j, const VertexRecord& v) {
  Json strands = Json::array();
  for (const auto& s : v.strands) strands.push_back({{"curve", s.curve}, {"parameter", s.parameter}});
  j = Json{{"position", v.position},       {"order", v.order},         {"transverse", v.transverse},
           {"min_angle", v.min_angle},     {"strand_angles", v.strand_angles}, {"strands", strands}};
}

void to_json(Json& j, const AppendixReport& r) {
  std::vector<bool> pass(r.length_pass.begin(), r.length_pass.end());
  j = Json{{"p", r.p},
           {"K0", r.K0},
           {"omega1", r.omega1},
           {"edge_count", r.edge_count},
           {"edge_bound", r.edge_bound},
           {"edge_bound_checked", r.edge_bound_checked},
           {"edge_bound_pass", r.edge_bound_pass},
           {"length_bound", r.length_bound},
           {"length_bound_checked", r.length_bound_checked},
           {"lengths", r.lengths},
           {"length_pass", pass},
           {"length_bound_pass", r.length_bound_pass},
           {"sampled_min_curvature", r.sampled_min_curvature},
           {"sampled_max_curvature", r.sampled_max_curvature},
           {"hypothesis_violations", r.hypothesis_violations}};
}

void to_json(Json& j, const SplitStep& s) {
  j = Json{{"vertex", s.vertex},
           {"order_before", s.order_before},
           {"strand_id", s.strand_id},
           {"ball_radius", s.ball_radius},
           {"offset_t", s.offset_t},
           {"d0", s.d0},
           {"max_f", s.max_f},
           {"curvature_residual_before", s.curvature_residual_before},
           {"curvature_residual_after", s.curvature_residual_after},
           {"vertex_orders_after", s.vertex_orders_after}};
}

void to_json(Json& j, const VariationReport& r) {
  j = Json{{"Q_form", r.Q_form},   {"Q_flow", r.Q_flow}, {"rel_error", r.rel_error},
           {"support_measure", r.support_measure}, {"delta", r.delta}, {"eta", r.eta},
           {"total_length", r.total_length}};
}

void to_json(Json& j, const OneSweepout& s) {
  j = Json{{"family", s.family},         {"samples", s.samples},     {"max_mass", s.max_mass},
           {"argmax_t", s.argmax_t},     {"argmax_height", s.argmax_height},
           {"endpoint_masses", Json::array({s.masses.front(), s.masses.back()})}};
}

void to_json(Json& j, const WidthBound& b) {
  j = Json{{"p", b.p},
           {"upper_bound", b.upper_bound},
           {"label", b.label},
           {"construction", b.construction},
           {"grid_points_per_axis", b.grid_points_per_axis},
           {"grid_max", b.grid_max},
           {"grid_consistent", b.grid_consistent}};
  if (b.reference_value) {
    j["reference_value"] = *b.reference_value;
    j["reference_label"] = b.reference_label;
  }
}

void to_json(Json& j, const WidthRow& r) {
  j = Json{{"l", r.l},
           {"upper_bound", r.upper_bound},
           {"upper_bound_label", kUpperBoundLabel},
           {"reference", r.reference},
           {"reference_label", kReferenceLabel},
           {"gap", r.gap}};
}

void to_json(Json& j, const FoundGeodesic& f) {
  j = Json{{"first_seed", f.first_seed},
           {"hits", f.hits},
           {"length", f.length},
           {"closure_residual", f.closure_residual},
           {"max_abs_height", f.max_abs_height},
           {"min_abs_height", f.min_abs_height},
           {"intersects_equator", f.intersects_equator},
           {"is_gamma0", f.is_gamma0},
           {"self_vertices", f.self_vertices},
           {"index", f.index},
           {"nullity", f.nullity},
           {"eigenvalues", f.eigenvalues},
           {"degenerate_shooting", f.curve.degenerate_shooting}};
}

void to_json(Json& j, const MkExperimentReport& r) {
  Json seeds = Json::array();
  for (const auto& s : r.seeds) seeds.push_back({{"point", s.point}, {"direction", s.direction}});
  j = Json{{"surface", {{"type", "mk"}, {"k", r.k}, {"mu", r.mu}}},
           {"length_cap", r.length_cap},
           {"n_seeds", r.n_seeds},
           {"seed", r.seed},
           {"latitude_band", r.options.latitude_band},
           {"close_samples", r.options.close_samples},
           {"spectrum_grid", r.options.spectrum_grid},
           {"clustering_radius", r.clustering_radius},
           {"dedup_tolerance", r.dedup_tolerance},
           {"converged", r.converged},
           {"failed", r.failed},
           {"above_cap", r.above_cap},
           {"found", r.found},
           {"gamma0_class", r.gamma0_class},
           {"gamma0_classes", r.gamma0_classes},
           {"widths", r.widths},
           {"checks",
            {{"all_intersect_equator", r.all_intersect_equator},
             {"short_class_is_gamma0", r.short_class_is_gamma0},
             {"gamma0_found", r.gamma0_found},
             {"index_bound", r.index_bound},
             {"vertex_bound", r.vertex_bound},
             {"shortest_is_simple", r.shortest_is_simple},
             {"widths_dominate_reference", r.widths_dominate_reference}}},
           {"pass", r.pass()},
           {"seeds", seeds}};
}

void to_json(Json& j, const EllipsoidGeodesic& g) {
  j = Json{{"plane", "x" + std::to_string(g.plane + 1) + " = 0"},
           {"semi_axes", g.semi_axes},
           {"length", g.length},
           {"quadrature_length", g.quadrature_length},
           {"length_error", g.length_error},
           {"plane_residual", g.plane_residual},
           {"attempts", g.attempts},
           {"index_by_cover", g.index},
           {"nullity_by_cover", g.nullity}};
}

void to_json(Json& j, const MultiplicityRow& r) {
  j = Json{{"p", r.p},
           {"omega_reference", r.omega_reference},
           {"reference_label", kReferenceLabel},
           {"representations", r.representations},
           {"all_ones_admissible", r.all_ones_admissible},
           {"multiplicity_forced", r.multiplicity_forced}};
}

void to_json(Json& j, const EllipsoidReport& r) {
  j = Json{{"surface", {{"type", "ellipsoid"}, {"a", r.a}}},
           {"geodesics", r.geodesics},
           {"multiplicity", r.multiplicity},
           {"checks",
            {{"lengths_match", r.lengths_match},
             {"nondegenerate", r.nondegenerate},
             {"distinct_lengths", r.distinct_lengths}}},
           {"pass", r.pass()}};
}

std::string width_table_csv(const std::vector<WidthRow>& rows) {
  std::ostringstream out;
  out << "l,upper_bound,reference,gap\n";
  for (const auto& r : rows) {
    out << r.l << ',' << format_double(r.upper_bound) << ',' << format_double(r.reference) << ','
        << format_double(r.gap) << '\n';
  }
  return out.str();
}

std::string eigenvalue_csv(const SpectrumReport& r) {
  std::ostringstream out;
  out << "i,eigenvalue,error_estimate\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    out << i << ',' << format_double(r.eigenvalues[i]) << ','
        << format_double(i < r.error_estimates.size() ? r.error_estimates[i] : 0.0) << '\n';
  }
  return out.str();
}

std::string curve_traces_csv(const std::vector<GeodesicCurve>& curves) {
  std::ostringstream out;
  out << "curve,i,x,y,z\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (std::size_t i = 0; i < curves[c].samples.size(); ++i) {
      const Vec3& p = curves[c].samples[i];
      out << c << ',' << i << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
          << format_double(p.z) << '\n';
    }
  }
  return out.str();
}

std::string curves_svg(const Surface& surface, const std::vector<GeodesicCurve>& curves, const std::string& title) {
  constexpr double kSize = 600.0, kExtent = 3.0, kClip = 8.0;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  auto project = [&](const Vec3& p, bool& ok) {
    if (surface.is_chart()) {
      ok = true;
      return std::array<double, 2>{p.x, p.y};
    }
    const Vec3 u = p / norm(p);
    const double d = 1.0 - u.z;
    ok = d > 1.0 / (kClip * kClip);
    return std::array<double, 2>{ok ? u.x / d : 0.0, ok ? u.y / d : 0.0};
  };
  auto px = [&](double v) { return format_double(std::round((v + kExtent) / (2 * kExtent) * kSize * 100) / 100); };
  auto py = [&](double v) { return format_double(std::round((kExtent - v) / (2 * kExtent) * kSize * 100) / 100); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n"
      << "<title>" << title << "</title>\n"
      << "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& s = curves[c].samples;
    std::ostringstream path;
    bool pen = false;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() && !curves[c].closed) break;
      bool ok = false;
      const auto q = project(s[i % s.size()], ok);
      if (!ok || std::abs(q[0]) > kClip || std::abs(q[1]) > kClip) {
        pen = false;
        continue;
      }
      path << (pen ? " L" : " M") << px(q[0]) << ',' << py(q[1]);
      pen = true;
    }
    out << "<path fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[c % 6] << "\" d=\"" << path.str()
        << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace geolab
