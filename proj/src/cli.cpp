#include "geolab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "geolab/parallel.hpp"

namespace geolab {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

Json seed_json(const Vec3& p, const Vec3& d) { return Json{{"point", p}, {"direction", d}, {"period", kTwoPi}}; }

Json default_params(const std::string& cmd) {
  const Json two_circles = Json::array({seed_json({1, 0, 0}, {0, 1, 0}), seed_json({0, 1, 0}, {0, 0, 1})});
  if (cmd == "find-geodesics") return {{"n_seeds", 16}, {"samples", 4096}, {"band", 0.25}, {"seeds", Json::array()}};
  if (cmd == "index") {
    return {{"point", nullptr}, {"direction", nullptr}, {"period", kTwoPi}, {"m", 1}, {"count", 12}, {"samples", 4096}};
  }
  if (cmd == "network") {
    return {{"curves", two_circles}, {"samples", 1024}, {"p", 2}, {"K0", 1.0}, {"omega1", kTwoPi},
            {"multiplicities", Json::array()}};
  }
  if (cmd == "split-vertex") {
    return {{"order", 3}, {"angles", Json::array()}, {"offset_fraction", 0.2}, {"strand_samples", 801}};
  }
  if (cmd == "extend-field") {
    return {{"curves", two_circles}, {"samples", 1024}, {"profile", Json::array({1.0, -0.7})},
            {"delta", 1.0},          {"eta", 0.2},      {"flow_step", 1e-2},
            {"max_rel_error", 1e-3}};
  }
  if (cmd == "sweepout-bound") return {{"p", 5}, {"samples", 512}, {"grid_points", 20}};
  if (cmd == "mk-experiment") {
    return {{"cap", 2.0 * kTwoPi}, {"n_seeds", 200}, {"p", 5}, {"band", 0.25}, {"samples", 4096}};
  }
  if (cmd == "ellipsoid-experiment") return {{"seed_budget", 16}, {"max_p", 16}, {"samples", 4096}};
  invalid("unknown command '" + cmd + "'");
}

std::optional<std::string> default_surface(const std::string& cmd) {
  if (cmd == "split-vertex") return "flat";
  if (cmd == "network" || cmd == "extend-field") return "sphere";
  return std::nullopt;
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) invalid(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(what + " must be finite");
  return v;
}

double positive(const Json& j, const std::string& what) {
  const double v = number(j, what);
  if (!(v > 0.0)) invalid(what + " must be > 0");
  return v;
}

int positive_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 1) invalid(what + " must be a positive integer");
  return j.get<int>();
}

Vec3 vec3(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) invalid(what + " must be an array of 3 numbers");
  return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

Json validate_surface(Json s, const std::string& cmd) {
  if (!s.is_object()) invalid("surface must be an object");
  if (!s.contains("type") || !s["type"].is_string()) invalid("surface.type missing");
  const std::string type = s["type"];
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : s.items()) {
      if (key == "type") continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        invalid("unknown surface key '" + key + "' for type " + type);
      }
    }
  };
  if (type == "mk") {
    only({"k", "mu"});
    if (!s.contains("k")) invalid("surface mk requires k");
    positive(s["k"], "k");
    if (!s.contains("mu")) s["mu"] = 1.0;
    if (number(s["mu"], "mu") < 1.0) invalid("mu must be >= 1");
  } else if (type == "ellipsoid") {
    only({"a"});
    if (!s.contains("a")) invalid("surface ellipsoid requires a");
    const Vec3 a = vec3(s["a"], "a");
    for (int i = 0; i < 3; ++i) {
      if (!(a[i] > 0.0)) invalid("ellipsoid coefficients must be > 0");
    }
  } else if (type == "sphere") {
    only({"radius"});
    if (!s.contains("radius")) s["radius"] = 1.0;
    positive(s["radius"], "radius");
  } else if (type == "flat" || type == "gnomonic" || type == "cylinder") {
    only({});
  } else {
    invalid("unknown surface type '" + type + "'");
  }
  const bool mk_only = cmd == "sweepout-bound" || cmd == "mk-experiment";
  if (mk_only && type != "mk") invalid(cmd + " needs an mk surface");
  if (cmd == "ellipsoid-experiment" && type != "ellipsoid") invalid(cmd + " needs an ellipsoid surface");
  if (cmd == "split-vertex" && type != "flat" && type != "gnomonic") invalid("split-vertex needs a flat or gnomonic chart");
  return s;
}

void validate_seed_list(const Json& list, const std::string& what) {
  if (!list.is_array()) invalid(what + " must be an array");
  for (const auto& s : list) {
    if (!s.is_object()) invalid(what + " entries must be objects");
    for (const auto& [key, v] : s.items()) {
      if (key != "point" && key != "direction" && key != "period") invalid("unknown key '" + key + "' in " + what);
    }
    vec3(s.value("point", Json()), what + ".point");
    vec3(s.value("direction", Json()), what + ".direction");
    if (s.contains("period")) positive(s["period"], what + ".period");
  }
}

void validate_params(const std::string& cmd, const Json& p) {
  static const std::map<std::string, std::string> kinds{
      {"n_seeds", "count0"},     {"samples", "int"},         {"band", "pos"},          {"m", "int"},
      {"count", "int"},          {"period", "pos"},          {"p", "int"},             {"K0", "pos"},
      {"omega1", "pos"},         {"order", "int"},           {"offset_fraction", "pos"}, {"strand_samples", "int"},
      {"delta", "pos"},          {"eta", "pos"},             {"flow_step", "pos"},     {"max_rel_error", "pos"},
      {"grid_points", "int"},    {"cap", "pos"},             {"seed_budget", "int"},   {"max_p", "int"}};
  for (const auto& [key, v] : p.items()) {
    const auto it = kinds.find(key);
    if (it == kinds.end()) continue;
    if (it->second == "int") positive_int(v, key);
    if (it->second == "pos") positive(v, key);
    if (it->second == "count0" && (!v.is_number_integer() || v.get<long long>() < 0)) {
      invalid(key + " must be a nonnegative integer");
    }
  }
  if (p.contains("seeds")) validate_seed_list(p["seeds"], "seeds");
  if (p.contains("curves")) validate_seed_list(p["curves"], "curves");
  if (cmd == "index") {
    if (!p["point"].is_null()) vec3(p["point"], "point");
    if (!p["direction"].is_null()) vec3(p["direction"], "direction");
  }
  if (p.contains("band") && !(p["band"].get<double>() < 1.0)) invalid("band must be < 1");
  if (cmd == "split-vertex") {
    if (p["order"].get<int>() < 3) invalid("order must be >= 3");
    if (!p["angles"].is_array()) invalid("angles must be an array");
    for (const auto& a : p["angles"]) number(a, "angles");
    if (!p["angles"].empty() && static_cast<int>(p["angles"].size()) != p["order"].get<int>()) {
      invalid("angles must list one angle per strand");
    }
  }
  if (cmd == "extend-field") {
    if (!p["profile"].is_array() || p["profile"].size() != p["curves"].size()) {
      invalid("profile must give one constant per curve");
    }
    for (const auto& v : p["profile"]) number(v, "profile");
  }
  if (cmd == "network") {
    if (!p["multiplicities"].is_array()) invalid("multiplicities must be an array");
    for (const auto& v : p["multiplicities"]) positive_int(v, "multiplicities");
  }
}

void merge_into(Json& base, const Json& over) {
  for (const auto& [key, v] : over.items()) {
    if (v.is_object() && base.contains(key) && base[key].is_object()) {
      merge_into(base[key], v);
    } else {
      base[key] = v;
    }
  }
}

std::vector<GeodesicSeed> seeds_from(const Json& list) {
  std::vector<GeodesicSeed> out;
  for (const auto& s : list) {
    out.push_back({vec3(s["point"], "point"), vec3(s["direction"], "direction"), s.value("period", kTwoPi)});
  }
  return out;
}

double unit_from(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Uniform-ish seeds on a level set: random directions pushed onto the surface.
std::vector<GeodesicSeed> random_seeds(const Surface& s, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto gaussian3 = [&] {
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
      const double u1 = 1.0 - unit_from(gen), u2 = unit_from(gen);
      v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
    return v;
  };
  std::vector<GeodesicSeed> out;
  for (int i = 0; i < n; ++i) {
    const Vec3 x = s.project(normalized(gaussian3()));
    Vec3 d = s.tangent_project(x, gaussian3());
    d = d / s.speed(x, d);
    out.push_back({x, d, kTwoPi});
  }
  return out;
}

CloseOptions close_options(const RunConfig& c, int samples) {
  CloseOptions o;
  o.samples = samples;
  o.tolerance = c.tol;
  return o;
}

std::vector<GeodesicCurve> close_all(const Surface& s, const std::vector<GeodesicSeed>& seeds, const CloseOptions& o) {
  std::vector<GeodesicCurve> out(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), worker_threads(),
               [&](int i) { out[static_cast<std::size_t>(i)] = close_geodesic(s, seeds[static_cast<std::size_t>(i)], o); });
  return out;
}

struct Result {
  Json body;
  bool pass = true;
  std::vector<OutputFile> extra;
};

GeodesicCurve straight_strand(const Surface& s, double angle, int n) {
  const double reach = 1.0;
  std::vector<Vec3> pts;
  const Vec3 d{std::cos(angle), std::sin(angle), 0.0};
  for (int i = 0; i < n; ++i) pts.push_back((-reach + 2.0 * reach * i / (n - 1)) * d);
  return make_curve(s, std::move(pts), false);
}

Result find_geodesics(const RunConfig& c, const Surface& s) {
  const Json& p = c.params;
  std::vector<GeodesicSeed> seeds = seeds_from(p["seeds"]);
  if (seeds.empty()) {
    const int n = p["n_seeds"];
    if (s.mk) {
      for (const auto& m : mk_seeds(s, n, c.seed, p["band"])) seeds.push_back({m.point, m.direction, kTwoPi});
    } else if (!s.is_chart()) {
      seeds = random_seeds(s, n, c.seed);
    } else {
      invalid("chart surfaces need explicit seeds");
    }
  }
  const CloseOptions o = close_options(c, p["samples"]);
  std::vector<std::optional<GeodesicCurve>> shot(seeds.size());
  std::vector<std::string> errors(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), worker_threads(), [&](int i) {
    const std::size_t u = static_cast<std::size_t>(i);
    try {
      shot[u] = close_geodesic(s, seeds[u], o);
    } catch (const Error& e) {
      errors[u] = std::string(to_string(e.kind()));
    }
  });
  const double tol = 1e-5 * s.diameter();
  std::vector<GeodesicCurve> classes;
  Json found = Json::array(), failures = Json::array();
  std::vector<int> hits;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!shot[i]) {
      failures.push_back({{"seed_index", i}, {"kind", errors[i]}});
      continue;
    }
    bool merged = false;
    for (std::size_t k = 0; k < classes.size() && !merged; ++k) {
      if (hausdorff_distance(classes[k], *shot[i], tol) <= tol) {
        ++hits[k];
        merged = true;
      }
    }
    if (merged) continue;
    classes.push_back(*shot[i]);
    hits.push_back(1);
    Json g = classes.back();
    g["first_seed"] = i;
    found.push_back(g);
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    found[k]["hits"] = hits[k];
    found[k]["self_vertices"] = detect_vertices(s, {classes[k]}).size();
  }
  Result r;
  r.body = {{"dedup_tolerance", tol}, {"seeds", seeds.size()}, {"found", found}, {"failures", failures}};
  r.extra.push_back({"traces.csv", curve_traces_csv(classes)});
  r.extra.push_back({"curves.svg", curves_svg(s, classes, "find-geodesics")});
  return r;
}

GeodesicSeed default_seed(const Surface& s) {
  if (s.ellipsoid) return {{1.0 / std::sqrt((*s.ellipsoid)[0]), 0, 0}, {0, 1, 0}, kTwoPi};
  if (s.is_chart()) invalid("chart surfaces need an explicit point and direction");
  return {{1, 0, 0}, {0, 1, 0}, kTwoPi};
}

Result index_cmd(const RunConfig& c, const Surface& s) {
  const Json& p = c.params;
  GeodesicSeed seed = default_seed(s);
  if (!p["point"].is_null()) seed.point = vec3(p["point"], "point");
  if (!p["direction"].is_null()) seed.direction = vec3(p["direction"], "direction");
  seed.period = p["period"];
  const GeodesicCurve g = close_geodesic(s, seed, close_options(c, p["samples"]));
  SpectrumOptions so;
  so.count = p["count"];
  const SpectrumReport sp = jacobi_spectrum(g, s, p["m"], c.grid, so);
  Result r;
  r.body = {{"geodesic", g}, {"spectrum", sp}};
  r.extra.push_back({"eigenvalues.csv", eigenvalue_csv(sp)});
  return r;
}

Result network_cmd(const RunConfig& c, const Surface& s) {
  const Json& p = c.params;
  const auto curves = close_all(s, seeds_from(p["curves"]), close_options(c, p["samples"]));
  const GeodesicNetwork net = make_network(s, curves);
  std::vector<int> mult = p["multiplicities"].get<std::vector<int>>();
  if (!mult.empty() && mult.size() != curves.size()) invalid("one multiplicity per curve");
  const int pp = p["p"];
  const AppendixReport app = check_appendix_bounds(net, pp, p["K0"], p["omega1"], mult);
  const NetworkIndex ni = network_index(net, mult, c.grid);
  const bool index_ok = ni.index <= pp;
  const bool vert_ok = static_cast<int>(net.vertices.size()) <= pp;
  Result r;
  r.pass = index_ok && vert_ok && (!app.edge_bound_checked || app.edge_bound_pass) &&
           (!app.length_bound_checked || app.length_bound_pass);
  r.body = {{"curves", curves},
            {"vertices", net.vertices},
            {"weighted_vertex_count", weighted_vertex_count(net.vertices)},
            {"g_plus", is_g_plus(net)},
            {"index", ni.index},
            {"index_form", ni.form},
            {"appendix", app},
            {"checks", {{"index_le_p", index_ok}, {"vertices_le_p", vert_ok}}}};
  r.extra.push_back({"traces.csv", curve_traces_csv(curves)});
  r.extra.push_back({"network.svg", curves_svg(s, curves, "network")});
  return r;
}

Result split_cmd(const RunConfig& c, const Surface& s) {
  const Json& p = c.params;
  const int order = p["order"];
  std::vector<double> angles = p["angles"].get<std::vector<double>>();
  if (angles.empty()) {
    for (int i = 0; i < order; ++i) angles.push_back(0.1 + kPi * i / order);
  }
  std::vector<GeodesicCurve> strands;
  for (double a : angles) strands.push_back(straight_strand(s, a, p["strand_samples"]));
  const GeodesicNetwork net = make_network(s, strands);
  if (net.vertices.empty()) invalid("strands do not meet");
  std::size_t vi = 0;
  for (std::size_t i = 0; i < net.vertices.size(); ++i) {
    if (norm(net.vertices[i].position) < norm(net.vertices[vi].position)) vi = i;
  }
  SplitOptions so;
  so.offset_fraction = p["offset_fraction"];
  const SplitResult out = reduce_vertex(s, net, vi, so);

  // factors vanish outside their working balls: probe rings just outside
  bool outside_zero = true;
  for (std::size_t k = 0; k < out.transcript.size(); ++k) {
    const SplitStep& st = out.transcript[k];
    for (double scale : {1.01, 1.25, 1.6}) {
      for (int j = 0; j < 256; ++j) {
        const double th = kTwoPi * j / 256;
        const Vec3 x = st.vertex + scale * st.ball_radius * Vec3{std::cos(th), std::sin(th), 0.0};
        if (!s.domain().contains(x.x, x.y)) continue;
        if (out.factors[k]->value(x) != 0.0) outside_zero = false;
      }
    }
  }
  double residual = 0.0;
  for (const auto& st : out.transcript) residual = std::max(residual, st.curvature_residual_after);
  const long before = weighted_vertex_count(net.vertices), after = weighted_vertex_count(out.network.vertices);
  Result r;
  r.pass = is_g_plus(out.network) && before == after && residual <= 1e-6 && outside_zero;
  r.body = {{"initial_vertices", net.vertices},
            {"transcript", out.transcript},
            {"final_vertices", out.network.vertices},
            {"weighted_vertex_count_before", before},
            {"weighted_vertex_count_after", after},
            {"checks",
             {{"g_plus", is_g_plus(out.network)},
              {"weighted_count_conserved", before == after},
              {"detour_curvature_le_1e-6", residual <= 1e-6},
              {"factor_vanishes_outside_balls", outside_zero}}}};
  std::ostringstream csv;
  csv << "step,order_before,ball_radius,offset_t,d0,max_f,curvature_residual_after\n";
  for (std::size_t k = 0; k < out.transcript.size(); ++k) {
    const SplitStep& st = out.transcript[k];
    csv << k << ',' << st.order_before << ',' << format_double(st.ball_radius) << ',' << format_double(st.offset_t)
        << ',' << format_double(st.d0) << ',' << format_double(st.max_f) << ','
        << format_double(st.curvature_residual_after) << '\n';
  }
  r.extra.push_back({"transcript.csv", csv.str()});
  r.extra.push_back({"split.svg", curves_svg(out.surface, out.network.curves, "split-vertex")});
  return r;
}

Result extend_cmd(const RunConfig& c, const Surface& s) {
  const Json& p = c.params;
  const auto curves = close_all(s, seeds_from(p["curves"]), close_options(c, p["samples"]));
  const GeodesicNetwork net = make_network(s, curves);
  NormalProfiles phi;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    phi.emplace_back(curves[i].samples.size(), p["profile"][i].get<double>());
  }
  const AmbientField X = extend_normal_field(net, phi, p["delta"], p["eta"]);
  const VariationReport v = verify_second_variation_match(net, phi, X, p["flow_step"]);
  Result r;
  r.pass = v.rel_error <= p["max_rel_error"].get<double>();
  r.body = {{"verification", v},
            {"tube_radius", X.tube_radius},
            {"crossings", X.crossings.size()},
            {"support", X.support_description},
            {"checks", {{"rel_error_within_bound", r.pass}}}};
  return r;
}

Result sweepout_cmd(const RunConfig& c, const Surface& s) {
  const Json& p = c.params;
  const OneSweepout sw = level_circle_sweepout(s, p["samples"]);
  Json bounds = Json::array();
  std::vector<WidthRow> rows;
  bool consistent = true;
  for (int l = 1; l <= p["p"].get<int>(); ++l) {
    WidthBound b = guth_p_sweepout_bound(sw, l, p["grid_points"]);
    b.reference_value = kTwoPi * l;
    b.reference_label = kReferenceLabel;
    consistent = consistent && b.grid_consistent;
    rows.push_back({l, b.upper_bound, kTwoPi * l, b.upper_bound - kTwoPi * l});
    bounds.push_back(b);
  }
  Result r;
  r.pass = consistent;
  r.body = {{"sweepout", sw}, {"bounds", bounds}, {"table", rows}, {"checks", {{"grid_consistent", consistent}}}};
  r.extra.push_back({"widths.csv", width_table_csv(rows)});
  return r;
}

Result mk_cmd(const RunConfig& c) {
  const Json& p = c.params;
  MkExperimentOptions o;
  o.latitude_band = p["band"];
  o.close_samples = p["samples"];
  o.close_tolerance = c.tol;
  o.spectrum_grid = c.grid;
  o.p = p["p"];
  const MkExperimentReport rep = mk_multiplicity_experiment(c.surface["k"], c.surface["mu"], p["cap"], p["n_seeds"],
                                                            c.seed, o);
  Result r;
  r.pass = rep.pass();
  r.body = rep;
  std::ostringstream csv;
  csv << "class,first_seed,hits,length,index,nullity,intersects_equator,is_gamma0\n";
  std::vector<GeodesicCurve> curves;
  for (std::size_t i = 0; i < rep.found.size(); ++i) {
    const FoundGeodesic& f = rep.found[i];
    csv << i << ',' << f.first_seed << ',' << f.hits << ',' << format_double(f.length) << ',' << f.index << ','
        << f.nullity << ',' << (f.intersects_equator ? 1 : 0) << ',' << (f.is_gamma0 ? 1 : 0) << '\n';
    curves.push_back(f.curve);
  }
  r.extra.push_back({"widths.csv", width_table_csv(rep.widths)});
  r.extra.push_back({"geodesics.csv", csv.str()});
  r.extra.push_back({"curves.svg", curves_svg(make_mk(rep.k, rep.mu), curves, "mk-experiment")});
  return r;
}

Result ellipsoid_cmd(const RunConfig& c) {
  const Json& p = c.params;
  EllipsoidOptions o;
  o.seed_budget = p["seed_budget"];
  o.max_p = p["max_p"];
  o.close_samples = p["samples"];
  o.close_tolerance = c.tol;
  o.spectrum_grid = c.grid;
  const Vec3 a = vec3(c.surface["a"], "a");
  const EllipsoidReport rep = ellipsoid_experiment(a.x, a.y, a.z, o);
  Result r;
  r.pass = rep.pass();
  r.body = rep;
  std::ostringstream csv;
  csv << "p,omega_reference,representations,all_ones_admissible,multiplicity_forced\n";
  for (const auto& row : rep.multiplicity) {
    csv << row.p << ',' << format_double(row.omega_reference) << ',' << row.representations.size() << ','
        << (row.all_ones_admissible ? 1 : 0) << ',' << (row.multiplicity_forced ? 1 : 0) << '\n';
  }
  std::vector<GeodesicCurve> curves;
  for (const auto& g : rep.geodesics) curves.push_back(g.curve);
  r.extra.push_back({"multiplicity.csv", csv.str()});
  r.extra.push_back({"curves.svg", curves_svg(make_ellipsoid(a.x, a.y, a.z), curves, "ellipsoid-experiment")});
  return r;
}

Json envelope(const RunConfig& c) {
  return Json{{"tool", "geolab"}, {"version", GEOLAB_VERSION}, {"command", c.command}, {"config", c.to_json()}};
}

}  // namespace

Json RunConfig::to_json() const {
  return Json{{"command", command}, {"surface", surface}, {"seed", seed}, {"tol", tol},
              {"grid", grid},       {"out", out},         {"params", params}};
}

Surface surface_from_spec(const Json& s) {
  const std::string type = s.at("type");
  if (type == "mk") return make_mk(s.at("k"), s.value("mu", 1.0));
  if (type == "ellipsoid") {
    const Vec3 a = vec3(s.at("a"), "a");
    return make_ellipsoid(a.x, a.y, a.z);
  }
  if (type == "sphere") return make_sphere(s.value("radius", 1.0));
  if (type == "flat") return make_flat_chart();
  if (type == "gnomonic") return make_gnomonic_sphere_chart();
  if (type == "cylinder") return make_cylinder();
  invalid("unknown surface type '" + type + "'");
}

RunConfig resolve_config(const Json& file_config, const Json& overrides) {
  if (!file_config.is_object()) invalid("config must be a JSON object");
  static const std::vector<std::string> top{"command", "surface", "seed", "tol", "grid", "out", "params", "k", "mu", "a"};
  std::string command;
  for (const Json* j : {&overrides, &file_config}) {
    if (command.empty() && j->contains("command") && (*j)["command"].is_string()) command = (*j)["command"];
  }
  // Command-specific keys may sit at the top level; fold them into params
  // per source so that overrides still win over the file.
  auto normalize = [&](Json j) {
    Json out = Json::object();
    for (const auto& [key, v] : j.items()) {
      if (std::find(top.begin(), top.end(), key) != top.end()) {
        out[key] = v;
        continue;
      }
      if (command.empty() || !default_params(command).contains(key)) invalid("unknown config key '" + key + "'");
      out["params"][key] = v;
    }
    if (j.contains("params") && j["params"].is_object() && out["params"].is_object()) {
      for (const auto& [key, v] : j["params"].items()) out["params"][key] = v;
    }
    return out;
  };
  Json merged = normalize(file_config);
  merge_into(merged, normalize(overrides));
  if (!merged.contains("command") || !merged["command"].is_string()) invalid("command missing");
  RunConfig c;
  c.command = merged["command"];
  if (std::find(cli_commands().begin(), cli_commands().end(), c.command) == cli_commands().end()) {
    invalid("unknown command '" + c.command + "'");
  }

  Json surface = merged.value("surface", Json());
  if (surface.is_null()) {
    if (merged.contains("k") || merged.contains("mu")) {
      surface = {{"type", "mk"}};
    } else if (merged.contains("a")) {
      surface = {{"type", "ellipsoid"}};
    } else if (const auto d = default_surface(c.command)) {
      surface = {{"type", *d}};
    } else if (c.command == "sweepout-bound" || c.command == "mk-experiment") {
      invalid("missing k");
    } else {
      invalid("surface missing");
    }
  }
  if (!surface.is_object()) invalid("surface must be an object");
  for (const char* key : {"k", "mu", "a"}) {
    if (merged.contains(key)) surface[key] = merged[key];
  }
  if (surface.value("type", "") == "mk" && !surface.contains("k")) invalid("missing k");
  c.surface = validate_surface(surface, c.command);

  if (merged.contains("seed")) {
    if (!merged["seed"].is_number_integer() || merged["seed"].get<long long>() < 0) {
      invalid("seed must be a nonnegative integer");
    }
    c.seed = merged["seed"].get<std::uint64_t>();
  }
  if (merged.contains("tol")) c.tol = positive(merged["tol"], "tol");
  if (merged.contains("grid")) {
    c.grid = positive_int(merged["grid"], "grid");
    if (c.grid < 256) invalid("grid must be >= 256");
  }
  if (merged.contains("out")) {
    if (!merged["out"].is_string()) invalid("out must be a path string");
    c.out = merged["out"];
  }

  Json params = default_params(c.command);
  const Json given = merged.value("params", Json::object());
  if (!given.is_object()) invalid("params must be an object");
  for (const auto& [key, v] : given.items()) {
    if (!params.contains(key)) invalid("unknown parameter '" + key + "' for " + c.command);
    params[key] = v;
  }
  validate_params(c.command, params);
  c.params = params;
  return c;
}

RunOutput run(const RunConfig& c) {
  RunOutput out;
  out.report = envelope(c);
  Result res;
  try {
    const Surface s = surface_from_spec(c.surface);
    if (c.command == "find-geodesics") res = find_geodesics(c, s);
    else if (c.command == "index") res = index_cmd(c, s);
    else if (c.command == "network") res = network_cmd(c, s);
    else if (c.command == "split-vertex") res = split_cmd(c, s);
    else if (c.command == "extend-field") res = extend_cmd(c, s);
    else if (c.command == "sweepout-bound") res = sweepout_cmd(c, s);
    else if (c.command == "mk-experiment") res = mk_cmd(c);
    else res = ellipsoid_cmd(c);
    out.exit_code = res.pass ? 0 : 2;
    out.report["status"] = res.pass ? "pass" : "property-check-failed";
    out.report["result"] = std::move(res.body);
  } catch (const Error& e) {
    out.exit_code = 1;
    out.report["status"] = "error";
    out.report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    res.extra.clear();
  }
  out.report["exit_code"] = out.exit_code;
  out.files.push_back({c.command + ".json", out.report.dump(2) + "\n"});
  for (auto& f : res.extra) out.files.push_back(std::move(f));
  return out;
}

void write_outputs(const RunConfig& c, const RunOutput& output) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::InvalidArgument, "cannot create output directory " + c.out + ": " + ec.message());
  for (const auto& f : output.files) {
    std::ofstream os(fs::path(c.out) / f.name, std::ios::binary);
    if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + f.name);
    os << f.content;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"geolab: closed geodesics, Jacobi spectra, geodesic networks and width bounds"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, out_dir, surface_type;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<double> tol, k, mu;
  std::vector<double> a;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "experiment seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--grid", grid, "Jacobi grid size (>= 256)");
  app.add_option("--tol", tol, "shooting closure tolerance");
  app.add_option("--surface", surface_type, "surface type: mk, ellipsoid, sphere, flat, gnomonic, cylinder");
  app.add_option("--k", k, "M_k parameter k");
  app.add_option("--mu", mu, "M_k exponent mu");
  app.add_option("--a", a, "ellipsoid coefficients a1 a2 a3")->expected(3);

  struct Flag {
    const char* name;
    const char* key;
    bool integer;
    const char* help;
  };
  const std::map<std::string, std::vector<Flag>> flags{
      {"find-geodesics", {{"--n-seeds", "n_seeds", true, "seed count"}, {"--samples", "samples", true, "samples per curve"}}},
      {"index", {{"--m", "m", true, "cover multiplicity"}, {"--count", "count", true, "eigenvalues reported"}}},
      {"network", {{"--p", "p", true, "width level p"}, {"--K0", "K0", false, "curvature lower bound"},
                   {"--omega1", "omega1", false, "first width"}}},
      {"split-vertex", {{"--order", "order", true, "vertex order"},
                        {"--offset-fraction", "offset_fraction", false, "detour offset / ball radius"}}},
      {"extend-field", {{"--delta", "delta", false, "support budget"}, {"--eta", "eta", false, "crossing ball radius"},
                        {"--flow-step", "flow_step", false, "flow time step"},
                        {"--max-rel-error", "max_rel_error", false, "pass threshold"}}},
      {"sweepout-bound", {{"--p", "p", true, "largest p"}, {"--samples", "samples", true, "sweepout samples"}}},
      {"mk-experiment", {{"--cap", "cap", false, "length cap"}, {"--n-seeds", "n_seeds", true, "seed count"},
                         {"--p", "p", true, "width table rows"}}},
      {"ellipsoid-experiment", {{"--seed-budget", "seed_budget", true, "attempts per plane"},
                                {"--max-p", "max_p", true, "largest p in the multiplicity table"}}},
  };
  std::map<std::string, std::optional<double>> dvals;
  std::map<std::string, std::optional<long long>> ivals;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : cli_commands()) {
    CLI::App* sub = app.add_subcommand(name, "run " + name);
    for (const Flag& f : flags.at(name)) {
      const std::string id = name + ":" + f.key;
      if (f.integer) {
        sub->add_option(f.name, ivals[id], f.help);
      } else {
        sub->add_option(f.name, dvals[id], f.help);
      }
    }
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  RunConfig config;
  try {
    Json file = Json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      try {
        file = Json::parse(is);
      } catch (const Json::exception& e) {
        invalid(std::string("cannot parse config: ") + e.what());
      }
    }
    Json over = Json::object();
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      over["command"] = name;
      for (const Flag& f : flags.at(name)) {
        const std::string id = name + ":" + f.key;
        if (f.integer && ivals[id]) over["params"][f.key] = *ivals[id];
        if (!f.integer && dvals[id]) over["params"][f.key] = *dvals[id];
      }
    }
    if (seed) over["seed"] = *seed;
    if (grid) over["grid"] = *grid;
    if (tol) over["tol"] = *tol;
    if (!out_dir.empty()) over["out"] = out_dir;
    if (!surface_type.empty()) over["surface"]["type"] = surface_type;
    if (k) over["k"] = *k;
    if (mu) over["mu"] = *mu;
    if (!a.empty()) over["a"] = a;
    config = resolve_config(file, over);
  } catch (const Error& e) {
    Json err{{"tool", "geolab"},
             {"version", GEOLAB_VERSION},
             {"status", "error"},
             {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}},
             {"exit_code", 1}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }

  const RunOutput output = run(config);
  try {
    write_outputs(config, output);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cout << config.command << ": " << output.report["status"].get<std::string>() << " ("
            << (std::filesystem::path(config.out) / output.files.front().name).string() << ")\n";
  return output.exit_code;
}

}  // namespace geolab
