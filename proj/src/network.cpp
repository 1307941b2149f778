#include "geolab/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geolab/kernels.hpp"

namespace geolab {

namespace {

struct ClosestPair {
  double dist2;
  double s, t;  // segment parameters in [0, 1]
  Vec3 p, q;
};

// Closest points between segments p0 + s d1 and q0 + t d2.
ClosestPair segment_segment(const Vec3& p0, const Vec3& d1, const Vec3& q0, const Vec3& d2) {
  const Vec3 r = p0 - q0;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  if (a <= 0.0 && e <= 0.0) {
    s = t = 0.0;
  } else if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  ClosestPair out;
  out.s = s;
  out.t = t;
  out.p = p0 + s * d1;
  out.q = q0 + t * d2;
  const Vec3 d = out.p - out.q;
  out.dist2 = dot(d, d);
  return out;
}

struct Hit {
  Vec3 point;
  int curve_a, curve_b;
  double param_a, param_b;  // fractional sample index
};

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double min_segment_length(const kernels::SegmentSoA& s) {
  double m = HUGE_VAL;
  for (double l2 : s.len2) m = std::min(m, l2);
  return std::sqrt(m);
}

// Cyclic (or linear for open curves) distance between fractional indices.
double index_distance(double a, double b, double n, bool closed) {
  const double d = std::abs(a - b);
  return closed ? std::min(d, n - d) : d;
}

Vec3 tangent_at(const GeodesicCurve& c, double param) {
  const std::size_t n = c.tangents.size();
  const double fl = std::floor(param);
  const double w = param - fl;
  std::size_t i = static_cast<std::size_t>(fl) % n;
  std::size_t j = c.closed ? (i + 1) % n : std::min(i + 1, n - 1);
  return (1.0 - w) * c.tangents[i] + w * c.tangents[j];
}

}  // namespace

std::vector<VertexRecord> detect_vertices(const Surface& surface, const std::vector<GeodesicCurve>& curves,
                                          const DetectOptions& opt) {
  const double r = opt.clustering_radius > 0.0 ? opt.clustering_radius : 1e-4 * surface.diameter();
  const double r2 = r * r;
  const auto& K = kernels::active();

  std::vector<kernels::SegmentSoA> segs;
  std::vector<double> window;  // index window treated as one local strand
  for (const auto& c : curves) {
    segs.push_back(kernels::SegmentSoA::from_points(c.samples, c.closed));
    const double ml = min_segment_length(segs.back());
    window.push_back(2.0 + (ml > 0.0 ? 4.0 * r / ml : 0.0));
  }

  // Chunks of consecutive segments with bounding spheres, so that dense
  // curves are only compared segment by segment where they come close.
  constexpr std::size_t kChunk = 64;
  struct Chunk {
    std::size_t begin = 0;
    kernels::SegmentSoA segs;
    Vec3 center;
    double radius = 0.0;
  };
  std::vector<std::vector<Chunk>> chunks(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& S = segs[c];
    for (std::size_t b = 0; b < S.size(); b += kChunk) {
      Chunk ch;
      ch.begin = b;
      const std::size_t e = std::min(S.size(), b + kChunk);
      Vec3 lo{HUGE_VAL, HUGE_VAL, HUGE_VAL}, hi{-HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
      for (std::size_t k = b; k < e; ++k) {
        for (int ax = 0; ax < 3; ++ax) {
          const double cen = ax == 0 ? S.cx[k] : (ax == 1 ? S.cy[k] : S.cz[k]);
          lo[ax] = std::min(lo[ax], cen - S.rad[k]);
          hi[ax] = std::max(hi[ax], cen + S.rad[k]);
        }
      }
      ch.center = 0.5 * (lo + hi);
      ch.radius = 0.5 * norm(hi - lo);
      auto copy = [&](const std::vector<double>& src, std::vector<double>& dst) {
        dst.assign(src.begin() + static_cast<long>(b), src.begin() + static_cast<long>(e));
      };
      copy(S.x0, ch.segs.x0), copy(S.y0, ch.segs.y0), copy(S.z0, ch.segs.z0);
      copy(S.dx, ch.segs.dx), copy(S.dy, ch.segs.dy), copy(S.dz, ch.segs.dz);
      copy(S.len2, ch.segs.len2);
      copy(S.cx, ch.segs.cx), copy(S.cy, ch.segs.cy), copy(S.cz, ch.segs.cz), copy(S.rad, ch.segs.rad);
      chunks[c].push_back(std::move(ch));
    }
  }

  std::vector<Hit> hits;
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& A = segs[i];
    const double na = static_cast<double>(curves[i].samples.size());
    for (std::size_t j = i; j < curves.size(); ++j) {
      const auto& B = segs[j];
      for (const Chunk& ca : chunks[i]) {
        for (const Chunk& cb : chunks[j]) {
          if (i == j && cb.begin + cb.segs.size() <= ca.begin) continue;
          const double reach = ca.radius + cb.radius + r;
          const Vec3 dc = ca.center - cb.center;
          if (dot(dc, dc) > reach * reach) continue;
          for (std::size_t a = ca.begin; a < ca.begin + ca.segs.size(); ++a) {
            K.sphere_candidates({A.cx[a], A.cy[a], A.cz[a]}, A.rad[a], cb.segs, r, cand);
            const Vec3 p0{A.x0[a], A.y0[a], A.z0[a]}, d1{A.dx[a], A.dy[a], A.dz[a]};
            for (std::size_t bl : cand) {
              const std::size_t b = cb.begin + bl;
              if (i == j && (b <= a || index_distance(double(a), double(b), na, curves[i].closed) <= window[i]))
                continue;
              const ClosestPair cp =
                  segment_segment(p0, d1, {B.x0[b], B.y0[b], B.z0[b]}, {B.dx[b], B.dy[b], B.dz[b]});
              if (cp.dist2 > r2) continue;
              hits.push_back({0.5 * (cp.p + cp.q), static_cast<int>(i), static_cast<int>(j), a + cp.s, b + cp.t});
            }
          }
        }
      }
    }
  }

  // Hits merge when they are close, or when they come from the same pair of
  // local strands (a tangential contact produces a run of nearby hits).
  auto same_strand = [&](int c, double pa, double pb) {
    return index_distance(pa, pb, static_cast<double>(curves[c].samples.size()), curves[c].closed) <= window[c];
  };
  UnionFind uf(hits.size());
  for (std::size_t a = 0; a < hits.size(); ++a) {
    for (std::size_t b = a + 1; b < hits.size(); ++b) {
      const Vec3 d = hits[a].point - hits[b].point;
      const Hit &ha = hits[a], &hb = hits[b];
      const bool chained = ha.curve_a == hb.curve_a && ha.curve_b == hb.curve_b &&
                           same_strand(ha.curve_a, ha.param_a, hb.param_a) &&
                           same_strand(ha.curve_b, ha.param_b, hb.param_b);
      if (chained || dot(d, d) <= r2) uf.unite(a, b);
    }
  }
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<long> slot(hits.size(), -1);
  for (std::size_t h = 0; h < hits.size(); ++h) {
    const std::size_t root = uf.find(h);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[slot[root]].push_back(h);
  }

  std::vector<VertexRecord> out;
  for (const auto& cl : clusters) {
    VertexRecord v;
    Vec3 centroid;
    for (std::size_t h : cl) centroid += hits[h].point;
    v.position = surface.project(centroid / static_cast<double>(cl.size()));

    // Group the parameters of each curve into local strands.
    std::vector<std::pair<int, double>> params;
    for (std::size_t h : cl) {
      params.emplace_back(hits[h].curve_a, hits[h].param_a);
      params.emplace_back(hits[h].curve_b, hits[h].param_b);
    }
    std::sort(params.begin(), params.end());
    // Split each curve's sorted parameters at gaps wider than the strand
    // window; for closed curves the last run may wrap onto the first.
    std::vector<std::vector<double>> groups;
    std::vector<int> group_curve;
    for (std::size_t b = 0; b < params.size();) {
      const int cid = params[b].first;
      std::size_t e = b;
      while (e < params.size() && params[e].first == cid) ++e;
      const double n = static_cast<double>(curves[cid].samples.size());
      const std::size_t first_group = groups.size();
      for (std::size_t k = b; k < e; ++k) {
        if (k == b || params[k].second - params[k - 1].second > window[cid]) {
          groups.emplace_back();
          group_curve.push_back(cid);
        }
        groups.back().push_back(params[k].second);
      }
      if (curves[cid].closed && groups.size() - first_group > 1 &&
          params[b].second + n - params[e - 1].second <= window[cid]) {
        auto& head = groups[first_group];
        head.insert(head.begin(), groups.back().begin(), groups.back().end());
        groups.pop_back();
        group_curve.pop_back();
      }
      b = e;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& c = curves[group_curve[g]];
      const double n = static_cast<double>(c.samples.size());
      // mean relative to the first entry, respecting wrap-around
      double acc = 0.0;
      const double ref = groups[g].front();
      for (double p : groups[g]) {
        double d = p - ref;
        if (c.closed) d -= n * std::round(d / n);
        acc += d;
      }
      double par = ref + acc / groups[g].size();
      if (c.closed) par -= n * std::floor(par / n);
      StrandRef s;
      s.curve = group_curve[g];
      s.parameter = par;
      const Vec3 t = surface.tangent_project(v.position, tangent_at(c, par));
      s.tangent = t / surface.speed(v.position, t);
      v.strands.push_back(s);
    }
    v.order = static_cast<int>(v.strands.size());

    const Vec3 e1 = v.strands.front().tangent;
    const Vec3 e2 = surface.rotate_quarter(v.position, e1);
    for (const auto& s : v.strands) {
      double ang = std::atan2(surface.inner(v.position, s.tangent, e2), surface.inner(v.position, s.tangent, e1));
      ang -= kPi * std::floor(ang / kPi);
      v.strand_angles.push_back(ang);
    }
    v.min_angle = kPi / 2;
    for (std::size_t a = 0; a < v.strand_angles.size(); ++a) {
      for (std::size_t b = a + 1; b < v.strand_angles.size(); ++b) {
        const double d = std::abs(v.strand_angles[a] - v.strand_angles[b]);
        v.min_angle = std::min(v.min_angle, std::min(d, kPi - d));
      }
    }
    v.transverse = v.min_angle >= opt.angle_threshold;
    if (v.order >= 2) out.push_back(std::move(v));
  }

  for (std::size_t a = 0; a < out.size(); ++a) {
    for (std::size_t b = a + 1; b < out.size(); ++b) {
      if (norm(out[a].position - out[b].position) < 2.0 * r) {
        throw Error(ErrorKind::AmbiguousCluster, "vertex clusters closer than twice the clustering radius");
      }
    }
  }
  return out;
}

double hausdorff_distance(const GeodesicCurve& a, const GeodesicCurve& b, double early_exit) {
  const auto& K = kernels::active();
  auto one_sided = [&](const GeodesicCurve& from, const GeodesicCurve& to) {
    const auto segs = kernels::SegmentSoA::from_points(to.samples, to.closed);
    double worst = 0.0;
    for (const Vec3& p : from.samples) {
      worst = std::max(worst, K.nearest_segment(p, segs).dist2);
      if (early_exit > 0.0 && worst > early_exit * early_exit) break;
    }
    return std::sqrt(worst);
  };
  const double ab = one_sided(a, b);
  if (early_exit > 0.0 && ab > early_exit) return ab;
  return std::max(ab, one_sided(b, a));
}

GeodesicNetwork make_network(const Surface& surface, std::vector<GeodesicCurve> curves, const DetectOptions& opt) {
  GeodesicNetwork net{surface, std::move(curves), {}, 0.0, opt.angle_threshold};
  net.clustering_radius = opt.clustering_radius > 0.0 ? opt.clustering_radius : 1e-4 * surface.diameter();
  for (std::size_t i = 0; i < net.curves.size(); ++i) {
    for (std::size_t j = i + 1; j < net.curves.size(); ++j) {
      if (hausdorff_distance(net.curves[i], net.curves[j], net.clustering_radius) <= net.clustering_radius) {
        throw Error(ErrorKind::InvalidArgument,
                    "curves " + std::to_string(i) + " and " + std::to_string(j) + " share an image");
      }
    }
  }
  DetectOptions o = opt;
  o.clustering_radius = net.clustering_radius;
  net.vertices = detect_vertices(surface, net.curves, o);
  return net;
}

long weighted_vertex_count(const std::vector<VertexRecord>& vertices) {
  long total = 0;
  for (const auto& v : vertices) total += static_cast<long>(v.order) * (v.order - 1) / 2;
  return total;
}

bool is_g_plus(const GeodesicNetwork& network) {
  return std::all_of(network.vertices.begin(), network.vertices.end(),
                     [](const VertexRecord& v) { return v.order == 2 && v.transverse; });
}

AppendixReport check_appendix_bounds(const GeodesicNetwork& network, int p, double K0, double omega1,
                                     const std::vector<int>& multiplicities) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  std::vector<int> mult = multiplicities;
  if (mult.empty()) mult.assign(network.curves.size(), 1);
  if (mult.size() != network.curves.size()) throw Error(ErrorKind::InvalidArgument, "one multiplicity per curve");

  AppendixReport r;
  r.p = p;
  r.K0 = K0;
  r.omega1 = omega1;
  r.edge_bound = p * omega1 / kPi;
  r.sampled_min_curvature = HUGE_VAL;
  r.sampled_max_curvature = -HUGE_VAL;
  for (const auto& c : network.curves) {
    for (const Vec3& x : c.samples) {
      const double k = gauss_curvature(network.surface, x);
      r.sampled_min_curvature = std::min(r.sampled_min_curvature, k);
      r.sampled_max_curvature = std::max(r.sampled_max_curvature, k);
    }
  }

  // A closed curve with v vertex passages is cut into v edges (one loop if v = 0).
  std::vector<long> passages(network.curves.size(), 0);
  for (const auto& v : network.vertices) {
    for (const auto& s : v.strands) passages[s.curve] += 1;
  }
  for (std::size_t i = 0; i < network.curves.size(); ++i) {
    r.edge_count += std::max<long>(passages[i], 1) * mult[i];
  }

  constexpr double slack = 1e-9;
  if (r.sampled_max_curvature > 1.0 + slack) r.hypothesis_violations.push_back("curvature exceeds 1: edge bound skipped");
  if (!(r.sampled_min_curvature > 0.0)) {
    r.hypothesis_violations.push_back("curvature not bounded below by a positive constant: edge bound skipped");
  }
  r.edge_bound_checked = r.hypothesis_violations.empty();
  r.edge_bound_pass = r.edge_bound_checked && r.edge_count <= r.edge_bound + slack;

  if (!(K0 > 0.0) || r.sampled_min_curvature < K0 - slack) {
    r.hypothesis_violations.push_back("curvature below K0 or K0 <= 0: length bound skipped");
  } else {
    r.length_bound_checked = true;
    r.length_bound = kPi * p / std::sqrt(K0);
  }
  r.length_bound_pass = r.length_bound_checked;
  for (const auto& c : network.curves) {
    r.lengths.push_back(c.length);
    const bool ok = r.length_bound_checked && c.length <= r.length_bound * (1.0 + slack);
    r.length_pass.push_back(ok);
    r.length_bound_pass = r.length_bound_pass && ok;
  }
  return r;
}

}  // namespace geolab
