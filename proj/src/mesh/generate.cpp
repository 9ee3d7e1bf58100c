#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "vortishape/mesh/mesh.hpp"

namespace vortishape::mesh {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 if d lies inside the circumcircle of the counter-clockwise triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

std::uint64_t key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  if (orient(a, b, c) <= 0.0) return -1.0;
  const Vec2* p[3] = {&a, &b, &c};
  double best = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 e1 = *p[(k + 1) % 3] - *p[k];
    const Vec2 e2 = *p[(k + 2) % 3] - *p[k];
    const double s = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    best = std::min(best, std::atan2(s, e1.dot(e2)) * 180.0 / M_PI);
  }
  return best;
}

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> n;  // n[k]: neighbour across edge (v[k], v[k+1])
  bool alive;
};

class Triangulator {
 public:
  Triangulator(const Vec2& lo, const Vec2& hi) {
    const Vec2 c = 0.5 * (lo + hi);
    const double s = 20.0 * std::max(hi.x() - lo.x(), hi.y() - lo.y());
    pts_.push_back(c + Vec2(-s, -s));
    pts_.push_back(c + Vec2(s, -s));
    pts_.push_back(c + Vec2(0.0, s));
    tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  }

  int insert(const Vec2& p) {
    const int t0 = locate(p);
    for (int v : tris_[t0].v)
      if ((pts_[v] - p).squaredNorm() < 1e-24) return v;
    const int pi = static_cast<int>(pts_.size());
    pts_.push_back(p);

    ++stamp_;
    if (mark_.size() < tris_.size() + 8) mark_.resize(2 * tris_.size() + 8, 0);
    std::vector<int> cavity{t0};
    mark_[t0] = stamp_;
    for (size_t i = 0; i < cavity.size(); ++i) {
      for (int nb : tris_[cavity[i]].n) {
        if (nb < 0 || mark_[nb] == stamp_) continue;
        const auto& v = tris_[nb].v;
        if (incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0.0) {
          mark_[nb] = stamp_;
          cavity.push_back(nb);
        }
      }
    }

    // Keep the cavity star-shaped with respect to p.
    std::vector<std::array<int, 3>> rim;  // (a, b, outer neighbour)
    for (bool changed = true; changed;) {
      changed = false;
      rim.clear();
      for (int t : cavity) {
        if (mark_[t] != stamp_) continue;
        for (int k = 0; k < 3; ++k) {
          const int nb = tris_[t].n[k];
          if (nb >= 0 && mark_[nb] == stamp_) continue;
          const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
          if (orient(pts_[a], pts_[b], p) <= 0.0 && t != t0) {
            mark_[t] = 0;
            changed = true;
            break;
          }
          rim.push_back({a, b, nb});
        }
        if (changed) break;
      }
    }
    std::vector<int> slots;
    for (int t : cavity)
      if (mark_[t] == stamp_) slots.push_back(t);
    for (int t : slots) tris_[t].alive = false;

    std::unordered_map<int, int> by_start;
    std::vector<int> created;
    size_t next_slot = 0;
    for (const auto& r : rim) {
      int t;
      if (next_slot < slots.size()) {
        t = slots[next_slot++];
      } else {
        t = static_cast<int>(tris_.size());
        tris_.push_back({});
      }
      tris_[t] = Tri{{r[0], r[1], pi}, {r[2], -1, -1}, true};
      if (r[2] >= 0) {
        auto& o = tris_[r[2]];
        for (int j = 0; j < 3; ++j)
          if (o.v[j] == r[1] && o.v[(j + 1) % 3] == r[0]) o.n[j] = t;
      }
      by_start[r[0]] = t;
      created.push_back(t);
    }
    if (next_slot != slots.size()) throw std::logic_error("cavity retriangulation mismatch");
    for (int t : created) {
      const int nxt = by_start.at(tris_[t].v[1]);
      tris_[t].n[1] = nxt;
      tris_[nxt].n[2] = t;
    }
    last_ = created.front();
    return pi;
  }

  void add_constraint(int a, int b) { constrained_.insert(key(a, b)); }

  void recover_constraints() {
    std::unordered_set<std::uint64_t> present;
    for (const auto& t : tris_)
      if (t.alive)
        for (int k = 0; k < 3; ++k) present.insert(key(t.v[k], t.v[(k + 1) % 3]));
    for (auto c : constrained_) {
      if (present.count(c)) continue;
      recover(static_cast<int>(c & 0xffffffffu), static_cast<int>(c >> 32));
    }
  }

  // Drops super-triangle triangles and those rejected by `inside`.
  template <class Inside>
  void carve(Inside inside) {
    for (auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) {
        t.alive = false;
        continue;
      }
      const Vec2 c = (pts_[t.v[0]] + pts_[t.v[1]] + pts_[t.v[2]]) / 3.0;
      if (!inside(c)) t.alive = false;
    }
    for (auto& t : tris_)
      if (t.alive)
        for (int& nb : t.n)
          if (nb >= 0 && !tris_[nb].alive) nb = -1;
  }

  int lawson() {
    int total = 0;
    for (int pass = 0; pass < 200; ++pass) {
      int flips = 0;
      for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        if (!tris_[t].alive) continue;
        for (int k = 0; k < 3; ++k) {
          const int u = tris_[t].n[k];
          if (u < 0) continue;
          const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3], c = tris_[t].v[(k + 2) % 3];
          if (constrained_.count(key(a, b))) continue;
          const int d = opposite(u, t);
          const double scale = (pts_[a] - pts_[b]).squaredNorm();
          if (incircle(pts_[a], pts_[b], pts_[c], pts_[d]) > 1e-10 * scale * scale &&
              orient(pts_[c], pts_[d], pts_[a]) < 0 && orient(pts_[c], pts_[d], pts_[b]) > 0) {
            flip(t, k);
            ++flips;
            break;
          }
        }
      }
      total += flips;
      if (flips == 0) break;
    }
    return total;
  }

  void smooth(const std::vector<char>& fixed, int sweeps) {
    const int np = static_cast<int>(pts_.size());
    std::vector<std::vector<int>> inc(np);
    std::vector<std::unordered_set<int>> nbr(np);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      for (int k = 0; k < 3; ++k) {
        inc[tris_[t].v[k]].push_back(t);
        nbr[tris_[t].v[k]].insert(tris_[t].v[(k + 1) % 3]);
        nbr[tris_[t].v[(k + 1) % 3]].insert(tris_[t].v[k]);
      }
    }
    auto quality = [&](int v) {
      double q = 180.0;
      for (int t : inc[v]) {
        const auto& tv = tris_[t].v;
        q = std::min(q, min_angle(pts_[tv[0]], pts_[tv[1]], pts_[tv[2]]));
      }
      return q;
    };
    for (int s = 0; s < sweeps; ++s) {
      for (int v = 3; v < np; ++v) {
        if (fixed[v] || nbr[v].empty()) continue;
        Vec2 avg = Vec2::Zero();
        for (int w : nbr[v]) avg += pts_[w];
        avg /= static_cast<double>(nbr[v].size());
        const double before = quality(v);
        const Vec2 old = pts_[v];
        pts_[v] = avg;
        if (quality(v) < before) pts_[v] = old;
      }
    }
  }

  const std::vector<Vec2>& points() const { return pts_; }
  const std::vector<Tri>& triangles() const { return tris_; }

 private:
  int locate(const Vec2& p) {
    int t = last_;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) {
      for (t = static_cast<int>(tris_.size()) - 1; t >= 0 && !tris_[t].alive; --t) {
      }
    }
    const int limit = static_cast<int>(tris_.size()) + 16;
    for (int step = 0; step < limit; ++step) {
      const auto& tr = tris_[t];
      int move = -1;
      for (int k = 0; k < 3; ++k) {
        const int kk = (k + step) % 3;
        if (orient(pts_[tr.v[kk]], pts_[tr.v[(kk + 1) % 3]], p) < 0.0) {
          move = tr.n[kk];
          break;
        }
      }
      if (move < 0) return t;
      t = move;
    }
    for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
      const auto& tr = tris_[s];
      if (!tr.alive) continue;
      if (orient(pts_[tr.v[0]], pts_[tr.v[1]], p) >= 0 && orient(pts_[tr.v[1]], pts_[tr.v[2]], p) >= 0 &&
          orient(pts_[tr.v[2]], pts_[tr.v[0]], p) >= 0)
        return s;
    }
    throw std::runtime_error("point location failed during triangulation");
  }

  int opposite(int u, int t) const {
    const auto& tu = tris_[u];
    for (int j = 0; j < 3; ++j)
      if (tu.n[j] == t) return tu.v[(j + 2) % 3];
    throw std::logic_error("broken adjacency");
  }

  void flip(int t, int k) {
    const int u = tris_[t].n[k];
    int j = 0;
    while (tris_[u].n[j] != t) ++j;
    const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3], c = tris_[t].v[(k + 2) % 3];
    const int d = tris_[u].v[(j + 2) % 3];
    const int n_bc = tris_[t].n[(k + 1) % 3], n_ca = tris_[t].n[(k + 2) % 3];
    const int n_ad = tris_[u].n[(j + 1) % 3], n_db = tris_[u].n[(j + 2) % 3];
    tris_[t].v = {c, a, d};
    tris_[t].n = {n_ca, n_ad, u};
    tris_[u].v = {d, b, c};
    tris_[u].n = {n_db, n_bc, t};
    auto relink = [&](int o, int from, int to) {
      if (o < 0) return;
      for (int& x : tris_[o].n)
        if (x == from) x = to;
    };
    relink(n_ad, u, t);
    relink(n_bc, t, u);
  }

  bool find_edge(int a, int b, int& t_out, int& k_out) const {
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      for (int k = 0; k < 3; ++k)
        if (tris_[t].v[k] == a && tris_[t].v[(k + 1) % 3] == b) {
          t_out = t;
          k_out = k;
          return true;
        }
    }
    return false;
  }

  void recover(int a, int b) {
    const Vec2 pa = pts_[a], pb = pts_[b];
    std::deque<std::array<int, 2>> queue;
    std::unordered_set<std::uint64_t> listed;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      for (int k = 0; k < 3; ++k) {
        const int u = t.v[k], w = t.v[(k + 1) % 3];
        if (u == a || u == b || w == a || w == b) continue;
        if (segments_cross(pa, pb, pts_[u], pts_[w]) && listed.insert(key(u, w)).second)
          queue.push_back({u, w});
      }
    }
    int guard = 0;
    while (!queue.empty()) {
      if (++guard > 100000) throw std::runtime_error("constraint recovery did not terminate");
      auto [u, w] = queue.front();
      queue.pop_front();
      int t, k;
      if (!find_edge(u, w, t, k) && !find_edge(w, u, t, k)) continue;
      const int nb = tris_[t].n[k];
      if (nb < 0) throw std::runtime_error("constraint crosses the hull");
      const int x = tris_[t].v[k], y = tris_[t].v[(k + 1) % 3], c = tris_[t].v[(k + 2) % 3];
      const int d = opposite(nb, t);
      const bool convex = orient(pts_[c], pts_[d], pts_[x]) < 0 && orient(pts_[c], pts_[d], pts_[y]) > 0;
      if (!convex) {
        queue.push_back({u, w});
        continue;
      }
      flip(t, k);
      if (c != a && c != b && d != a && d != b && segments_cross(pa, pb, pts_[c], pts_[d]))
        queue.push_back({c, d});
    }
  }

  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> mark_;
  int stamp_ = 0;
  int last_ = 0;
  std::unordered_set<std::uint64_t> constrained_;
};

double distance_to_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  double d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < poly.size(); ++i)
    d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

void check_simple(const std::vector<Vec2>& poly) {
  const size_t n = poly.size();
  if (n < 3) throw std::invalid_argument("obstacle polygon needs at least three vertices");
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      if ((j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        throw std::invalid_argument("obstacle polygon self-intersects");
    }
}

Mesh build(const Rect& rect, const std::vector<Vec2>* hole, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("mesh size must be positive");
  const double lx = rect.hi.x() - rect.lo.x();
  const double ly = rect.hi.y() - rect.lo.y();
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("empty rectangle");
  if (lx / h * ly / h > 5e7) throw std::invalid_argument("mesh size too small");

  Triangulator tri(rect.lo, rect.hi);
  struct Seg {
    int a, b;
    BoundaryTag tag;
  };
  std::vector<Seg> segs;

  const int nx = static_cast<int>(std::ceil(lx / h - 1e-9));
  const int ny = static_cast<int>(std::ceil(ly / h - 1e-9));
  std::vector<Vec2> outer;
  std::vector<BoundaryTag> outer_tag;
  for (int i = 0; i < nx; ++i) {
    outer.emplace_back(rect.lo.x() + lx * i / nx, rect.lo.y());
    outer_tag.push_back(BoundaryTag::Wall);
  }
  for (int j = 0; j < ny; ++j) {
    outer.emplace_back(rect.hi.x(), rect.lo.y() + ly * j / ny);
    outer_tag.push_back(BoundaryTag::Outflow);
  }
  for (int i = nx; i > 0; --i) {
    outer.emplace_back(rect.lo.x() + lx * i / nx, rect.hi.y());
    outer_tag.push_back(BoundaryTag::Wall);
  }
  for (int j = ny; j > 0; --j) {
    outer.emplace_back(rect.lo.x(), rect.lo.y() + ly * j / ny);
    outer_tag.push_back(BoundaryTag::Inflow);
  }
  std::vector<int> outer_id;
  for (const auto& p : outer) outer_id.push_back(tri.insert(p));
  for (size_t i = 0; i < outer.size(); ++i)
    segs.push_back({outer_id[i], outer_id[(i + 1) % outer.size()], outer_tag[i]});

  if (hole) {
    std::vector<int> hole_id;
    for (const auto& p : *hole) hole_id.push_back(tri.insert(p));
    for (size_t i = 0; i < hole->size(); ++i)
      segs.push_back({hole_id[i], hole_id[(i + 1) % hole->size()], BoundaryTag::Free});
  }
  const int n_boundary_pts = static_cast<int>(tri.points().size());

  const int rows = std::max(1, static_cast<int>(std::lround(ly / (h * std::sqrt(3.0) / 2.0))));
  const int cols = std::max(1, static_cast<int>(std::lround(lx / h)));
  const double dy = ly / rows, dx = lx / cols;
  const double clear = 0.55 * h;
  for (int j = 1; j < rows; ++j) {
    const double y = rect.lo.y() + dy * j;
    if (y - rect.lo.y() < clear || rect.hi.y() - y < clear) continue;
    const double shift = (j % 2) ? 0.5 * dx : 0.0;
    for (int i = 0; i <= cols; ++i) {
      const double x = rect.lo.x() + shift + dx * i;
      if (x - rect.lo.x() < clear || rect.hi.x() - x < clear) continue;
      const Vec2 p(x, y);
      if (hole && (point_in_polygon(p, *hole) || distance_to_polygon(p, *hole) < clear)) continue;
      tri.insert(p);
    }
  }

  for (const auto& s : segs) tri.add_constraint(s.a, s.b);
  tri.recover_constraints();
  tri.carve([&](const Vec2& c) {
    if (c.x() <= rect.lo.x() || c.x() >= rect.hi.x() || c.y() <= rect.lo.y() || c.y() >= rect.hi.y())
      return false;
    return !(hole && point_in_polygon(c, *hole));
  });
  tri.lawson();

  std::vector<char> fixed(tri.points().size(), 0);
  for (int i = 0; i < n_boundary_pts; ++i) fixed[i] = 1;
  for (int round = 0; round < 6; ++round) {
    tri.smooth(fixed, 3);
    if (tri.lawson() == 0 && round > 1) break;
  }

  const auto& pts = tri.points();
  std::vector<int> remap(pts.size(), -1);
  std::vector<Vec2> verts;
  std::vector<Triangle> tris;
  for (const auto& t : tri.triangles()) {
    if (!t.alive) continue;
    Triangle out;
    for (int k = 0; k < 3; ++k) {
      int& r = remap[t.v[k]];
      if (r < 0) {
        r = static_cast<int>(verts.size());
        verts.push_back(pts[t.v[k]]);
      }
      out[k] = r;
    }
    tris.push_back(out);
  }
  std::vector<BoundaryEdge> edges;
  for (const auto& s : segs) {
    if (remap[s.a] < 0 || remap[s.b] < 0) throw std::runtime_error("boundary vertex lost during meshing");
    edges.push_back({{remap[s.a], remap[s.b]}, s.tag});
  }
  return Mesh(std::move(verts), std::move(tris), std::move(edges), h);
}

}  // namespace

std::vector<Vec2> circle_polygon(const Vec2& center, double radius, double h) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("mesh size must be positive");
  const int n = std::max(16, static_cast<int>(std::ceil(2.0 * M_PI * radius / h - 1e-9)));
  std::vector<Vec2> poly;
  poly.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    poly.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  }
  return poly;
}

Mesh generate_channel_mesh(const Rect& rect, const Vec2& center, double radius, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh size must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  const double clearance = std::min({center.x() - rect.lo.x(), rect.hi.x() - center.x(),
                                     center.y() - rect.lo.y(), rect.hi.y() - center.y()}) -
                           radius;
  if (clearance < h)
    throw std::invalid_argument("obstacle must lie inside the channel with clearance at least h (clearance " +
                                std::to_string(clearance) + ")");
  return generate_channel_mesh(rect, circle_polygon(center, radius, h), h);
}

Mesh generate_channel_mesh(const Rect& rect, const std::vector<Vec2>& obstacle, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh size must be positive");
  check_simple(obstacle);
  for (const auto& p : obstacle) {
    const double c = std::min({p.x() - rect.lo.x(), rect.hi.x() - p.x(), p.y() - rect.lo.y(), rect.hi.y() - p.y()});
    if (c < h * (1.0 - 1e-9))
      throw std::invalid_argument("obstacle must lie inside the channel with clearance at least h");
  }
  return build(rect, &obstacle, h);
}

Mesh generate_rectangle_mesh(const Rect& rect, double h) { return build(rect, nullptr, h); }

}  // namespace vortishape::mesh
