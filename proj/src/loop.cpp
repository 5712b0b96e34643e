#include "magloop/loop.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace magloop {

  Loop::Loop(std::vector<ChartPoint> vertices, std::vector<Winding> windings)
      : vertices_(std::move(vertices)), windings_(std::move(windings)) {
    if (vertices_.size() < 3) throw std::invalid_argument("a loop needs at least 3 vertices");
    if (windings_.empty()) windings_.assign(vertices_.size(), Winding{});
    if (windings_.size() != vertices_.size()) throw std::invalid_argument("one winding offset per edge is required");
    for (const auto& v : vertices_) {
      if (!std::isfinite(v.x()) || !std::isfinite(v.y())) throw std::invalid_argument("loop vertex is not finite");
    }
  }

  Vec2 Loop::edge(std::size_t j) const {
    std::size_t next = j + 1 == vertices_.size() ? 0 : j + 1;
    const Winding& w = windings_[j];
    return vertices_[next] - vertices_[j] + Vec2(w.wx, w.wy);
  }

  bool Loop::has_windings() const {
    return std::any_of(windings_.begin(), windings_.end(), [](const Winding& w) { return w.wx != 0 || w.wy != 0; });
  }

  Winding Loop::total_winding() const {
    Winding total;
    for (const auto& w : windings_) {
      total.wx += w.wx;
      total.wy += w.wy;
    }
    return total;
  }

  bool Loop::is_point() const {
    for (std::size_t j = 0; j < size(); ++j) {
      if (edge(j) != Vec2::Zero()) return false;
    }
    return true;
  }

  std::vector<ChartPoint> Loop::lifted() const {
    std::vector<ChartPoint> out;
    out.reserve(size() + 1);
    out.push_back(vertices_.front());
    for (std::size_t j = 0; j < size(); ++j) out.push_back(out.back() + edge(j));
    return out;
  }

  Loop Loop::from_lifted(std::vector<ChartPoint> lifted, Winding total) {
    lifted.pop_back();
    std::vector<Winding> w(lifted.size(), Winding{});
    w.back() = total;
    return Loop(std::move(lifted), std::move(w));
  }

  Loop Loop::cyclic_shift(std::size_t shift) const {
    std::size_t n = size();
    std::vector<ChartPoint> v(n);
    std::vector<Winding> w(n);
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = vertices_[(j + shift) % n];
      w[j] = windings_[(j + shift) % n];
    }
    return Loop(std::move(v), std::move(w));
  }

  Loop Loop::reversed() const {
    std::size_t n = size();
    std::vector<ChartPoint> v(n);
    std::vector<Winding> w(n);
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = vertices_[(n - j) % n];
      // New edge j runs from old vertex n-j to old vertex n-j-1, i.e. old edge n-j-1 backwards.
      const Winding& old = windings_[n - j - 1];
      w[j] = Winding{-old.wx, -old.wy};
    }
    return Loop(std::move(v), std::move(w));
  }

  Loop Loop::canonical(const GeometrySpec& spec) const {
    if (!spec.is_torus()) return *this;
    std::size_t n = size();
    std::vector<ChartPoint> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = wrap_point(spec, vertices_[j]);
    std::vector<Winding> w(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t next = (j + 1) % n;
      Vec2 off = edge(j) - (v[next] - v[j]);
      w[j] = Winding{static_cast<int>(std::lround(off.x())), static_cast<int>(std::lround(off.y()))};
    }
    return Loop(std::move(v), std::move(w));
  }

  Loop Loop::translated(const Vec2& shift) const {
    std::vector<ChartPoint> v = vertices_;
    for (auto& p : v) p += shift;
    return Loop(std::move(v), windings_);
  }

  Loop Loop::interpolate(const Loop& a, const Loop& b, double s) {
    if (a.size() != b.size()) throw std::invalid_argument("interpolated loops must have equal vertex counts");
    if (a.windings_ != b.windings_) throw std::invalid_argument("interpolated loops must have equal winding offsets");
    std::vector<ChartPoint> v(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) v[j] = (1.0 - s) * a.vertices_[j] + s * b.vertices_[j];
    return Loop(std::move(v), a.windings_);
  }

  double segment_length(const GeometrySpec& spec, const ChartPoint& a, const Vec2& d) {
    Mat2 g = metric_eval(spec, a + 0.5 * d);
    return std::sqrt(d.dot(g * d));
  }

  std::vector<double> edge_lengths(const GeometrySpec& spec, const Loop& loop) {
    std::vector<double> out(loop.size());
    for (std::size_t j = 0; j < loop.size(); ++j) out[j] = segment_length(spec, loop.vertex(j), loop.edge(j));
    return out;
  }

  double length(const GeometrySpec& spec, const Loop& loop) {
    double total = 0.0;
    for (std::size_t j = 0; j < loop.size(); ++j) total += segment_length(spec, loop.vertex(j), loop.edge(j));
    return total;
  }

  double speed_cv(const GeometrySpec& spec, const Loop& loop) {
    std::vector<double> l = edge_lengths(spec, loop);
    double n = static_cast<double>(l.size());
    double mean = std::accumulate(l.begin(), l.end(), 0.0) / n;
    if (mean == 0.0) return 0.0;
    double var = 0.0;
    for (double x : l) var += (x - mean) * (x - mean);
    return std::sqrt(var / n) / mean;
  }

  namespace {

    // Arc-length parameterisation of a lifted polyline with per-edge frozen metric.
    struct Polyline {
      std::vector<ChartPoint> pts;  // n + 1 points, last one closes the curve
      std::vector<double> cum;      // cumulative Riemannian length, n + 1 entries

      Polyline(const GeometrySpec& spec, std::vector<ChartPoint> lifted) : pts(std::move(lifted)) {
        cum.assign(pts.size(), 0.0);
        for (std::size_t e = 0; e + 1 < pts.size(); ++e) cum[e + 1] = cum[e] + segment_length(spec, pts[e], pts[e + 1] - pts[e]);
      }

      double total() const { return cum.back(); }

      ChartPoint at(double s) const {
        if (s <= 0.0) return pts.front();
        if (s >= total()) return pts.back();
        auto it = std::upper_bound(cum.begin(), cum.end(), s);
        std::size_t e = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
        while (e + 1 < cum.size() && cum[e + 1] == cum[e]) ++e;
        double span = cum[e + 1] - cum[e];
        double frac = span > 0.0 ? (s - cum[e]) / span : 0.0;
        if (frac == 0.0) return pts[e];
        return pts[e] + frac * (pts[e + 1] - pts[e]);
      }
    };

  }  // namespace

  namespace {

    // Places n_out - 1 vertices after pts(0) so that consecutive chords all equal c; each vertex is the
    // first point along the polyline at chord distance c from its predecessor. Returns false if the
    // polyline runs out first.
    bool march(const GeometrySpec& spec, const Polyline& poly, double c, std::vector<double>& arc) {
      std::size_t e = 0;  // next polyline vertex to test
      for (std::size_t j = 1; j < arc.size(); ++j) {
        const ChartPoint from = poly.at(arc[j - 1]);
        auto chord = [&](double s) { return segment_length(spec, from, poly.at(s) - from); };
        double lo = arc[j - 1];
        while (e < poly.cum.size() && poly.cum[e] <= lo) ++e;
        double hi = -1.0;
        for (; e < poly.cum.size(); ++e) {
          if (chord(poly.cum[e]) >= c) {
            hi = poly.cum[e];
            break;
          }
          lo = poly.cum[e];
        }
        if (hi < 0.0) return false;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * poly.total(); ++it) {
          double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (chord(mid) >= c ? hi : lo) = mid;
        }
        arc[j] = hi;
      }
      return true;
    }

  }  // namespace

  Loop resample_arclength(const GeometrySpec& spec, const Loop& loop, std::size_t n_out) {
    if (n_out < 3) throw std::invalid_argument("resample_arclength needs n_out >= 3");
    Polyline poly(spec, loop.lifted());
    double total = poly.total();
    if (!(total > 0.0)) throw DegenerateLoop("cannot resample a zero-length loop");

    // Bisection on the common chord c: too small leaves a long closing chord, too large runs off the end.
    std::vector<double> arc(n_out, 0.0), best(n_out, 0.0);
    const ChartPoint end = poly.pts.back();
    auto closing = [&](const std::vector<double>& a) {
      ChartPoint last = poly.at(a.back());
      return segment_length(spec, last, end - last);
    };
    double lo = 0.0, hi = total / static_cast<double>(n_out);
    for (std::size_t j = 0; j < n_out; ++j) best[j] = total * static_cast<double>(j) / static_cast<double>(n_out);
    if (march(spec, poly, hi, arc) && closing(arc) >= hi) {
      best = arc;  // straight pieces: chords equal arcs
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double c = 0.5 * (lo + hi);
        if (c <= lo || c >= hi) break;
        if (march(spec, poly, c, arc) && closing(arc) >= c) {
          lo = c;
          best = arc;
        } else {
          hi = c;
        }
      }
    }

    std::vector<ChartPoint> pts(n_out + 1);
    for (std::size_t j = 0; j < n_out; ++j) pts[j] = poly.at(best[j]);
    pts[n_out] = end;
    Winding w = loop.total_winding();
    Loop out = Loop::from_lifted(std::move(pts), w);
    return spec.is_torus() && loop.has_windings() ? out.canonical(spec) : out;
  }

  Loop concat(const GeometrySpec& spec, const Loop& a, const Loop& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        Vec2 delta = a.vertex(i) - b.vertex(j);
        if (spec.is_torus()) delta -= Vec2(std::round(delta.x()), std::round(delta.y()));
        if (delta.norm() > tol) continue;

        Loop ra = a.cyclic_shift(i);
        Loop rb = b.cyclic_shift(j);
        Vec2 lattice = (a.vertex(i) - b.vertex(j)) - delta;
        std::vector<ChartPoint> v;
        std::vector<Winding> w;
        v.reserve(a.size() + b.size());
        w.reserve(a.size() + b.size());
        for (std::size_t k = 0; k < ra.size(); ++k) {
          v.push_back(ra.vertex(k));
          w.push_back(ra.windings()[k]);
        }
        for (std::size_t k = 0; k < rb.size(); ++k) {
          v.push_back(rb.vertex(k) + lattice);
          w.push_back(rb.windings()[k]);
        }
        return Loop(std::move(v), std::move(w));
      }
    }
    throw NotConcatenable("loops share no common vertex");
  }

  Loop make_circle(const ChartPoint& center, double r, int orientation, std::size_t n, double phase) {
    if (r < 0.0) throw std::invalid_argument("circle radius must be non-negative");
    if (n < 3) throw std::invalid_argument("a loop needs at least 3 vertices");
    if (r == 0.0) return make_point_loop(center, n);
    double sign = orientation < 0 ? -1.0 : 1.0;
    std::vector<ChartPoint> v(n);
    for (std::size_t j = 0; j < n; ++j) {
      double theta = phase + sign * 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      v[j] = center + r * Vec2(std::cos(theta), std::sin(theta));
    }
    return Loop(std::move(v));
  }

  Loop make_point_loop(const ChartPoint& p, std::size_t n) { return Loop(std::vector<ChartPoint>(n, p)); }

  double vertex_distance(const Loop& a, const Loop& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vertex_distance needs equal vertex counts");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, (a.vertex(j) - b.vertex(j)).norm());
    return worst;
  }

  double rms_distance(const Loop& a, const Loop& b) {
    if (a.size() != b.size()) throw std::invalid_argument("rms_distance needs equal vertex counts");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += (a.vertex(j) - b.vertex(j)).squaredNorm();
    return std::sqrt(sum / static_cast<double>(a.size()));
  }

  namespace {

    std::string format_double(double x) {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), x);
      return std::string(buf, res.ptr);
    }

    double parse_double(const std::string& s) {
      double x = 0.0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), x);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "' in loop CSV");
      return x;
    }

  }  // namespace

  std::string loop_to_csv(const Loop& loop, bool with_windings) {
    std::ostringstream out;
    out << (with_windings ? "index,x,y,wx,wy\n" : "index,x,y\n");
    for (std::size_t j = 0; j < loop.size(); ++j) {
      out << j << ',' << format_double(loop.vertex(j).x()) << ',' << format_double(loop.vertex(j).y());
      if (with_windings) out << ',' << loop.windings()[j].wx << ',' << loop.windings()[j].wy;
      out << '\n';
    }
    return out.str();
  }

  Loop loop_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty loop CSV");
    bool windings;
    if (line == "index,x,y") {
      windings = false;
    } else if (line == "index,x,y,wx,wy") {
      windings = true;
    } else {
      throw std::invalid_argument("unexpected loop CSV header '" + line + "'");
    }
    std::vector<ChartPoint> v;
    std::vector<Winding> w;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != (windings ? 5u : 3u)) throw std::invalid_argument("wrong column count in loop CSV row '" + line + "'");
      if (std::stoul(cells[0]) != v.size()) throw std::invalid_argument("loop CSV rows must be indexed 0..N-1 in order");
      v.emplace_back(parse_double(cells[1]), parse_double(cells[2]));
      w.push_back(windings ? Winding{std::stoi(cells[3]), std::stoi(cells[4])} : Winding{});
    }
    return Loop(std::move(v), std::move(w));
  }

  void write_loop_csv(const std::string& path, const Loop& loop, bool with_windings) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << loop_to_csv(loop, with_windings);
  }

  Loop read_loop_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return loop_from_csv(buf.str());
  }

}  // namespace magloop
