#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "magloop/geometry.hpp"

/**
 * \file loop.hpp
 *
 * @brief Closed polygonal curves: the discrete model of the free loop space.
 *
 * A loop is N vertices on the parameter grid t_j = j / N with implicit closure. On the torus each
 * outgoing edge carries an integer lattice offset so the displacement
 *
 *     d_j = v_{j+1} - v_j + w_j
 *
 * is unambiguous even when the vertices themselves are stored wrapped.
 */

namespace magloop {

  class DegenerateLoop : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  class NotConcatenable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Integer lattice offset of one edge.
  struct Winding {
    int wx = 0;
    int wy = 0;
    friend bool operator==(const Winding&, const Winding&) = default;
  };

  class Loop {
  public:
    Loop() = default;

    /// Throws std::invalid_argument when N < 3, a coordinate is not finite or the offsets do not match N.
    explicit Loop(std::vector<ChartPoint> vertices, std::vector<Winding> windings = {});

    std::size_t size() const { return vertices_.size(); }

    const ChartPoint& vertex(std::size_t j) const { return vertices_[j]; }
    const std::vector<ChartPoint>& vertices() const { return vertices_; }
    const std::vector<Winding>& windings() const { return windings_; }

    /// Displacement of edge j, including its lattice offset.
    Vec2 edge(std::size_t j) const;

    /// Edge midpoint in the lifted frame of vertex j.
    ChartPoint midpoint(std::size_t j) const { return vertices_[j] + 0.5 * edge(j); }

    bool has_windings() const;
    Winding total_winding() const;

    /// True when every edge displacement is exactly zero.
    bool is_point() const;

    /// Vertices lifted to a continuous polyline; entry N equals entry 0 plus the total winding.
    std::vector<ChartPoint> lifted() const;

    /// Loop through the same lifted polyline with offsets collected on the closing edge.
    static Loop from_lifted(std::vector<ChartPoint> lifted, Winding total);

    /// Same curve starting at vertex `shift`.
    Loop cyclic_shift(std::size_t shift) const;

    /// Same image traversed backwards.
    Loop reversed() const;

    /// Vertices wrapped to the unit square, offsets adjusted. Identity on the plane.
    Loop canonical(const GeometrySpec& spec) const;

    /// Rigid chart translation (plane) or translation of the lift (torus).
    Loop translated(const Vec2& shift) const;

    /// (1 - s) * a + s * b vertexwise; requires equal N and equal offsets.
    static Loop interpolate(const Loop& a, const Loop& b, double s);

    friend bool operator==(const Loop&, const Loop&) = default;

  private:
    std::vector<ChartPoint> vertices_;
    std::vector<Winding> windings_;
  };

  /// Riemannian length of the straight segment from a to a + d with the metric frozen at its midpoint.
  double segment_length(const GeometrySpec& spec, const ChartPoint& a, const Vec2& d);

  /// Per-edge Riemannian lengths.
  std::vector<double> edge_lengths(const GeometrySpec& spec, const Loop& loop);

  /// Sum of midpoint-metric edge lengths.
  double length(const GeometrySpec& spec, const Loop& loop);

  /// Coefficient of variation of the per-edge lengths (0 for a point loop).
  double speed_cv(const GeometrySpec& spec, const Loop& loop);

  /**
   * @brief Place n_out vertices on the polygon so that consecutive chords have equal Riemannian length.
   *
   * Vertex 0 is kept. Throws DegenerateLoop on zero-length input.
   */
  Loop resample_arclength(const GeometrySpec& spec, const Loop& loop, std::size_t n_out);

  /**
   * @brief Traverse a then b from a shared vertex.
   *
   * The shared vertex is located within `tol` (after wrapping on the torus); b is moved onto it by the
   * lattice translation that matches. Throws NotConcatenable when there is no common vertex.
   */
  Loop concat(const GeometrySpec& spec, const Loop& a, const Loop& b, double tol = 1e-9);

  /// Regular N-gon; orientation +1 is counter-clockwise, -1 clockwise.
  Loop make_circle(const ChartPoint& center, double r, int orientation, std::size_t n, double phase = 0.0);

  Loop make_point_loop(const ChartPoint& p, std::size_t n);

  /// Largest vertexwise chart distance between two loops of equal size.
  double vertex_distance(const Loop& a, const Loop& b);

  /// Root-mean-square vertexwise distance; the metric used to space family members.
  double rms_distance(const Loop& a, const Loop& b);

  /// Loop CSV: `index,x,y` (plus `wx,wy` when `with_windings`), full round-trip precision.
  std::string loop_to_csv(const Loop& loop, bool with_windings);
  Loop loop_from_csv(const std::string& text);

  void write_loop_csv(const std::string& path, const Loop& loop, bool with_windings);
  Loop read_loop_csv(const std::string& path);

}  // namespace magloop
