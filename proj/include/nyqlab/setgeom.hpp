#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// Geometry of the sets T, Omega and S: finite unions of axis-aligned boxes
// (time / frequency sets) or boxes and centered disks (time-frequency plane
// sets), plus the uniform midpoint grid used to discretize operators on them.

namespace nyqlab {

struct Box {
  // per-axis closed interval [lo, hi]
  std::vector<std::array<double, 2>> sides;

  int dimension() const { return static_cast<int>(sides.size()); }

  double volume() const {
    double v = 1.0;
    for (const auto& s : sides) v *= s[1] - s[0];
    return v;
  }
};

struct Disk {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 0.0;

  double area() const { return std::numbers::pi * radius * radius; }
};

class SetSpec {
 public:
  SetSpec(int dimension, std::vector<Box> boxes, std::vector<Disk> disks = {},
          std::string label = {})
      : m_dimension(dimension),
        m_boxes(std::move(boxes)),
        m_disks(std::move(disks)),
        m_label(std::move(label)) {
    validate();
  }

  static SetSpec interval(double lo, double hi, std::string label = {}) {
    return SetSpec(1, {Box{{{lo, hi}}}}, {}, std::move(label));
  }

  static SetSpec disk(std::array<double, 2> center, double radius,
                      std::string label = {}) {
    return SetSpec(2, {}, {Disk{center, radius}}, std::move(label));
  }

  int dimension() const { return m_dimension; }
  const std::vector<Box>& boxes() const { return m_boxes; }
  const std::vector<Disk>& disks() const { return m_disks; }
  const std::string& label() const { return m_label; }

  bool contains(const std::vector<double>& pt) const {
    for (const auto& b : m_boxes) {
      bool in = true;
      for (int a = 0; a < m_dimension; ++a)
        if (pt[a] < b.sides[a][0] || pt[a] > b.sides[a][1]) {
          in = false;
          break;
        }
      if (in) return true;
    }
    for (const auto& d : m_disks) {
      const double dx = pt[0] - d.center[0];
      const double dy = pt[1] - d.center[1];
      if (dx * dx + dy * dy <= d.radius * d.radius) return true;
    }
    return false;
  }

  // Smallest axis-aligned box containing the set.
  Box bounding_box() const {
    Box bb;
    bb.sides.assign(m_dimension,
                    {std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()});
    for (const auto& b : m_boxes)
      for (int a = 0; a < m_dimension; ++a) {
        bb.sides[a][0] = std::min(bb.sides[a][0], b.sides[a][0]);
        bb.sides[a][1] = std::max(bb.sides[a][1], b.sides[a][1]);
      }
    for (const auto& d : m_disks)
      for (int a = 0; a < 2; ++a) {
        bb.sides[a][0] = std::min(bb.sides[a][0], d.center[a] - d.radius);
        bb.sides[a][1] = std::max(bb.sides[a][1], d.center[a] + d.radius);
      }
    return bb;
  }

 private:
  void validate() const {
    if (m_dimension < 1 || m_dimension > 2)
      throw std::invalid_argument("SetSpec: dimension must be 1 or 2");
    if (m_boxes.empty() && m_disks.empty())
      throw std::invalid_argument("SetSpec: set must have at least one part");
    if (!m_disks.empty() && m_dimension != 2)
      throw std::invalid_argument(
          "SetSpec: disks are only valid for 2-dimensional plane sets");
    for (const auto& b : m_boxes) {
      if (b.dimension() != m_dimension)
        throw std::invalid_argument("SetSpec: box dimension mismatch");
      for (const auto& s : b.sides)
        if (!(s[0] < s[1]))
          throw std::invalid_argument(
              "SetSpec: interval endpoints must satisfy lo < hi");
    }
    for (const auto& d : m_disks)
      if (!(d.radius > 0.0))
        throw std::invalid_argument("SetSpec: disk radius must be positive");
    check_disjoint();
  }

  // Parts may share boundaries but not positive-measure overlap.
  void check_disjoint() const {
    for (std::size_t i = 0; i < m_boxes.size(); ++i)
      for (std::size_t j = i + 1; j < m_boxes.size(); ++j) {
        bool overlap = true;
        for (int a = 0; a < m_dimension; ++a) {
          const auto& s = m_boxes[i].sides[a];
          const auto& t = m_boxes[j].sides[a];
          if (std::min(s[1], t[1]) <= std::max(s[0], t[0])) {
            overlap = false;
            break;
          }
        }
        if (overlap)
          throw std::invalid_argument(
              "SetSpec: boxes overlap with positive measure");
      }
    for (std::size_t i = 0; i < m_disks.size(); ++i)
      for (std::size_t j = i + 1; j < m_disks.size(); ++j) {
        const double dx = m_disks[i].center[0] - m_disks[j].center[0];
        const double dy = m_disks[i].center[1] - m_disks[j].center[1];
        const double rr = m_disks[i].radius + m_disks[j].radius;
        if (dx * dx + dy * dy < rr * rr)
          throw std::invalid_argument(
              "SetSpec: disks overlap with positive measure");
      }
    for (const auto& d : m_disks)
      for (const auto& b : m_boxes) {
        // positive-measure overlap iff dist(center, box) < radius
        double dist2 = 0.0;
        for (int a = 0; a < 2; ++a) {
          const double lo = b.sides[a][0], hi = b.sides[a][1];
          const double c = d.center[a];
          const double g = std::max({0.0, lo - c, c - hi});
          dist2 += g * g;
        }
        if (dist2 < d.radius * d.radius)
          throw std::invalid_argument(
              "SetSpec: disk and box overlap with positive measure");
      }
  }

  int m_dimension;
  std::vector<Box> m_boxes;
  std::vector<Disk> m_disks;
  std::string m_label;
};

// Exact Lebesgue measure (box volumes plus disk areas).
inline double measure(const SetSpec& s) {
  double m = 0.0;
  for (const auto& b : s.boxes()) m += b.volume();
  for (const auto& d : s.disks()) m += d.area();
  return m;
}

// Size of the boundary: endpoint count in 1-d, perimeter in 2-d. Bounds the
// node-counting quadrature error as boundary_size(s) * h.
inline double boundary_size(const SetSpec& s) {
  double b = 0.0;
  for (const auto& box : s.boxes()) {
    if (s.dimension() == 1)
      b += 2.0;
    else
      b += 2.0 * ((box.sides[0][1] - box.sides[0][0]) +
                  (box.sides[1][1] - box.sides[1][0]));
  }
  for (const auto& d : s.disks()) b += 2.0 * std::numbers::pi * d.radius;
  return b;
}

// The set r*S: every endpoint, center and radius scaled by r.
inline SetSpec dilate(const SetSpec& s, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("dilate: r must be positive");
  std::vector<Box> boxes = s.boxes();
  for (auto& b : boxes)
    for (auto& side : b.sides) {
      side[0] *= r;
      side[1] *= r;
    }
  std::vector<Disk> disks = s.disks();
  for (auto& d : disks) {
    d.center[0] *= r;
    d.center[1] *= r;
    d.radius *= r;
  }
  return SetSpec(s.dimension(), std::move(boxes), std::move(disks), s.label());
}

// Uniform grid over [-L, L]^dim with midpoint nodes -L + h/2 + k*h.
// The midpoint convention keeps nodes off set boundaries in the default
// configurations, so membership tests are unambiguous.
class Grid {
 public:
  Grid(int dimension, double extent, double step)
      : m_dimension(dimension), m_extent(extent), m_step(step) {
    if (dimension < 1 || dimension > 2)
      throw std::invalid_argument("Grid: dimension must be 1 or 2");
    if (!(step > 0.0) || !(extent > 0.0))
      throw std::invalid_argument("Grid: extent and step must be positive");
    const double m = 2.0 * extent / step;
    m_axis_nodes = static_cast<long>(std::llround(m));
    if (m_axis_nodes < 1 || std::abs(m - static_cast<double>(m_axis_nodes)) >
                                1e-9 * std::max(1.0, m))
      throw std::invalid_argument("Grid: 2*extent/step must be an integer");
  }

  int dimension() const { return m_dimension; }
  double extent() const { return m_extent; }
  double step() const { return m_step; }
  long axis_nodes() const { return m_axis_nodes; }

  long total_nodes() const {
    long n = m_axis_nodes;
    for (int a = 1; a < m_dimension; ++a) n *= m_axis_nodes;
    return n;
  }

  // quadrature weight h^dim
  double weight() const {
    double w = m_step;
    for (int a = 1; a < m_dimension; ++a) w *= m_step;
    return w;
  }

  double axis_coord(long k) const {
    return -m_extent + 0.5 * m_step + static_cast<double>(k) * m_step;
  }

  // node coordinates; flat index is row-major over the axes
  std::vector<double> node(long idx) const {
    std::vector<double> pt(m_dimension);
    for (int a = m_dimension - 1; a >= 0; --a) {
      pt[a] = axis_coord(idx % m_axis_nodes);
      idx /= m_axis_nodes;
    }
    return pt;
  }

 private:
  int m_dimension;
  double m_extent;
  double m_step;
  long m_axis_nodes;
};

struct NodeSelection {
  std::vector<long> inside;
  std::vector<long> outside;
};

// Grid nodes whose coordinates lie in s, plus the complement. The set must
// fit inside the grid extent with at least one node spacing of margin on
// every side: the off-set nodes carry the kernel vectors of the localization
// operator, so they must exist.
inline NodeSelection select_nodes(const SetSpec& s, const Grid& g) {
  if (s.dimension() != g.dimension())
    throw std::invalid_argument("select_nodes: dimension mismatch");
  const Box bb = s.bounding_box();
  const double lim = g.extent() - g.step();
  for (const auto& side : bb.sides)
    if (side[0] < -lim || side[1] > lim)
      throw std::invalid_argument(
          "select_nodes: set does not fit in the grid extent with a margin "
          "of one node spacing");
  NodeSelection sel;
  const long n = g.total_nodes();
  for (long i = 0; i < n; ++i) {
    if (s.contains(g.node(i)))
      sel.inside.push_back(i);
    else
      sel.outside.push_back(i);
  }
  return sel;
}

}  // namespace nyqlab
