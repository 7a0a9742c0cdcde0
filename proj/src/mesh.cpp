#include "backsolve/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace backsolve {

TimeMesh::TimeMesh(std::vector<double> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2) {
    throw std::invalid_argument("TimeMesh: need at least two breakpoints");
  }
  for (size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw std::invalid_argument(
          "TimeMesh: breakpoints must be strictly increasing");
    }
  }
}

double TimeMesh::max_element_length() const {
  double h = 0.0;
  for (int e = 0; e < num_elements(); ++e) h = std::max(h, element_length(e));
  return h;
}

int TimeMesh::FindElement(double t) const {
  if (t < t_start() || t > t_end()) {
    throw std::out_of_range("TimeMesh: t = " + std::to_string(t) +
                            " outside the mesh interval");
  }
  auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
  return static_cast<int>(it - breakpoints_.begin()) - 1;
}

TimeMesh TimeMesh::Restrict(double a, double b) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(length()));
  auto locate = [&](double t) {
    for (int i = 0; i < num_nodes(); ++i) {
      if (std::abs(breakpoints_[i] - t) <= tol) return i;
    }
    throw std::invalid_argument("TimeMesh::Restrict: " + std::to_string(t) +
                                " is not a breakpoint");
  };
  const int ia = locate(a);
  const int ib = locate(b);
  if (ib <= ia) throw std::invalid_argument("TimeMesh::Restrict: empty range");
  return TimeMesh(std::vector<double>(breakpoints_.begin() + ia,
                                      breakpoints_.begin() + ib + 1));
}

TimeMesh UniformTimeMesh(double t_start, double t_end, int k) {
  if (!(t_end > t_start)) {
    throw std::invalid_argument("UniformTimeMesh: t_end must exceed t_start");
  }
  if (k < 0 || k > 30) {
    throw std::invalid_argument("UniformTimeMesh: level out of range");
  }
  const int n = 1 << k;
  std::vector<double> points(n + 1);
  const double h = (t_end - t_start) / n;
  for (int i = 0; i <= n; ++i) points[i] = t_start + i * h;
  points.back() = t_end;
  return TimeMesh(std::move(points));
}

namespace {

std::vector<int> SortedFacet(std::span<const int> cell, int skip) {
  std::vector<int> facet;
  facet.reserve(cell.size() - 1);
  for (size_t i = 0; i < cell.size(); ++i) {
    if (static_cast<int>(i) != skip) facet.push_back(cell[i]);
  }
  std::sort(facet.begin(), facet.end());
  return facet;
}

double Distance(const Vertex& a, const Vertex& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

}  // namespace

SpatialMesh::SpatialMesh(int dimension, std::vector<Vertex> vertices,
                         std::vector<Cell> cells)
    : dimension_(dimension),
      vertices_(std::move(vertices)),
      cells_(std::move(cells)) {
  if (dimension_ < 1 || dimension_ > 3) {
    throw std::invalid_argument("SpatialMesh: dimension must be 1, 2 or 3");
  }
  const int nv = num_vertices();
  for (int c = 0; c < num_cells(); ++c) {
    for (int v : cell(c)) {
      if (v < 0 || v >= nv) {
        throw std::invalid_argument("SpatialMesh: vertex index out of range");
      }
    }
    if (!(CellVolume(c) > 0.0)) {
      throw std::invalid_argument("SpatialMesh: cell " + std::to_string(c) +
                                  " has nonpositive volume");
    }
  }
  boundary_.assign(nv, false);
  for (const auto& [facet, count] : FacetCellCounts()) {
    if (count == 1) {
      for (int v : facet) boundary_[v] = true;
    }
  }
}

int SpatialMesh::num_interior_vertices() const {
  return static_cast<int>(std::count(boundary_.begin(), boundary_.end(), false));
}

double SpatialMesh::CellVolume(int c) const {
  const auto v = cell(c);
  const Vertex& p0 = vertices_[v[0]];
  if (dimension_ == 1) return vertices_[v[1]][0] - p0[0];
  if (dimension_ == 2) {
    const Vertex& p1 = vertices_[v[1]];
    const Vertex& p2 = vertices_[v[2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                  (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = vertices_[v[i + 1]][j] - p0[j];
  }
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return det / 6.0;
}

double SpatialMesh::Measure() const {
  double total = 0.0;
  for (int c = 0; c < num_cells(); ++c) total += CellVolume(c);
  return total;
}

double SpatialMesh::MaxCellDiameter() const {
  double h = 0.0;
  for (int c = 0; c < num_cells(); ++c) {
    const auto v = cell(c);
    for (size_t i = 0; i < v.size(); ++i) {
      for (size_t j = i + 1; j < v.size(); ++j) {
        h = std::max(h, Distance(vertices_[v[i]], vertices_[v[j]]));
      }
    }
  }
  return h;
}

std::map<std::vector<int>, int> SpatialMesh::FacetCellCounts() const {
  std::map<std::vector<int>, int> counts;
  for (int c = 0; c < num_cells(); ++c) {
    for (int skip = 0; skip <= dimension_; ++skip) {
      ++counts[SortedFacet(cell(c), skip)];
    }
  }
  return counts;
}

double SpatialMesh::ShapeRatio(int c) const {
  if (dimension_ != 2) return 1.0;
  const auto v = cell(c);
  const double a = Distance(vertices_[v[0]], vertices_[v[1]]);
  const double b = Distance(vertices_[v[1]], vertices_[v[2]]);
  const double e = Distance(vertices_[v[2]], vertices_[v[0]]);
  const double area = CellVolume(c);
  const double circumradius = a * b * e / (4.0 * area);
  const double inradius = area / (0.5 * (a + b + e));
  return circumradius / inradius;
}

SpatialMesh UnitSquareInitial() {
  std::vector<Vertex> vertices = {
      {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 1.0, 0.0},
      {0.0, 1.0, 0.0}, {0.5, 0.5, 0.0}};
  std::vector<Cell> cells = {
      {0, 1, 4, -1}, {1, 2, 4, -1}, {2, 3, 4, -1}, {3, 0, 4, -1}};
  return SpatialMesh(2, std::move(vertices), std::move(cells));
}

SpatialMesh UnitIntervalMesh(int m) {
  if (m < 1) throw std::invalid_argument("UnitIntervalMesh: m must be >= 1");
  std::vector<Vertex> vertices(m + 1);
  for (int i = 0; i <= m; ++i) vertices[i] = {static_cast<double>(i) / m, 0, 0};
  std::vector<Cell> cells(m);
  for (int i = 0; i < m; ++i) cells[i] = {i, i + 1, -1, -1};
  return SpatialMesh(1, std::move(vertices), std::move(cells));
}

namespace {

SpatialMesh BisectOnce(const SpatialMesh& mesh) {
  if (mesh.dimension() == 3) {
    throw std::invalid_argument("RefineUniform: d = 3 is not supported");
  }
  std::vector<Vertex> vertices = mesh.vertices();
  std::map<std::pair<int, int>, int> midpoints;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoints.find(key);
    if (it != midpoints.end()) return it->second;
    const Vertex& pa = vertices[a];
    const Vertex& pb = vertices[b];
    vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]),
                        0.5 * (pa[2] + pb[2])});
    const int id = static_cast<int>(vertices.size()) - 1;
    midpoints.emplace(key, id);
    return id;
  };

  std::vector<Cell> cells;
  cells.reserve(2 * mesh.num_cells());
  for (const Cell& c : mesh.cells()) {
    const int m = midpoint(c[0], c[1]);
    if (mesh.dimension() == 1) {
      cells.push_back({c[0], m, -1, -1});
      cells.push_back({m, c[1], -1, -1});
    } else {
      // Refinement edge (c0, c1), newest vertex c2.
      cells.push_back({c[2], c[0], m, -1});
      cells.push_back({c[1], c[2], m, -1});
    }
  }
  return SpatialMesh(mesh.dimension(), std::move(vertices), std::move(cells));
}

}  // namespace

SpatialMesh RefineUniform(const SpatialMesh& mesh, int n) {
  if (n < 0) throw std::invalid_argument("RefineUniform: n must be >= 0");
  SpatialMesh result = mesh;
  for (int i = 0; i < n; ++i) result = BisectOnce(result);
  return result;
}

void WriteMesh(const SpatialMesh& mesh, std::ostream& out) {
  for (const Vertex& v : mesh.vertices()) {
    out << 'v';
    for (int j = 0; j < mesh.dimension(); ++j) out << ' ' << v[j];
    out << '\n';
  }
  for (int c = 0; c < mesh.num_cells(); ++c) {
    out << 'c';
    for (int v : mesh.cell(c)) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace backsolve
