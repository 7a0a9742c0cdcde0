#pragma once

#include <array>
#include <map>
#include <ostream>
#include <span>
#include <vector>

namespace backsolve {

/// Partition of a closed time interval [t_start, t_end] into elements.
class TimeMesh {
 public:
  /// Breakpoints must be strictly increasing and contain at least two values.
  explicit TimeMesh(std::vector<double> breakpoints);

  double t_start() const { return breakpoints_.front(); }
  double t_end() const { return breakpoints_.back(); }
  double length() const { return t_end() - t_start(); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  int num_nodes() const { return static_cast<int>(breakpoints_.size()); }
  int num_elements() const { return num_nodes() - 1; }

  double element_start(int e) const { return breakpoints_[e]; }
  double element_length(int e) const {
    return breakpoints_[e + 1] - breakpoints_[e];
  }
  double max_element_length() const;

  /// Index of the element containing t; breakpoints belong to the element on
  /// their left except t_start.
  int FindElement(double t) const;

  /// Sub-mesh on [a, b]; both ends must coincide with breakpoints.
  TimeMesh Restrict(double a, double b) const;

 private:
  std::vector<double> breakpoints_;
};

/// 2^k equal elements on [t_start, t_end].
TimeMesh UniformTimeMesh(double t_start, double t_end, int k);

using Vertex = std::array<double, 3>;
using Cell = std::array<int, 4>;

/// Conforming simplicial mesh of a d-dimensional domain, d in {1, 2, 3}.
/// Coordinates beyond the mesh dimension are zero; cell entries beyond d+1 are
/// unused. Immutable after construction.
class SpatialMesh {
 public:
  /// Validates indices and cell orientation; boundary vertices are derived
  /// from the facets that belong to exactly one cell.
  SpatialMesh(int dimension, std::vector<Vertex> vertices,
              std::vector<Cell> cells);

  int dimension() const { return dimension_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int vertices_per_cell() const { return dimension_ + 1; }

  const Vertex& vertex(int i) const { return vertices_[i]; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::span<const int> cell(int c) const {
    return {cells_[c].data(), static_cast<size_t>(dimension_ + 1)};
  }
  const std::vector<Cell>& cells() const { return cells_; }

  bool is_boundary_vertex(int i) const { return boundary_[i]; }
  const std::vector<bool>& boundary_vertex_flags() const { return boundary_; }
  int num_interior_vertices() const;

  /// Signed measure of a cell under its stored vertex order.
  double CellVolume(int c) const;
  double Measure() const;
  double MaxCellDiameter() const;

  /// Number of cells sharing each facet (sorted vertex tuple).
  std::map<std::vector<int>, int> FacetCellCounts() const;

  /// Ratio circumradius / inradius of a triangle (d = 2) or half the length
  /// ratio 1 for intervals (d = 1).
  double ShapeRatio(int c) const;

 private:
  int dimension_;
  std::vector<Vertex> vertices_;
  std::vector<Cell> cells_;
  std::vector<bool> boundary_;
};

/// (0,1)^2 cut along its diagonals: four triangles around the center vertex.
/// Each triangle is stored as (corner, corner, center) so that the edge
/// opposite the center is bisected first.
SpatialMesh UnitSquareInitial();

/// m equal elements on (0, 1).
SpatialMesh UnitIntervalMesh(int m);

/// n rounds of uniform bisection; every cell is bisected once per round.
/// Triangles are split at the midpoint of the edge between their first two
/// vertices; children inherit the midpoint as newest vertex.
SpatialMesh RefineUniform(const SpatialMesh& mesh, int n);

/// `v x y` line per vertex and `c i j k` line per cell.
void WriteMesh(const SpatialMesh& mesh, std::ostream& out);

}  // namespace backsolve
