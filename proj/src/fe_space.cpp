#include "backsolve/fe_space.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace backsolve {

namespace {

// Legendre polynomial P_q and its derivative at x in [-1, 1].
void Legendre(int q, double x, double& value, double& derivative) {
  double p0 = 1.0;
  double d0 = 0.0;
  if (q == 0) {
    value = p0;
    derivative = d0;
    return;
  }
  double p1 = x;
  double d1 = 1.0;
  for (int k = 2; k <= q; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    const double d2 = d0 + (2.0 * k - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  value = p1;
  derivative = d1;
}

// Local edge numbering: pairs (i, j), i < j, in lexicographic order.
std::vector<std::pair<int, int>> LocalEdges(int dimension) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i <= dimension; ++i) {
    for (int j = i + 1; j <= dimension; ++j) edges.emplace_back(i, j);
  }
  return edges;
}

}  // namespace

TimeBasis::TimeBasis(const TimeMesh& mesh, TimeBasisSpec spec)
    : mesh_(mesh), spec_(spec) {
  if (spec_.continuity == TimeContinuity::kContinuousLinear) {
    if (spec_.degree != 1) {
      throw std::invalid_argument("TimeBasis: continuous basis is linear");
    }
  } else if (spec_.degree < 0) {
    throw std::invalid_argument("TimeBasis: negative degree");
  }
}

int TimeBasis::size() const {
  if (spec_.continuity == TimeContinuity::kContinuousLinear) {
    return mesh_.num_nodes();
  }
  return mesh_.num_elements() * (spec_.degree + 1);
}

int TimeBasis::functions_per_element() const {
  return spec_.continuity == TimeContinuity::kContinuousLinear
             ? 2
             : spec_.degree + 1;
}

int TimeBasis::Index(int element, int local) const {
  if (spec_.continuity == TimeContinuity::kContinuousLinear) {
    return element + local;
  }
  return element * (spec_.degree + 1) + local;
}

void TimeBasis::Evaluate(int element, double s, std::span<double> values,
                         std::span<double> derivatives) const {
  const double h = mesh_.element_length(element);
  if (spec_.continuity == TimeContinuity::kContinuousLinear) {
    values[0] = 1.0 - s;
    values[1] = s;
    derivatives[0] = -1.0 / h;
    derivatives[1] = 1.0 / h;
    return;
  }
  const double x = 2.0 * s - 1.0;
  for (int q = 0; q <= spec_.degree; ++q) {
    double p = 0.0;
    double dp = 0.0;
    Legendre(q, x, p, dp);
    const double scale = spec_.orthonormal ? std::sqrt((2.0 * q + 1.0) / h) : 1.0;
    values[q] = scale * p;
    derivatives[q] = scale * dp * 2.0 / h;
  }
}

LagrangeSpace::LagrangeSpace(const SpatialMesh& mesh, SpaceBasisSpec spec)
    : mesh_(mesh), spec_(spec) {
  if (spec_.degree != 1 && spec_.degree != 2) {
    throw std::invalid_argument("LagrangeSpace: degree must be 1 or 2");
  }
  const int d = mesh_.dimension();
  const auto local_edges = LocalEdges(d);
  dofs_per_cell_ = (spec_.degree == 1)
                       ? d + 1
                       : d + 1 + static_cast<int>(local_edges.size());

  // Edges lying in the boundary: edges of facets owned by a single cell.
  std::set<std::pair<int, int>> boundary_edges;
  if (spec_.degree == 2 && d >= 2) {
    for (const auto& [facet, count] : mesh_.FacetCellCounts()) {
      if (count != 1) continue;
      for (size_t i = 0; i < facet.size(); ++i) {
        for (size_t j = i + 1; j < facet.size(); ++j) {
          boundary_edges.emplace(std::minmax(facet[i], facet[j]));
        }
      }
    }
  }

  // Retained numbering: vertices in mesh order, then edges in order of first
  // appearance.
  std::vector<int> vertex_dof(mesh_.num_vertices(), -1);
  for (int v = 0; v < mesh_.num_vertices(); ++v) {
    if (spec_.dirichlet && mesh_.is_boundary_vertex(v)) continue;
    vertex_dof[v] = num_dofs_++;
    nodes_.push_back(mesh_.vertex(v));
  }
  std::map<std::pair<int, int>, int> edge_dof;
  cell_dofs_.assign(static_cast<size_t>(mesh_.num_cells()) * dofs_per_cell_,
                    -1);
  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const auto cell = mesh_.cell(c);
    int* dofs = cell_dofs_.data() + static_cast<size_t>(c) * dofs_per_cell_;
    for (int i = 0; i <= d; ++i) dofs[i] = vertex_dof[cell[i]];
    if (spec_.degree == 1) continue;
    for (size_t e = 0; e < local_edges.size(); ++e) {
      const auto key = std::minmax(cell[local_edges[e].first],
                                   cell[local_edges[e].second]);
      auto it = edge_dof.find(key);
      if (it == edge_dof.end()) {
        int id = -1;
        if (!(spec_.dirichlet && boundary_edges.count(key))) {
          id = num_dofs_++;
          const Vertex& a = mesh_.vertex(key.first);
          const Vertex& b = mesh_.vertex(key.second);
          nodes_.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]),
                            0.5 * (a[2] + b[2])});
        }
        it = edge_dof.emplace(key, id).first;
      }
      dofs[d + 1 + e] = it->second;
    }
  }
}

void LagrangeSpace::ShapeValues(const std::array<double, 4>& bary,
                                std::span<double> values) const {
  const int d = dimension();
  if (spec_.degree == 1) {
    for (int i = 0; i <= d; ++i) values[i] = bary[i];
    return;
  }
  for (int i = 0; i <= d; ++i) values[i] = bary[i] * (2.0 * bary[i] - 1.0);
  int k = d + 1;
  for (int i = 0; i <= d; ++i) {
    for (int j = i + 1; j <= d; ++j) values[k++] = 4.0 * bary[i] * bary[j];
  }
}

void LagrangeSpace::ShapeGradients(const Eigen::MatrixXd& bary_grads,
                                   const std::array<double, 4>& bary,
                                   Eigen::Ref<Eigen::MatrixXd> grads) const {
  const int d = dimension();
  if (spec_.degree == 1) {
    grads = bary_grads;
    return;
  }
  for (int i = 0; i <= d; ++i) {
    grads.row(i) = (4.0 * bary[i] - 1.0) * bary_grads.row(i);
  }
  int k = d + 1;
  for (int i = 0; i <= d; ++i) {
    for (int j = i + 1; j <= d; ++j) {
      grads.row(k++) =
          4.0 * (bary[j] * bary_grads.row(i) + bary[i] * bary_grads.row(j));
    }
  }
}

Vertex LagrangeSpace::MapToCell(int c, const std::array<double, 4>& bary) const {
  Vertex x{0.0, 0.0, 0.0};
  const auto cell = mesh_.cell(c);
  for (size_t i = 0; i < cell.size(); ++i) {
    const Vertex& v = mesh_.vertex(cell[i]);
    for (int j = 0; j < 3; ++j) x[j] += bary[i] * v[j];
  }
  return x;
}

Eigen::MatrixXd LagrangeSpace::BarycentricGradients(int c) const {
  const int d = dimension();
  const auto cell = mesh_.cell(c);
  Eigen::MatrixXd jac(d, d);
  const Vertex& v0 = mesh_.vertex(cell[0]);
  for (int k = 0; k < d; ++k) {
    const Vertex& vk = mesh_.vertex(cell[k + 1]);
    for (int j = 0; j < d; ++j) jac(j, k) = vk[j] - v0[j];
  }
  // lambda_{1..d} = jac^{-1} (x - v0); their gradients are rows of jac^{-1}.
  const Eigen::MatrixXd inv = jac.inverse();
  Eigen::MatrixXd grads(d + 1, d);
  grads.bottomRows(d) = inv;
  grads.row(0) = -inv.colwise().sum();
  return grads;
}

}  // namespace backsolve
