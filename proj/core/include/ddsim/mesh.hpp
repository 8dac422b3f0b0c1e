#pragma once

#include <array>
#include <vector>

#include "ddsim/device.hpp"

namespace ddsim {

enum class FaceKind { Interior, Dirichlet, Robin, Neumann };

std::string_view to_string(FaceKind kind);

struct Cell {
  Point center{};
  Point width{1.0, 1.0};
  double volume = 0.0;
  int region = -1;
  std::array<int, 2> index{};
};

/// Face of the tensor grid. Interior faces join `minus` (lower coordinate) and
/// `plus`; boundary faces have exactly one of them set to -1.
struct Face {
  Point center{};
  double area = 0.0;
  int axis = 0;
  int minus = -1;
  int plus = -1;
  double dist_minus = 0.0;  ///< distance from the minus cell center to the face
  double dist_plus = 0.0;   ///< distance from the face to the plus cell center
  FaceKind kind = FaceKind::Interior;
  int tag = -1;  ///< contact / robin segment index for boundary faces

  bool is_boundary() const { return minus < 0 || plus < 0; }
  /// The only adjacent cell of a boundary face.
  int boundary_cell() const { return minus < 0 ? plus : minus; }
  /// Distance from the boundary cell center to the face.
  double boundary_distance() const { return minus < 0 ? dist_plus : dist_minus; }
  /// +1 if the outward normal of the boundary cell points along +axis.
  int outward_sign() const { return minus < 0 ? -1 : 1; }
};

struct Resolution {
  int nx = 2;
  int ny = 1;
};

/// Tensor-product finite-volume mesh with region and face tagging.
struct Mesh {
  int dimension = 1;
  Point extent{1.0, 1.0};
  std::array<std::vector<double>, 2> nodes;  ///< per-axis node coordinates
  std::vector<Cell> cells;
  std::vector<Face> faces;
  std::vector<std::vector<int>> cell_faces;       ///< faces bounding each cell
  std::vector<std::vector<int>> contact_faces;    ///< per Contact
  std::vector<std::vector<int>> robin_faces;      ///< per RobinSegment
  std::vector<int> neumann_faces;                 ///< rest of Gamma
  std::vector<std::vector<int>> interface_faces;  ///< per InterfaceSpec
  std::vector<std::vector<int>> sheet_faces;      ///< per SheetDoping

  int cell_count() const { return static_cast<int>(cells.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  int nx() const { return static_cast<int>(nodes[0].size()) - 1; }
  int ny() const { return dimension == 2 ? static_cast<int>(nodes[1].size()) - 1 : 1; }
  double total_volume() const;
};

/// Builds the grid. Every layer boundary, interface, sheet and (2D) segment
/// endpoint snaps onto its nearest grid node; throws GeometryError naming the
/// coordinate if two features compete for a node or a feature would collapse
/// a boundary cell.
Mesh build_mesh(const DeviceSpec& spec, Resolution resolution);

/// Cellwise bulk doping sampled at cell centers.
std::vector<double> cell_doping(const DeviceSpec& spec, const Mesh& mesh);

}  // namespace ddsim
