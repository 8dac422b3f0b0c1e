#include "ddsim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ddsim/error.hpp"

namespace ddsim {

std::string_view to_string(FaceKind kind) {
  switch (kind) {
    case FaceKind::Interior: return "interior";
    case FaceKind::Dirichlet: return "dirichlet";
    case FaceKind::Robin: return "robin";
    case FaceKind::Neumann: return "neumann";
  }
  return "unknown";
}

double Mesh::total_volume() const {
  double v = 0.0;
  for (const auto& c : cells) v += c.volume;
  return v;
}

namespace {

struct Feature {
  double coordinate;
  std::string label;
};

std::vector<double> snapped_nodes(double length, int n, const std::vector<Feature>& features,
                                  int axis) {
  const double h = length / n;
  std::vector<double> nodes(n + 1);
  for (int i = 0; i <= n; ++i) nodes[i] = length * i / n;
  nodes[n] = length;
  std::map<int, double> claimed;
  const char* axis_name = axis == 0 ? "x" : "y";
  for (const auto& f : features) {
    if (!std::isfinite(f.coordinate)) continue;
    const double tol = 1e-12 * length;
    if (f.coordinate <= tol || f.coordinate >= length - tol) continue;
    const int i = static_cast<int>(std::lround(f.coordinate / h));
    std::ostringstream where;
    where << f.label << " at " << axis_name << " = " << f.coordinate;
    if (i <= 0 || i >= n) {
      throw GeometryError("cannot snap " + where.str() +
                          " onto the grid: it would collapse a boundary cell");
    }
    const auto it = claimed.find(i);
    if (it != claimed.end()) {
      if (std::abs(it->second - f.coordinate) <= tol) continue;
      throw GeometryError("cannot snap " + where.str() + ": node already holds a feature at " +
                          std::to_string(it->second) + " (refine the mesh)");
    }
    claimed.emplace(i, f.coordinate);
    nodes[i] = f.coordinate;
  }
  for (int i = 0; i < n; ++i) {
    if (!(nodes[i + 1] - nodes[i] > 1e-3 * h)) {
      std::ostringstream os;
      os << "snapping produced a degenerate cell between " << axis_name << " = " << nodes[i]
         << " and " << nodes[i + 1];
      throw GeometryError(os.str());
    }
  }
  return nodes;
}

bool on_plane(double coordinate, double position, double length) {
  return std::abs(coordinate - position) <= 1e-9 * length;
}

}  // namespace

Mesh build_mesh(const DeviceSpec& spec, Resolution resolution) {
  const int dim = spec.dimension;
  if (dim != 1 && dim != 2) throw GeometryError("dimension must be 1 or 2");
  if (resolution.nx < 2 || (dim == 2 && resolution.ny < 2)) {
    throw GeometryError("resolution must be at least 2 cells per axis");
  }
  Mesh mesh;
  mesh.dimension = dim;
  mesh.extent = spec.extent;

  std::array<std::vector<Feature>, 2> features;
  for (const auto& layer : spec.layers) {
    for (int a = 0; a < dim; ++a) {
      features[a].push_back({layer.bounds.lo[a], "layer '" + layer.name + "' boundary"});
      features[a].push_back({layer.bounds.hi[a], "layer '" + layer.name + "' boundary"});
    }
  }
  for (const auto& itf : spec.interfaces) {
    features[itf.axis].push_back({itf.position, "interface '" + itf.name + "'"});
    if (dim == 2) {
      features[1 - itf.axis].push_back({itf.from, "interface '" + itf.name + "' end"});
      features[1 - itf.axis].push_back({itf.to, "interface '" + itf.name + "' end"});
    }
  }
  for (const auto& sheet : spec.doping.sheets) {
    features[sheet.axis].push_back({sheet.position, "sheet '" + sheet.name + "'"});
  }
  if (dim == 2) {
    const auto add_segment = [&](const Segment& s, const std::string& name) {
      const int t = 1 - side_axis(s.side);
      features[t].push_back({s.from, "segment '" + name + "' end"});
      features[t].push_back({s.to, "segment '" + name + "' end"});
    };
    for (const auto& c : spec.boundary.contacts) add_segment(c.segment, c.name);
    for (const auto& r : spec.boundary.robin) add_segment(r.segment, r.name);
  }

  mesh.nodes[0] = snapped_nodes(spec.extent[0], resolution.nx, features[0], 0);
  if (dim == 2) {
    mesh.nodes[1] = snapped_nodes(spec.extent[1], resolution.ny, features[1], 1);
  } else {
    mesh.nodes[1] = {0.0, 1.0};
  }
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  const auto& xs = mesh.nodes[0];
  const auto& ys = mesh.nodes[1];

  mesh.cells.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Cell& c = mesh.cells[i + nx * j];
      c.index = {i, j};
      c.width = {xs[i + 1] - xs[i], dim == 2 ? ys[j + 1] - ys[j] : 1.0};
      c.center = {0.5 * (xs[i] + xs[i + 1]), dim == 2 ? 0.5 * (ys[j] + ys[j + 1]) : 0.0};
      c.volume = c.width[0] * c.width[1];
      int found = -1;
      for (std::size_t r = 0; r < spec.layers.size(); ++r) {
        if (spec.layers[r].bounds.contains(c.center, dim)) {
          if (found >= 0) {
            throw GeometryError("cell center lies in overlapping layers '" +
                                spec.layers[found].name + "' and '" + spec.layers[r].name + "'");
          }
          found = static_cast<int>(r);
        }
      }
      if (found < 0) throw GeometryError("cell center not covered by any layer");
      c.region = found;
    }
  }

  const auto cell_at = [&](int i, int j) { return i + nx * j; };
  mesh.cell_faces.assign(mesh.cells.size(), {});
  // x-normal faces: (nx + 1) * ny.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      Face f;
      f.axis = 0;
      f.center = {xs[i], dim == 2 ? 0.5 * (ys[j] + ys[j + 1]) : 0.0};
      f.area = dim == 2 ? ys[j + 1] - ys[j] : 1.0;
      if (i > 0) {
        f.minus = cell_at(i - 1, j);
        f.dist_minus = xs[i] - mesh.cells[f.minus].center[0];
      }
      if (i < nx) {
        f.plus = cell_at(i, j);
        f.dist_plus = mesh.cells[f.plus].center[0] - xs[i];
      }
      mesh.faces.push_back(f);
    }
  }
  if (dim == 2) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        Face f;
        f.axis = 1;
        f.center = {0.5 * (xs[i] + xs[i + 1]), ys[j]};
        f.area = xs[i + 1] - xs[i];
        if (j > 0) {
          f.minus = cell_at(i, j - 1);
          f.dist_minus = ys[j] - mesh.cells[f.minus].center[1];
        }
        if (j < ny) {
          f.plus = cell_at(i, j);
          f.dist_plus = mesh.cells[f.plus].center[1] - ys[j];
        }
        mesh.faces.push_back(f);
      }
    }
  }

  mesh.contact_faces.assign(spec.boundary.contacts.size(), {});
  mesh.robin_faces.assign(spec.boundary.robin.size(), {});
  mesh.interface_faces.assign(spec.interfaces.size(), {});
  mesh.sheet_faces.assign(spec.doping.sheets.size(), {});
  for (int fi = 0; fi < mesh.face_count(); ++fi) {
    Face& f = mesh.faces[fi];
    if (f.minus >= 0) mesh.cell_faces[f.minus].push_back(fi);
    if (f.plus >= 0) mesh.cell_faces[f.plus].push_back(fi);
    const int t = 1 - f.axis;
    const double tangential = dim == 2 ? f.center[t] : 0.0;
    if (f.is_boundary()) {
      const Side side = f.axis == 0 ? (f.minus < 0 ? Side::XMin : Side::XMax)
                                    : (f.minus < 0 ? Side::YMin : Side::YMax);
      f.kind = FaceKind::Neumann;
      for (std::size_t c = 0; c < spec.boundary.contacts.size(); ++c) {
        const auto& seg = spec.boundary.contacts[c].segment;
        if (seg.side == side && (dim == 1 || seg.covers(tangential))) {
          f.kind = FaceKind::Dirichlet;
          f.tag = static_cast<int>(c);
          mesh.contact_faces[c].push_back(fi);
          break;
        }
      }
      if (f.kind == FaceKind::Neumann) {
        for (std::size_t r = 0; r < spec.boundary.robin.size(); ++r) {
          const auto& seg = spec.boundary.robin[r].segment;
          if (seg.side == side && (dim == 1 || seg.covers(tangential))) {
            f.kind = FaceKind::Robin;
            f.tag = static_cast<int>(r);
            mesh.robin_faces[r].push_back(fi);
            break;
          }
        }
      }
      if (f.kind == FaceKind::Neumann) mesh.neumann_faces.push_back(fi);
    } else {
      for (std::size_t k = 0; k < spec.interfaces.size(); ++k) {
        const auto& itf = spec.interfaces[k];
        if (itf.axis == f.axis && on_plane(f.center[f.axis], itf.position, spec.extent[f.axis]) &&
            (dim == 1 || (tangential >= itf.from && tangential <= itf.to))) {
          mesh.interface_faces[k].push_back(fi);
        }
      }
    }
    for (std::size_t k = 0; k < spec.doping.sheets.size(); ++k) {
      const auto& sheet = spec.doping.sheets[k];
      if (sheet.axis == f.axis && on_plane(f.center[f.axis], sheet.position, spec.extent[f.axis]) &&
          (dim == 1 || (tangential >= sheet.from && tangential <= sheet.to))) {
        mesh.sheet_faces[k].push_back(fi);
      }
    }
  }
  return mesh;
}

std::vector<double> cell_doping(const DeviceSpec& spec, const Mesh& mesh) {
  std::vector<double> d(mesh.cells.size());
  for (std::size_t i = 0; i < mesh.cells.size(); ++i) {
    d[i] = spec.doping.at(mesh.cells[i].center, spec.dimension);
  }
  return d;
}

}  // namespace ddsim
