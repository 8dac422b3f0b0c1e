#include "ddsim/operators.hpp"

#include <cmath>
#include <string>

#include "ddsim/error.hpp"

namespace ddsim {

namespace {

using Triplet = Eigen::Triplet<double>;

const DiagTensor& tensor_of(const MaterialRegion& region, Coefficient c) {
  switch (c) {
    case Coefficient::Permittivity: return region.eps;
    case Coefficient::Mobility1: return region.mu1;
    case Coefficient::Mobility2: return region.mu2;
  }
  return region.eps;
}

double cell_coefficient(const DeviceSpec& spec, const Mesh& mesh, Coefficient c,
                        std::span<const double> weight, int cell, int axis) {
  const double w = weight.empty() ? 1.0 : weight[cell];
  return w * tensor_of(spec.layers[mesh.cells[cell].region], c)[axis];
}

SparseMatrix from_triplets(int n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

std::vector<double> face_transmissibilities(const DeviceSpec& spec, const Mesh& mesh,
                                            Coefficient coefficient,
                                            std::span<const double> cell_weight) {
  std::vector<double> t(mesh.faces.size(), 0.0);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (!f.is_boundary()) {
      const double rm = cell_coefficient(spec, mesh, coefficient, cell_weight, f.minus, f.axis);
      const double rp = cell_coefficient(spec, mesh, coefficient, cell_weight, f.plus, f.axis);
      const double resistance = f.dist_minus / rm + f.dist_plus / rp;
      t[fi] = std::isfinite(resistance) ? f.area / resistance : 0.0;
    } else if (f.kind == FaceKind::Dirichlet) {
      const int c = f.boundary_cell();
      t[fi] = f.area * cell_coefficient(spec, mesh, coefficient, cell_weight, c, f.axis) /
              f.boundary_distance();
    }
  }
  return t;
}

SparseOperator assemble_poisson(const DeviceSpec& spec, const Mesh& mesh) {
  const auto trans = face_transmissibilities(spec, mesh, Coefficient::Permittivity);
  std::vector<Triplet> triplets;
  std::vector<double> diag(mesh.cells.size(), 0.0);
  SparseOperator op;
  bool coercive = false;
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (!f.is_boundary()) {
      triplets.emplace_back(f.minus, f.plus, -trans[fi]);
      triplets.emplace_back(f.plus, f.minus, -trans[fi]);
      diag[f.minus] += trans[fi];
      diag[f.plus] += trans[fi];
    } else if (f.kind == FaceKind::Dirichlet) {
      diag[f.boundary_cell()] += trans[fi];
      op.closure.dirichlet_faces.push_back(static_cast<int>(fi));
      coercive = coercive || trans[fi] > 0.0;
    } else if (f.kind == FaceKind::Robin) {
      const double capacity = spec.boundary.robin[f.tag].capacity;
      diag[f.boundary_cell()] += capacity * f.area;
      op.closure.robin_faces.push_back(static_cast<int>(fi));
      coercive = coercive || capacity > 0.0;
    }
  }
  if (!coercive) {
    throw SolverError("assemble_poisson: singular operator (no Dirichlet contact and zero capacity)",
                      0.0);
  }
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) {
      throw SolverError("assemble_poisson: singular operator (cell " + std::to_string(i) +
                            " is decoupled)",
                        0.0);
    }
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
  }
  op.matrix = from_triplets(mesh.cell_count(), triplets);
  return op;
}

Vector poisson_data_load(const DeviceSpec& spec, const Mesh& mesh, double t) {
  Vector load = Vector::Zero(mesh.cell_count());
  const auto doping = cell_doping(spec, mesh);
  for (int i = 0; i < mesh.cell_count(); ++i) load[i] = mesh.cells[i].volume * doping[i];
  for (std::size_t k = 0; k < spec.doping.sheets.size(); ++k) {
    const auto& faces = mesh.sheet_faces[k];
    const std::vector<double> rate(faces.size(), spec.doping.sheets[k].density);
    load += apply_surface_load(mesh, faces, rate);
  }
  const auto trans = face_transmissibilities(spec, mesh, Coefficient::Permittivity);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (f.kind == FaceKind::Dirichlet) {
      load[f.boundary_cell()] += trans[fi] * spec.boundary.contacts[f.tag].phi_at(t);
    } else if (f.kind == FaceKind::Robin) {
      load[f.boundary_cell()] += f.area * spec.boundary.robin[f.tag].load.at(t);
    }
  }
  return load;
}

SparseOperator assemble_elliptic(const DeviceSpec& spec, const Mesh& mesh,
                                 std::span<const double> cell_weight, Coefficient coefficient) {
  if (static_cast<int>(cell_weight.size()) != mesh.cell_count()) {
    throw DomainError("assemble_elliptic: weight field has the wrong size");
  }
  for (double w : cell_weight) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DomainError("assemble_elliptic: nonpositive weight");
    }
  }
  const auto trans = face_transmissibilities(spec, mesh, coefficient, cell_weight);
  std::vector<Triplet> triplets;
  std::vector<double> diag(mesh.cells.size(), 0.0);
  SparseOperator op;
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (!f.is_boundary()) {
      triplets.emplace_back(f.minus, f.plus, -trans[fi]);
      triplets.emplace_back(f.plus, f.minus, -trans[fi]);
      diag[f.minus] += trans[fi];
      diag[f.plus] += trans[fi];
    } else if (f.kind == FaceKind::Dirichlet) {
      diag[f.boundary_cell()] += trans[fi];
      op.closure.dirichlet_faces.push_back(static_cast<int>(fi));
    }
  }
  for (std::size_t i = 0; i < diag.size(); ++i) {
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
  }
  op.matrix = from_triplets(mesh.cell_count(), triplets);
  return op;
}

double bernoulli(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double x2 = x * x;
    return 1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0;
  }
  if (x > 0.0) return x * std::exp(-x) / -std::expm1(-x);
  return x / std::expm1(x);
}

double face_eta(const StatisticsModel& stats, double u_left, double u_right, double s_left,
                double s_right) {
  if (stats.is_boltzmann()) return 1.0;
  const double ds = s_right - s_left;
  if (std::abs(ds) > 1e-6) {
    const double dl = std::log(u_right / u_left);
    const double eta = ds / dl;
    if (std::isfinite(eta) && eta > 0.0) return eta;
  }
  return stats.eval_eta(0.5 * (s_left + s_right));
}

FluxCoefficients sg_coefficients(const FluxScheme& scheme, double u_left, double u_right,
                                 double s_left, double s_right, double drop,
                                 double transmissibility) {
  if (!(u_left > 0.0) || !(u_right > 0.0)) {
    throw DomainError("sg_flux: densities must be positive");
  }
  switch (scheme.kind) {
    case FluxScheme::Kind::CentralDiffusion:
      return {transmissibility * (1.0 + 0.5 * drop), transmissibility * (1.0 - 0.5 * drop)};
    case FluxScheme::Kind::ScharfetterGummel:
      return {transmissibility * bernoulli(-drop), transmissibility * bernoulli(drop)};
    case FluxScheme::Kind::ScharfetterGummelEnhanced: {
      if (!scheme.statistics) {
        throw DomainError("sg_flux: the enhanced scheme needs a statistics model");
      }
      const double eta = face_eta(*scheme.statistics, u_left, u_right, s_left, s_right);
      const double y = drop / eta;
      return {transmissibility * eta * bernoulli(-y), transmissibility * eta * bernoulli(y)};
    }
  }
  return {};
}

double sg_flux(const FluxScheme& scheme, double u_left, double u_right, double s_left,
               double s_right, double drop, double transmissibility) {
  const auto c = sg_coefficients(scheme, u_left, u_right, s_left, s_right, drop, transmissibility);
  return c.a * u_left - c.b * u_right;
}

ContinuitySystem assemble_continuity(const DeviceSpec& spec, const Mesh& mesh,
                                     const ContinuityInputs& in, const FluxScheme& scheme,
                                     int carrier) {
  if (carrier != 1 && carrier != 2) throw DomainError("assemble_continuity: carrier must be 1 or 2");
  const int n = mesh.cell_count();
  if (static_cast<int>(in.phi.size()) != n || static_cast<int>(in.u.size()) != n ||
      static_cast<int>(in.s.size()) != n) {
    throw DomainError("assemble_continuity: field sizes do not match the mesh");
  }
  // psi_k = phi for electrons, -phi for holes.
  const double sign = carrier == 1 ? 1.0 : -1.0;
  const auto trans = face_transmissibilities(
      spec, mesh, carrier == 1 ? Coefficient::Mobility1 : Coefficient::Mobility2);

  ContinuitySystem sys;
  sys.load = Vector::Zero(n);
  sys.faces.assign(mesh.faces.size(), {});
  sys.boundary_density.assign(mesh.faces.size(), 0.0);
  std::vector<Triplet> triplets;
  triplets.reserve(4 * mesh.faces.size());
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (!f.is_boundary()) {
      const int m = f.minus;
      const int p = f.plus;
      const auto c = sg_coefficients(scheme, in.u[m], in.u[p], in.s[m], in.s[p],
                                     sign * (in.phi[m] - in.phi[p]), trans[fi]);
      sys.faces[fi] = c;
      triplets.emplace_back(m, m, c.a);
      triplets.emplace_back(m, p, -c.b);
      triplets.emplace_back(p, m, -c.a);
      triplets.emplace_back(p, p, c.b);
    } else if (f.kind == FaceKind::Dirichlet) {
      const int cell = f.boundary_cell();
      const double ud = in.contact_density.at(f.tag);
      const auto c = sg_coefficients(scheme, in.u[cell], ud, in.s[cell], in.contact_chi.at(f.tag),
                                     sign * (in.phi[cell] - in.contact_phi.at(f.tag)), trans[fi]);
      sys.faces[fi] = c;
      sys.boundary_density[fi] = ud;
      triplets.emplace_back(cell, cell, c.a);
      sys.load[cell] += c.b * ud;
      sys.op.closure.dirichlet_faces.push_back(static_cast<int>(fi));
    }
  }
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, 0.0);
  sys.op.matrix = from_triplets(n, triplets);
  return sys;
}

std::vector<double> face_fluxes(const ContinuitySystem& system, const Mesh& mesh,
                                std::span<const double> u) {
  std::vector<double> flux(mesh.faces.size(), 0.0);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    const auto& c = system.faces[fi];
    if (!f.is_boundary()) {
      flux[fi] = c.a * u[f.minus] - c.b * u[f.plus];
    } else if (f.kind == FaceKind::Dirichlet) {
      flux[fi] = c.a * u[f.boundary_cell()] - c.b * system.boundary_density[fi];
    }
  }
  return flux;
}

Vector apply_surface_load(const Mesh& mesh, std::span<const int> faces,
                          std::span<const double> rate_per_face) {
  if (faces.size() != rate_per_face.size()) {
    throw GeometryError("apply_surface_load: one rate per face required");
  }
  Vector load = Vector::Zero(mesh.cell_count());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const int fi = faces[k];
    if (fi < 0 || fi >= mesh.face_count()) {
      throw GeometryError("apply_surface_load: face index " + std::to_string(fi) +
                          " is not a mesh face");
    }
    const Face& f = mesh.faces[fi];
    const double mass = rate_per_face[k] * f.area;
    if (f.is_boundary()) {
      load[f.boundary_cell()] += mass;
    } else {
      load[f.minus] += 0.5 * mass;
      load[f.plus] += 0.5 * mass;
    }
  }
  return load;
}

}  // namespace ddsim
