#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ddsim/recombination.hpp"
#include "ddsim/time_series.hpp"

namespace ddsim {

using Point = std::array<double, 2>;

enum class Side { XMin, XMax, YMin, YMax };

std::string_view to_string(Side side);
int side_axis(Side side);

/// Axis-aligned box. In 1D only index 0 is meaningful.
struct Box {
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};
  bool contains(const Point& p, int dimension) const;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Diagonal coefficient tensor; `yy` is ignored in 1D.
struct DiagTensor {
  double xx = 1.0;
  double yy = 1.0;
  double operator[](int axis) const { return axis == 0 ? xx : yy; }
  friend bool operator==(const DiagTensor&, const DiagTensor&) = default;
};

struct MaterialRegion {
  std::string name;
  Box bounds;
  DiagTensor eps;
  DiagTensor mu1;
  DiagTensor mu2;
  friend bool operator==(const MaterialRegion&, const MaterialRegion&) = default;
};

/// Part of one side of the box. `from`/`to` bound the tangential coordinate
/// (2D only); the default covers the whole side.
struct Segment {
  Side side = Side::XMin;
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
  bool covers(double tangential) const { return tangential >= from && tangential <= to; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Dirichlet contact. With `ohmic` set, the potential follows the applied
/// bias around the local charge-neutral value and the quasi-Fermi levels are
/// (-bias, +bias); otherwise phi/Phi1/Phi2 are taken as given.
struct Contact {
  std::string name;
  Segment segment;
  bool ohmic = false;
  TimeSeries bias{0.0};
  TimeSeries phi{0.0};
  TimeSeries Phi1{0.0};
  TimeSeries Phi2{0.0};
  /// Charge-neutral potential at the contact, filled by resolve_ohmic_contacts.
  double builtin = 0.0;

  double phi_at(double t) const { return ohmic ? builtin - bias.at(t) : phi.at(t); }
  double Phi1_at(double t) const { return ohmic ? -bias.at(t) : Phi1.at(t); }
  double Phi2_at(double t) const { return ohmic ? bias.at(t) : Phi2.at(t); }
  friend bool operator==(const Contact&, const Contact&) = default;
};

/// Robin (capacity) segment of Gamma: nu . (eps grad phi) + capacity phi = load.
struct RobinSegment {
  std::string name;
  Segment segment;
  double capacity = 0.0;
  TimeSeries load{0.0};
  SurfaceRecombination recombination{ZeroSurface{}};
  friend bool operator==(const RobinSegment&, const RobinSegment&) = default;
};

struct BoundarySpec {
  std::vector<Contact> contacts;
  std::vector<RobinSegment> robin;
  /// Surface recombination on the part of Gamma not covered by `robin`.
  SurfaceRecombination neumann_recombination{ZeroSurface{}};
  friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

/// Interior plane {x_axis = position} (tangential extent [from, to]) carrying
/// interfacial recombination.
struct InterfaceSpec {
  std::string name;
  int axis = 0;
  double position = 0.0;
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
  SurfaceRecombination recombination{ZeroSurface{}};
  friend bool operator==(const InterfaceSpec&, const InterfaceSpec&) = default;
};

struct DopingBox {
  Box box;
  double value = 0.0;
  friend bool operator==(const DopingBox&, const DopingBox&) = default;
};

/// Surface-concentrated doping on a mesh-resolved plane (may be a boundary).
struct SheetDoping {
  std::string name;
  int axis = 0;
  double position = 0.0;
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
  double density = 0.0;
  friend bool operator==(const SheetDoping&, const SheetDoping&) = default;
};

/// Bulk doping is the sum of the box values containing a point.
struct DopingProfile {
  std::vector<DopingBox> bulk;
  std::vector<SheetDoping> sheets;
  double at(const Point& p, int dimension) const;
  friend bool operator==(const DopingProfile&, const DopingProfile&) = default;
};

struct EllipticityBounds {
  double low = 1e-8;
  double high = 1e8;
  friend bool operator==(const EllipticityBounds&, const EllipticityBounds&) = default;
};

/// Layered axis-aligned device on [0, extent[0]] (x [0, extent[1]]).
struct DeviceSpec {
  int dimension = 1;
  Point extent{1.0, 1.0};
  std::vector<MaterialRegion> layers;
  BoundarySpec boundary;
  std::vector<InterfaceSpec> interfaces;
  DopingProfile doping;
  EllipticityBounds bounds;
  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate_device(const DeviceSpec& spec);

class StatisticsModel;

/// Charge-neutral potential for bulk doping d: d + F1(-phi) - F2(phi) = 0.
double neutral_potential(double doping, const StatisticsModel& f1, const StatisticsModel& f2);

/// Fills Contact::builtin for ohmic contacts from the doping next to each contact.
void resolve_ohmic_contacts(DeviceSpec& spec, const StatisticsModel& f1,
                            const StatisticsModel& f2);

}  // namespace ddsim
