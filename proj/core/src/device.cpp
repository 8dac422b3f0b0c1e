#include "ddsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddsim/error.hpp"
#include "ddsim/statistics.hpp"

namespace ddsim {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::XMin: return "xmin";
    case Side::XMax: return "xmax";
    case Side::YMin: return "ymin";
    case Side::YMax: return "ymax";
  }
  return "unknown";
}

int side_axis(Side side) { return (side == Side::XMin || side == Side::XMax) ? 0 : 1; }

bool Box::contains(const Point& p, int dimension) const {
  for (int a = 0; a < dimension; ++a) {
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  }
  return true;
}

double DopingProfile::at(const Point& p, int dimension) const {
  double d = 0.0;
  for (const auto& piece : bulk) {
    if (piece.box.contains(p, dimension)) d += piece.value;
  }
  return d;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

namespace {

double overlap_measure(const Box& a, const Box& b, int dimension) {
  double m = 1.0;
  for (int k = 0; k < dimension; ++k) {
    m *= std::max(0.0, std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]));
  }
  return m;
}

double box_measure(const Box& b, int dimension) {
  double m = 1.0;
  for (int k = 0; k < dimension; ++k) m *= std::max(0.0, b.hi[k] - b.lo[k]);
  return m;
}

// Portion of a side covered by a segment, as a 1D interval (a point in 1D).
std::pair<double, double> segment_range(const Segment& s, const DeviceSpec& spec) {
  if (spec.dimension == 1) return {0.0, 0.0};
  const int tangential = 1 - side_axis(s.side);
  return {std::max(s.from, 0.0), std::min(s.to, spec.extent[tangential])};
}

bool segments_overlap(const Segment& a, const Segment& b, const DeviceSpec& spec) {
  if (a.side != b.side) return false;
  if (spec.dimension == 1) return true;
  const auto [a0, a1] = segment_range(a, spec);
  const auto [b0, b1] = segment_range(b, spec);
  return std::min(a1, b1) - std::max(a0, b0) > 0.0;
}

bool side_exists(Side side, int dimension) { return dimension == 2 || side_axis(side) == 0; }

}  // namespace

ValidationReport validate_device(const DeviceSpec& spec) {
  ValidationReport report;
  auto& v = report.violations;
  const int dim = spec.dimension;
  if (dim != 1 && dim != 2) {
    v.push_back("dimension must be 1 or 2");
    return report;
  }
  for (int a = 0; a < dim; ++a) {
    if (!(spec.extent[a] > 0.0) || !std::isfinite(spec.extent[a])) {
      v.push_back("extent must be positive and finite");
    }
  }
  if (!(spec.bounds.low > 0.0) || !(spec.bounds.high >= spec.bounds.low)) {
    v.push_back("ellipticity bounds must satisfy 0 < low <= high");
  }

  // Layers: inside the domain, pairwise non-overlapping, measures summing to
  // the domain measure -> they tile the box.
  if (spec.layers.empty()) v.push_back("at least one material layer is required");
  Box domain{{0.0, 0.0}, spec.extent};
  double covered = 0.0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    bool inside = true;
    for (int a = 0; a < dim; ++a) {
      if (layer.bounds.lo[a] < 0.0 || layer.bounds.hi[a] > spec.extent[a] ||
          !(layer.bounds.hi[a] > layer.bounds.lo[a])) {
        inside = false;
      }
    }
    if (!inside) v.push_back("layer '" + layer.name + "' is empty or leaves the domain");
    covered += box_measure(layer.bounds, dim);
    for (std::size_t j = 0; j < i; ++j) {
      if (overlap_measure(layer.bounds, spec.layers[j].bounds, dim) > 0.0) {
        v.push_back("overlapping layers '" + spec.layers[j].name + "' and '" + layer.name + "'");
      }
    }
    const auto check_tensor = [&](const DiagTensor& t, const char* what) {
      for (int a = 0; a < dim; ++a) {
        if (!(t[a] >= spec.bounds.low)) {
          v.push_back("ellipticity lower bound violated by " + std::string(what) + " in layer '" +
                      layer.name + "'");
        } else if (!(t[a] <= spec.bounds.high)) {
          v.push_back("ellipticity upper bound violated by " + std::string(what) + " in layer '" +
                      layer.name + "'");
        }
      }
    };
    check_tensor(layer.eps, "eps");
    check_tensor(layer.mu1, "mu1");
    check_tensor(layer.mu2, "mu2");
  }
  const double domain_measure = box_measure(domain, dim);
  if (!spec.layers.empty() && std::abs(covered - domain_measure) > 1e-12 * domain_measure) {
    v.push_back("layers leave a gap: they do not tile the domain");
  }

  // Boundary partition and coercivity.
  bool has_capacity = false;
  std::vector<Segment> used;
  const auto check_segment = [&](const Segment& s, const std::string& name) {
    if (!side_exists(s.side, dim)) {
      v.push_back("boundary segment '" + name + "' lies on a side absent in 1D");
      return;
    }
    if (dim == 2) {
      const auto [a, b] = segment_range(s, spec);
      if (!(b > a)) v.push_back("boundary segment '" + name + "' has empty extent");
    }
    for (const auto& other : used) {
      if (segments_overlap(s, other, spec)) {
        v.push_back("boundary segment '" + name + "' overlaps another segment");
        break;
      }
    }
    used.push_back(s);
  };
  for (const auto& c : spec.boundary.contacts) check_segment(c.segment, c.name);
  for (const auto& r : spec.boundary.robin) {
    check_segment(r.segment, r.name);
    if (r.capacity < 0.0) {
      v.push_back("capacity must be nonnegative (segment '" + r.name + "')");
    } else if (r.capacity > 0.0) {
      has_capacity = true;
    }
    for (const auto& msg : validate_model(r.recombination)) v.push_back(msg);
  }
  if (spec.boundary.contacts.empty() && !has_capacity) {
    v.push_back("no Dirichlet contact and zero capacity");
  }
  for (const auto& msg : validate_model(spec.boundary.neumann_recombination)) v.push_back(msg);

  // Interfaces must sit on a layer boundary strictly inside the domain.
  for (const auto& itf : spec.interfaces) {
    if (itf.axis < 0 || itf.axis >= dim) {
      v.push_back("interface '" + itf.name + "' has invalid axis");
      continue;
    }
    const double tol = 1e-12 * spec.extent[itf.axis];
    if (!(itf.position > tol && itf.position < spec.extent[itf.axis] - tol)) {
      v.push_back("interface '" + itf.name + "' is not strictly inside the domain");
      continue;
    }
    bool on_boundary = false;
    for (const auto& layer : spec.layers) {
      if (std::abs(layer.bounds.hi[itf.axis] - itf.position) <= tol) on_boundary = true;
    }
    if (!on_boundary) v.push_back("interface '" + itf.name + "' is off a layer boundary");
    for (const auto& msg : validate_model(itf.recombination)) v.push_back(msg);
  }

  for (const auto& piece : spec.doping.bulk) {
    if (!std::isfinite(piece.value)) v.push_back("bulk doping must be finite");
  }
  for (const auto& sheet : spec.doping.sheets) {
    if (!std::isfinite(sheet.density)) v.push_back("sheet doping must be finite");
    if (sheet.axis < 0 || sheet.axis >= dim || sheet.position < 0.0 ||
        sheet.position > spec.extent[std::clamp(sheet.axis, 0, 1)]) {
      v.push_back("sheet doping '" + sheet.name + "' is outside the domain");
    }
  }
  return report;
}

double neutral_potential(double doping, const StatisticsModel& f1, const StatisticsModel& f2) {
  // g(phi) = d + F1(-phi) - F2(phi) is strictly decreasing.
  const auto g = [&](double phi) { return doping + f1.eval(-phi) - f2.eval(phi); };
  double lo = -1.0;
  double hi = 1.0;
  while (g(lo) < 0.0) lo *= 2.0;
  while (g(hi) > 0.0) hi *= 2.0;
  double phi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double val = g(phi);
    if (val > 0.0) {
      lo = phi;
    } else {
      hi = phi;
    }
    const double slope = -f1.eval_derivative(-phi) - f2.eval_derivative(phi);
    double next = phi - val / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - phi) <= 1e-15 * (1.0 + std::abs(phi))) return next;
    phi = next;
  }
  return phi;
}

void resolve_ohmic_contacts(DeviceSpec& spec, const StatisticsModel& f1,
                            const StatisticsModel& f2) {
  for (auto& c : spec.boundary.contacts) {
    if (!c.ohmic) continue;
    // Sample the doping just inside the middle of the contact.
    const int axis = side_axis(c.segment.side);
    Point p{0.5 * spec.extent[0], 0.5 * spec.extent[1]};
    if (spec.dimension == 2) {
      const int t = 1 - axis;
      const double a = std::max(c.segment.from, 0.0);
      const double b = std::min(c.segment.to, spec.extent[t]);
      p[t] = 0.5 * (a + b);
    }
    const double inset = 1e-9 * spec.extent[axis];
    const bool lower = c.segment.side == Side::XMin || c.segment.side == Side::YMin;
    p[axis] = lower ? inset : spec.extent[axis] - inset;
    c.builtin = neutral_potential(spec.doping.at(p, spec.dimension), f1, f2);
  }
}

}  // namespace ddsim
