#include <doctest.h>

#include <cmath>
#include <random>

#include "ddsim/device.hpp"
#include "ddsim/error.hpp"
#include "ddsim/mesh.hpp"
#include "ddsim/statistics.hpp"
#include "support.hpp"

using namespace ddsim;
using doctest::Approx;

namespace {

MaterialRegion region(const std::string& name, double lo, double hi, double eps = 1.0) {
  return {name, {{lo, 0.0}, {hi, 1.0}}, {eps, eps}, {1.0, 1.0}, {1.0, 1.0}};
}

DeviceSpec line(int layers = 1) {
  DeviceSpec s;
  s.dimension = 1;
  if (layers == 1)
    s.layers = {region("bulk", 0.0, 1.0)};
  else
    s.layers = {region("a", 0.0, 0.5), region("b", 0.5, 1.0, 2.0)};
  Contact l;
  l.name = "left";
  l.segment.side = Side::XMin;
  Contact r = l;
  r.name = "right";
  r.segment.side = Side::XMax;
  s.boundary.contacts = {l, r};
  return s;
}

bool has(const ValidationReport& r, const std::string& text) {
  for (const auto& v : r.violations)
    if (v.find(text) != std::string::npos) return true;
  return false;
}

// Face count of an n x m tensor grid: (n + 1) m x-faces and n (m + 1) y-faces.
int face_oracle(int n, int m) { return (n + 1) * m + n * (m + 1); }

}  // namespace

TEST_CASE("1D uniform mesh") {
  const Mesh mesh = build_mesh(line(), {4, 1});
  REQUIRE(mesh.cell_count() == 4);
  CHECK(mesh.face_count() == 5);
  for (const auto& c : mesh.cells) CHECK(c.volume == Approx(0.25));
  CHECK(mesh.faces.front().kind == FaceKind::Dirichlet);
  CHECK(mesh.faces.back().kind == FaceKind::Dirichlet);
  CHECK(mesh.faces[2].kind == FaceKind::Interior);
}

TEST_CASE("interface between two equal layers sits on the midpoint face") {
  DeviceSpec s = line(2);
  s.interfaces = {{"junction", 0, 0.5}};
  const Mesh mesh = build_mesh(s, {4, 1});
  REQUIRE(mesh.interface_faces.size() == 1);
  REQUIRE(mesh.interface_faces[0].size() == 1);
  CHECK(mesh.interface_faces[0][0] == 2);
  CHECK(mesh.cells[1].region == 0);
  CHECK(mesh.cells[2].region == 1);
}

TEST_CASE("2D face count matches the tensor-grid enumeration") {
  DeviceSpec s;
  s.dimension = 2;
  s.layers = {{"bulk", {{0, 0}, {1, 1}}, {1, 1}, {1, 1}, {1, 1}}};
  Contact c;
  c.name = "c";
  c.segment.side = Side::XMin;
  s.boundary.contacts = {c};
  for (auto [n, m] : {std::pair{4, 2}, std::pair{3, 5}, std::pair{8, 8}}) {
    const Mesh mesh = build_mesh(s, {n, m});
    CHECK(mesh.cell_count() == n * m);
    CHECK(mesh.face_count() == face_oracle(n, m));
  }
  CHECK(build_mesh(s, {4, 2}).face_count() == 22);
}

TEST_CASE("validation messages") {
  CHECK(validate_device(line()).ok());

  DeviceSpec floating = line();
  floating.boundary.contacts.clear();
  CHECK(has(validate_device(floating), "no Dirichlet contact and zero capacity"));
  RobinSegment gate;
  gate.name = "gate";
  gate.segment.side = Side::XMax;
  gate.capacity = 1.0;
  floating.boundary.robin = {gate};
  CHECK(validate_device(floating).ok());
  floating.boundary.robin[0].capacity = -1.0;
  CHECK(has(validate_device(floating), "capacity must be nonnegative"));

  DeviceSpec zero_mu = line();
  zero_mu.layers[0].mu1.xx = 0.0;
  CHECK(has(validate_device(zero_mu), "ellipticity lower bound"));

  DeviceSpec overlap = line();
  overlap.layers.push_back(region("extra", 0.2, 0.7));
  CHECK(has(validate_device(overlap), "overlapping layers"));

  DeviceSpec gap = line();
  gap.layers[0].bounds.hi[0] = 0.8;
  CHECK(has(validate_device(gap), "gap"));

  DeviceSpec off = line(2);
  off.interfaces = {{"j", 0, 0.3}};
  CHECK(has(validate_device(off), "off a layer boundary"));
}

TEST_CASE("random layered meshes partition the domain") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    DeviceSpec s;
    s.dimension = 2;
    s.extent = {2.0, 1.5};
    const double cut = std::round(u(rng) * 16.0) / 16.0 * 2.0;
    s.layers = {{"a", {{0, 0}, {cut, 1.5}}, {1, 1}, {1, 1}, {1, 1}},
                {"b", {{cut, 0}, {2.0, 1.5}}, {2, 3}, {1, 1}, {1, 1}}};
    s.interfaces = {{"i", 0, cut}};
    Contact c;
    c.name = "c";
    c.segment.side = Side::YMin;
    c.segment.from = 0.0;
    c.segment.to = 1.0;
    RobinSegment r;
    r.name = "r";
    r.segment.side = Side::YMax;
    r.capacity = 0.5;
    s.boundary.contacts = {c};
    s.boundary.robin = {r};
    REQUIRE(validate_device(s).ok());
    const Mesh mesh = build_mesh(s, {16, 6});
    CHECK(std::abs(mesh.total_volume() - 3.0) <= 1e-13 * 3.0);
    for (const auto& cell : mesh.cells) {
      int regions = 0;
      for (const auto& layer : s.layers) regions += layer.bounds.contains(cell.center, 2);
      CHECK(regions == 1);
    }
    for (const auto& f : mesh.faces) {
      if (f.is_boundary())
        CHECK(f.kind != FaceKind::Interior);
      else
        CHECK(f.kind == FaceKind::Interior);
      CHECK(f.area > 0.0);
    }
    for (int fi : mesh.interface_faces[0]) {
      CHECK_FALSE(mesh.faces[fi].is_boundary());
      CHECK(mesh.faces[fi].center[0] == Approx(cut));
    }
    CHECK(mesh.interface_faces[0].size() == 6);
  }
}

TEST_CASE("snapping conflicts name the coordinate") {
  DeviceSpec s = line(2);
  s.doping.sheets = {{"sheet", 0, 0.5 + 1e-3, -INFINITY, INFINITY, 1.0}};
  CHECK_THROWS_AS(build_mesh(s, {4, 1}), GeometryError);
  CHECK_THROWS_AS(build_mesh(line(), {1, 1}), GeometryError);
}

TEST_CASE("doping boxes add up and ohmic contacts sit at charge neutrality") {
  DeviceSpec s = line();
  s.doping.bulk = {{{{0.0, 0.0}, {0.5, 1.0}}, 2.0}, {{{0.0, 0.0}, {1.0, 1.0}}, -1.0}};
  CHECK(s.doping.at({0.25, 0.0}, 1) == 1.0);
  CHECK(s.doping.at({0.75, 0.0}, 1) == -1.0);
  const auto b = StatisticsModel::boltzmann();
  // e^{phi} - e^{-phi} = d.
  CHECK(neutral_potential(1.0, b, b) == Approx(std::asinh(0.5)).epsilon(1e-12));
  CHECK(neutral_potential(-20.0, b, b) == Approx(-std::asinh(10.0)).epsilon(1e-12));
  for (auto& c : s.boundary.contacts) c.ohmic = true;
  resolve_ohmic_contacts(s, b, b);
  CHECK(s.boundary.contacts[0].builtin == Approx(std::asinh(0.5)));
  CHECK(s.boundary.contacts[1].builtin == Approx(-std::asinh(0.5)));
  s.boundary.contacts[0].bias = 0.3;
  CHECK(s.boundary.contacts[0].phi_at(0.0) == Approx(std::asinh(0.5) - 0.3));
  CHECK(s.boundary.contacts[0].Phi1_at(0.0) == Approx(-0.3));
  CHECK(s.boundary.contacts[0].Phi2_at(0.0) == Approx(0.3));
}

TEST_CASE("time series") {
  TimeSeries ramp({0.0, 1.0}, {0.0, 2.0});
  CHECK(ramp.at(-1.0) == 0.0);
  CHECK(ramp.at(0.25) == Approx(0.5));
  CHECK(ramp.at(5.0) == 2.0);
  CHECK(TimeSeries(3.0).at(10.0) == 3.0);
  CHECK(ramp.shifted(1.0).at(1.0) == 3.0);
  CHECK_THROWS_AS(TimeSeries({1.0, 0.0}, {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(TimeSeries({0.0}, {0.0, 1.0}), DomainError);
}
