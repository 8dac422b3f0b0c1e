#include "ddsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace ddsim {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "\n";
    out += s;
  }
  return out;
}

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return "";
  return "line " + std::to_string(mark.line + 1) + ": ";
}

/// Collects errors while walking the document.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const YAML::Node& at, const std::string& message) {
    errors.push_back(where(at) + message);
  }

  bool is_map(const YAML::Node& node, const std::string& context) {
    if (node.IsMap()) return true;
    error(node, context + " must be a mapping");
    return false;
  }

  void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                  const std::string& context) {
    if (!map.IsMap()) return;
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      std::string_view nearest;
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (auto candidate : allowed) {
        const auto d = edit_distance(key, candidate);
        if (d < best) {
          best = d;
          nearest = candidate;
        }
      }
      std::string message = "unknown key '" + key + "' in " + context;
      if (!nearest.empty()) message += " (did you mean '" + std::string(nearest) + "'?)";
      error(kv.first, message);
    }
  }

  double number(const YAML::Node& map, const char* key, double fallback,
                const std::string& context) {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    return number(node, context + "." + key);
  }

  double number(const YAML::Node& node, const std::string& context) {
    try {
      const double v = node.as<double>();
      if (std::isnan(v)) throw YAML::Exception(node.Mark(), "nan");
      return v;
    } catch (const YAML::Exception&) {
      error(node, context + " must be a number");
      return 0.0;
    }
  }

  int integer(const YAML::Node& map, const char* key, int fallback, const std::string& context) {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      error(node, context + "." + key + " must be an integer");
      return fallback;
    }
  }

  bool boolean(const YAML::Node& map, const char* key, bool fallback,
               const std::string& context) {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      error(node, context + "." + key + " must be true or false");
      return fallback;
    }
  }

  std::string text(const YAML::Node& map, const char* key, const std::string& fallback,
                   const std::string& context) {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    if (!node.IsScalar()) {
      error(node, context + "." + key + " must be a string");
      return fallback;
    }
    return node.as<std::string>();
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& context) {
    std::vector<double> out;
    if (node.IsScalar()) {
      out.push_back(number(node, context));
    } else if (node.IsSequence()) {
      for (const auto& item : node) out.push_back(number(item, context));
    } else {
      error(node, context + " must be a number or a list of numbers");
    }
    return out;
  }

  /// A point with one coordinate per dimension.
  Point point(const YAML::Node& map, const char* key, Point fallback, int dimension,
              const std::string& context) {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    const auto values = numbers(node, context + "." + key);
    if (static_cast<int>(values.size()) != dimension) {
      error(node, context + "." + key + " needs " + std::to_string(dimension) + " coordinate(s)");
      return fallback;
    }
    Point p = fallback;
    for (int a = 0; a < dimension; ++a) p[a] = values[a];
    return p;
  }

  DiagTensor tensor(const YAML::Node& node, int dimension, const std::string& context) {
    const auto values = numbers(node, context);
    if (values.size() == 1) return {values[0], values[0]};
    if (static_cast<int>(values.size()) == dimension) return {values[0], values[1]};
    error(node, context + " must be a scalar or one value per axis");
    return {};
  }

  TimeSeries series(const YAML::Node& map, const char* key, const TimeSeries& fallback,
                    const std::string& context) {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    const std::string ctx = context + "." + key;
    if (node.IsScalar()) return TimeSeries(number(node, ctx));
    if (!is_map(node, ctx)) return fallback;
    check_keys(node, {"times", "values"}, ctx);
    if (!node["times"] || !node["values"]) {
      error(node, ctx + " needs 'times' and 'values'");
      return fallback;
    }
    try {
      return TimeSeries(numbers(node["times"], ctx + ".times"),
                        numbers(node["values"], ctx + ".values"));
    } catch (const Error& e) {
      error(node, ctx + ": " + e.what());
      return fallback;
    }
  }

  Side side(const YAML::Node& map, const std::string& context) {
    const auto name = text(map, "side", "", context);
    for (Side s : {Side::XMin, Side::XMax, Side::YMin, Side::YMax}) {
      if (to_string(s) == name) return s;
    }
    error(map["side"] ? map["side"] : map, context + ".side must be one of xmin, xmax, ymin, ymax");
    return Side::XMin;
  }

  int axis(const YAML::Node& map, const std::string& context) {
    const auto name = text(map, "axis", "x", context);
    if (name == "x") return 0;
    if (name == "y") return 1;
    error(map["axis"], context + ".axis must be x or y");
    return 0;
  }

  Segment segment(const YAML::Node& map, const std::string& context) {
    Segment s;
    s.side = side(map, context);
    s.from = number(map, "from", s.from, context);
    s.to = number(map, "to", s.to, context);
    return s;
  }

  SurfaceRecombination surface(const YAML::Node& node, const std::string& context) {
    if (!is_map(node, context)) return ZeroSurface{};
    const auto model = text(node, "model", "none", context);
    if (model == "none") {
      check_keys(node, {"model"}, context);
      return ZeroSurface{};
    }
    if (model == "surface-srh") {
      check_keys(node, {"model", "n_i", "n1", "n2", "v_n", "v_p"}, context);
      SurfaceSrh m;
      m.n_i = number(node, "n_i", m.n_i, context);
      m.n1 = number(node, "n1", m.n1, context);
      m.n2 = number(node, "n2", m.n2, context);
      m.v1 = number(node, "v_n", m.v1, context);
      m.v2 = number(node, "v_p", m.v2, context);
      return m;
    }
    error(node["model"], context + ".model must be none or surface-srh");
    return ZeroSurface{};
  }

  BulkRecombination bulk(const YAML::Node& node, const std::string& context) {
    if (!is_map(node, context)) return Srh{};
    const auto model = text(node, "model", "", context);
    if (model == "srh") {
      check_keys(node, {"model", "n_i", "n1", "n2", "tau_n", "tau_p"}, context);
      Srh m;
      m.n_i = number(node, "n_i", m.n_i, context);
      m.n1 = number(node, "n1", m.n1, context);
      m.n2 = number(node, "n2", m.n2, context);
      m.tau1 = number(node, "tau_n", m.tau1, context);
      m.tau2 = number(node, "tau_p", m.tau2, context);
      return m;
    }
    if (model == "auger") {
      check_keys(node, {"model", "n_i", "c_n", "c_p"}, context);
      Auger m;
      m.n_i = number(node, "n_i", m.n_i, context);
      m.c1 = number(node, "c_n", m.c1, context);
      m.c2 = number(node, "c_p", m.c2, context);
      return m;
    }
    if (model == "mass-action") {
      check_keys(node, {"model", "rate", "g"}, context);
      MassAction m;
      m.rate = number(node, "rate", m.rate, context);
      m.g = number(node, "g", m.g, context);
      return m;
    }
    if (model == "avalanche") {
      check_keys(node, {"model", "a_n", "a_p", "c_n", "c_p"}, context);
      Avalanche m;
      m.a_n = number(node, "a_n", m.a_n, context);
      m.a_p = number(node, "a_p", m.a_p, context);
      m.c_n = number(node, "c_n", m.c_n, context);
      m.c_p = number(node, "c_p", m.c_p, context);
      return m;
    }
    error(node["model"] ? node["model"] : node,
          context + ".model must be one of srh, auger, mass-action, avalanche");
    return Srh{};
  }

  StatisticsModel statistics(const YAML::Node& map, const char* key, QuadratureOptions quad,
                             double invert_tol, const std::string& context) {
    const auto name = text(map, key, "boltzmann", context);
    if (name == "boltzmann") return StatisticsModel(StatisticsKind::Boltzmann, quad, invert_tol);
    if (name == "fermi-dirac") {
      return StatisticsModel(StatisticsKind::FermiDiracHalf, quad, invert_tol);
    }
    error(map[key], context + "." + key + " must be boltzmann or fermi-dirac");
    return StatisticsModel::boltzmann();
  }
};

void parse_device(Reader& r, const YAML::Node& node, SimulationConfig& cfg) {
  const std::string ctx = "device";
  if (!r.is_map(node, ctx)) return;
  r.check_keys(node,
               {"dimension", "extent", "resolution", "layers", "doping", "sheets", "contacts",
                "robin", "neumann_recombination", "interfaces", "ellipticity"},
               ctx);
  DeviceSpec& d = cfg.device;
  d.dimension = r.integer(node, "dimension", 1, ctx);
  if (d.dimension != 1 && d.dimension != 2) {
    r.error(node["dimension"], "device.dimension must be 1 or 2");
    d.dimension = 1;
  }
  const int dim = d.dimension;
  d.extent = r.point(node, "extent", {1.0, 1.0}, dim, ctx);
  {
    std::vector<double> res{16.0, 1.0};
    if (node["resolution"]) res = r.numbers(node["resolution"], ctx + ".resolution");
    if (static_cast<int>(res.size()) != dim) {
      r.error(node["resolution"], "device.resolution needs one cell count per axis");
    } else {
      cfg.resolution.nx = static_cast<int>(res[0]);
      cfg.resolution.ny = dim == 2 ? static_cast<int>(res[1]) : 1;
      for (double v : res) {
        if (!(v >= 1.0) || v != std::floor(v)) {
          r.error(node["resolution"], "device.resolution must be positive integers");
          break;
        }
      }
    }
  }
  const Box domain{{0.0, 0.0}, d.extent};

  if (const YAML::Node layers = node["layers"]) {
    if (!layers.IsSequence()) {
      r.error(layers, "device.layers must be a list");
    } else {
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const YAML::Node l = layers[i];
        const std::string lc = ctx + ".layers[" + std::to_string(i) + "]";
        if (!r.is_map(l, lc)) continue;
        r.check_keys(l,
                     {"name", "lo", "hi", "permittivity", "mobility", "mobility_n", "mobility_p"},
                     lc);
        MaterialRegion m;
        m.name = r.text(l, "name", "layer" + std::to_string(i), lc);
        m.bounds.lo = r.point(l, "lo", domain.lo, dim, lc);
        m.bounds.hi = r.point(l, "hi", domain.hi, dim, lc);
        if (l["permittivity"]) m.eps = r.tensor(l["permittivity"], dim, lc + ".permittivity");
        if (l["mobility"]) m.mu1 = m.mu2 = r.tensor(l["mobility"], dim, lc + ".mobility");
        if (l["mobility_n"]) m.mu1 = r.tensor(l["mobility_n"], dim, lc + ".mobility_n");
        if (l["mobility_p"]) m.mu2 = r.tensor(l["mobility_p"], dim, lc + ".mobility_p");
        d.layers.push_back(m);
      }
    }
  }

  if (const YAML::Node doping = node["doping"]) {
    if (!doping.IsSequence()) {
      r.error(doping, "device.doping must be a list");
    } else {
      for (std::size_t i = 0; i < doping.size(); ++i) {
        const YAML::Node b = doping[i];
        const std::string bc = ctx + ".doping[" + std::to_string(i) + "]";
        if (!r.is_map(b, bc)) continue;
        r.check_keys(b, {"lo", "hi", "value"}, bc);
        DopingBox box;
        box.box.lo = r.point(b, "lo", domain.lo, dim, bc);
        box.box.hi = r.point(b, "hi", domain.hi, dim, bc);
        box.value = r.number(b, "value", 0.0, bc);
        d.doping.bulk.push_back(box);
      }
    }
  }

  if (const YAML::Node sheets = node["sheets"]) {
    if (!sheets.IsSequence()) {
      r.error(sheets, "device.sheets must be a list");
    } else {
      for (std::size_t i = 0; i < sheets.size(); ++i) {
        const YAML::Node s = sheets[i];
        const std::string sc = ctx + ".sheets[" + std::to_string(i) + "]";
        if (!r.is_map(s, sc)) continue;
        r.check_keys(s, {"name", "axis", "position", "from", "to", "density"}, sc);
        SheetDoping sheet;
        sheet.name = r.text(s, "name", "sheet" + std::to_string(i), sc);
        sheet.axis = r.axis(s, sc);
        sheet.position = r.number(s, "position", 0.0, sc);
        sheet.from = r.number(s, "from", sheet.from, sc);
        sheet.to = r.number(s, "to", sheet.to, sc);
        sheet.density = r.number(s, "density", 0.0, sc);
        d.doping.sheets.push_back(sheet);
      }
    }
  }

  if (const YAML::Node contacts = node["contacts"]) {
    if (r.is_map(contacts, ctx + ".contacts")) {
      for (const auto& kv : contacts) {
        const auto name = kv.first.as<std::string>();
        const std::string cc = ctx + ".contacts." + name;
        const YAML::Node c = kv.second;
        if (!r.is_map(c, cc)) continue;
        r.check_keys(c, {"side", "from", "to", "ohmic", "bias", "phi", "Phi_n", "Phi_p"}, cc);
        Contact contact;
        contact.name = name;
        contact.segment = r.segment(c, cc);
        contact.ohmic = r.boolean(c, "ohmic", true, cc);
        if (contact.ohmic) {
          for (const char* key : {"phi", "Phi_n", "Phi_p"}) {
            if (c[key]) r.error(c[key], cc + "." + key + " is only allowed with ohmic: false");
          }
          contact.bias = r.series(c, "bias", contact.bias, cc);
        } else {
          if (c["bias"]) r.error(c["bias"], cc + ".bias is only allowed on ohmic contacts");
          contact.phi = r.series(c, "phi", contact.phi, cc);
          contact.Phi1 = r.series(c, "Phi_n", contact.Phi1, cc);
          contact.Phi2 = r.series(c, "Phi_p", contact.Phi2, cc);
        }
        d.boundary.contacts.push_back(contact);
      }
    }
  }

  if (const YAML::Node robin = node["robin"]) {
    if (r.is_map(robin, ctx + ".robin")) {
      for (const auto& kv : robin) {
        const auto name = kv.first.as<std::string>();
        const std::string rc = ctx + ".robin." + name;
        const YAML::Node s = kv.second;
        if (!r.is_map(s, rc)) continue;
        r.check_keys(s, {"side", "from", "to", "capacity", "load", "recombination"}, rc);
        RobinSegment seg;
        seg.name = name;
        seg.segment = r.segment(s, rc);
        seg.capacity = r.number(s, "capacity", 0.0, rc);
        seg.load = r.series(s, "load", seg.load, rc);
        if (s["recombination"]) seg.recombination = r.surface(s["recombination"], rc + ".recombination");
        d.boundary.robin.push_back(seg);
      }
    }
  }

  if (const YAML::Node n = node["neumann_recombination"]) {
    d.boundary.neumann_recombination = r.surface(n, ctx + ".neumann_recombination");
  }

  if (const YAML::Node itfs = node["interfaces"]) {
    if (!itfs.IsSequence()) {
      r.error(itfs, "device.interfaces must be a list");
    } else {
      for (std::size_t i = 0; i < itfs.size(); ++i) {
        const YAML::Node s = itfs[i];
        const std::string ic = ctx + ".interfaces[" + std::to_string(i) + "]";
        if (!r.is_map(s, ic)) continue;
        r.check_keys(s, {"name", "axis", "position", "from", "to", "recombination"}, ic);
        InterfaceSpec itf;
        itf.name = r.text(s, "name", "interface" + std::to_string(i), ic);
        itf.axis = r.axis(s, ic);
        itf.position = r.number(s, "position", 0.0, ic);
        itf.from = r.number(s, "from", itf.from, ic);
        itf.to = r.number(s, "to", itf.to, ic);
        if (s["recombination"]) itf.recombination = r.surface(s["recombination"], ic + ".recombination");
        d.interfaces.push_back(itf);
      }
    }
  }

  if (const YAML::Node e = node["ellipticity"]) {
    if (r.is_map(e, ctx + ".ellipticity")) {
      r.check_keys(e, {"low", "high"}, ctx + ".ellipticity");
      d.bounds.low = r.number(e, "low", d.bounds.low, ctx + ".ellipticity");
      d.bounds.high = r.number(e, "high", d.bounds.high, ctx + ".ellipticity");
    }
  }
}

void parse_models(Reader& r, const YAML::Node& root, SimulationConfig& cfg) {
  QuadratureOptions quad;
  double invert_tol = 1e-12;
  YAML::Node stats = root["statistics"];
  if (stats) {
    if (r.is_map(stats, "statistics")) {
      r.check_keys(stats, {"electrons", "holes", "quadrature_tol", "quadrature_depth", "invert_tol"},
                   "statistics");
      quad.rel_tol = r.number(stats, "quadrature_tol", quad.rel_tol, "statistics");
      quad.max_depth = r.integer(stats, "quadrature_depth", quad.max_depth, "statistics");
      invert_tol = r.number(stats, "invert_tol", invert_tol, "statistics");
      if (!(quad.rel_tol > 0.0) || quad.max_depth < 1 || !(invert_tol > 0.0)) {
        r.error(stats, "statistics tolerances must be positive");
        quad = {};
        invert_tol = 1e-12;
      }
      cfg.models.f1 = r.statistics(stats, "electrons", quad, invert_tol, "statistics");
      cfg.models.f2 = r.statistics(stats, "holes", quad, invert_tol, "statistics");
    }
  }

  const auto scheme = r.text(root, "flux_scheme", "scharfetter-gummel", "config");
  if (scheme == "scharfetter-gummel") {
    cfg.models.scheme = FluxScheme::Kind::ScharfetterGummel;
  } else if (scheme == "enhanced") {
    cfg.models.scheme = FluxScheme::Kind::ScharfetterGummelEnhanced;
  } else if (scheme == "central") {
    cfg.models.scheme = FluxScheme::Kind::CentralDiffusion;
  } else {
    r.error(root["flux_scheme"], "flux_scheme must be scharfetter-gummel, enhanced or central");
  }

  if (const YAML::Node rec = root["recombination"]) {
    if (!rec.IsSequence()) {
      r.error(rec, "recombination must be a list");
    } else {
      for (std::size_t i = 0; i < rec.size(); ++i) {
        const std::string rc = "recombination[" + std::to_string(i) + "]";
        const auto model = r.bulk(rec[i], rc);
        for (const auto& msg : validate_model(model)) r.error(rec[i], rc + ": " + msg);
        cfg.models.bulk.push_back(model);
      }
    }
  }
}

void parse_run(Reader& r, const YAML::Node& root, SimulationConfig& cfg) {
  if (const YAML::Node init = root["initial"]) {
    if (init.IsScalar()) {
      if (init.as<std::string>() != "equilibrium") {
        r.error(init, "initial must be 'equilibrium' or a mapping with Phi_n, Phi_p");
      }
      cfg.initial.equilibrium = true;
    } else if (r.is_map(init, "initial")) {
      r.check_keys(init, {"Phi_n", "Phi_p"}, "initial");
      cfg.initial.equilibrium = false;
      cfg.initial.Phi1 = r.number(init, "Phi_n", 0.0, "initial");
      cfg.initial.Phi2 = r.number(init, "Phi_p", 0.0, "initial");
    }
  }

  if (const YAML::Node st = root["stepper"]) {
    if (r.is_map(st, "stepper")) {
      r.check_keys(st,
                   {"t_end", "dt", "dt_min", "dt_max", "gummel_tol", "gummel_max_iter",
                    "anderson_depth", "blowup_threshold", "max_steps"},
                   "stepper");
      auto& s = cfg.stepper;
      s.t_end = r.number(st, "t_end", s.t_end, "stepper");
      s.dt = r.number(st, "dt", s.dt, "stepper");
      s.dt_min = r.number(st, "dt_min", s.dt_min, "stepper");
      s.dt_max = r.number(st, "dt_max", s.dt_max, "stepper");
      s.gummel_tol = r.number(st, "gummel_tol", s.gummel_tol, "stepper");
      s.gummel_max_iter = r.integer(st, "gummel_max_iter", s.gummel_max_iter, "stepper");
      s.anderson_depth = r.integer(st, "anderson_depth", s.anderson_depth, "stepper");
      s.blowup_threshold = r.number(st, "blowup_threshold", s.blowup_threshold, "stepper");
      s.max_steps = r.integer(st, "max_steps", s.max_steps, "stepper");
      try {
        s.validate();
      } catch (const DomainError& e) {
        r.error(st, e.what());
      }
    }
  }

  if (const YAML::Node out = root["output"]) {
    if (r.is_map(out, "output")) {
      r.check_keys(out, {"snapshot_every"}, "output");
      cfg.output.snapshot_every = r.integer(out, "snapshot_every", 0, "output");
      if (cfg.output.snapshot_every < 0) {
        r.error(out["snapshot_every"], "output.snapshot_every must be nonnegative");
      }
    }
  }

  if (const YAML::Node seed = root["seed"]) {
    try {
      cfg.seed = seed.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      r.error(seed, "seed must be a nonnegative integer");
    }
  }
}

std::string side_name(Side s) { return std::string(to_string(s)); }

void emit_series(YAML::Emitter& e, const TimeSeries& s) {
  if (s.is_constant()) {
    e << s.values().front();
    return;
  }
  e << YAML::BeginMap;
  e << YAML::Key << "times" << YAML::Value << YAML::Flow << s.times();
  e << YAML::Key << "values" << YAML::Value << YAML::Flow << s.values();
  e << YAML::EndMap;
}

void emit_point(YAML::Emitter& e, const Point& p, int dim) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int a = 0; a < dim; ++a) e << p[a];
  e << YAML::EndSeq;
}

void emit_tensor(YAML::Emitter& e, const DiagTensor& t, int dim) {
  if (dim == 1 || t.xx == t.yy) {
    e << t.xx;
  } else {
    e << YAML::Flow << YAML::BeginSeq << t.xx << t.yy << YAML::EndSeq;
  }
}

void emit_range(YAML::Emitter& e, double from, double to) {
  if (std::isfinite(from)) e << YAML::Key << "from" << YAML::Value << from;
  if (std::isfinite(to)) e << YAML::Key << "to" << YAML::Value << to;
}

void emit_surface(YAML::Emitter& e, const SurfaceRecombination& m) {
  e << YAML::BeginMap;
  if (const auto* s = std::get_if<SurfaceSrh>(&m)) {
    e << YAML::Key << "model" << YAML::Value << "surface-srh";
    e << YAML::Key << "n_i" << YAML::Value << s->n_i;
    e << YAML::Key << "n1" << YAML::Value << s->n1;
    e << YAML::Key << "n2" << YAML::Value << s->n2;
    e << YAML::Key << "v_n" << YAML::Value << s->v1;
    e << YAML::Key << "v_p" << YAML::Value << s->v2;
  } else {
    e << YAML::Key << "model" << YAML::Value << "none";
  }
  e << YAML::EndMap;
}

void emit_bulk(YAML::Emitter& e, const BulkRecombination& model) {
  e << YAML::BeginMap;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Srh>) {
          e << YAML::Key << "model" << YAML::Value << "srh";
          e << YAML::Key << "n_i" << YAML::Value << m.n_i;
          e << YAML::Key << "n1" << YAML::Value << m.n1;
          e << YAML::Key << "n2" << YAML::Value << m.n2;
          e << YAML::Key << "tau_n" << YAML::Value << m.tau1;
          e << YAML::Key << "tau_p" << YAML::Value << m.tau2;
        } else if constexpr (std::is_same_v<T, Auger>) {
          e << YAML::Key << "model" << YAML::Value << "auger";
          e << YAML::Key << "n_i" << YAML::Value << m.n_i;
          e << YAML::Key << "c_n" << YAML::Value << m.c1;
          e << YAML::Key << "c_p" << YAML::Value << m.c2;
        } else if constexpr (std::is_same_v<T, MassAction>) {
          e << YAML::Key << "model" << YAML::Value << "mass-action";
          e << YAML::Key << "rate" << YAML::Value << m.rate;
          e << YAML::Key << "g" << YAML::Value << m.g;
        } else {
          e << YAML::Key << "model" << YAML::Value << "avalanche";
          e << YAML::Key << "a_n" << YAML::Value << m.a_n;
          e << YAML::Key << "a_p" << YAML::Value << m.a_p;
          e << YAML::Key << "c_n" << YAML::Value << m.c_n;
          e << YAML::Key << "c_p" << YAML::Value << m.c_p;
        }
      },
      model);
  e << YAML::EndMap;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error("invalid configuration:\n" + join(errors)), errors_(std::move(errors)) {}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

SimulationConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError({"line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg});
  }
  Reader r;
  SimulationConfig cfg;
  if (!root.IsMap()) throw ConfigError({"the deck must be a mapping"});
  r.check_keys(root,
               {"device", "statistics", "flux_scheme", "recombination", "initial", "stepper",
                "output", "seed"},
               "the deck");
  if (root["device"]) {
    parse_device(r, root["device"], cfg);
  } else {
    r.error(root, "missing section 'device'");
  }
  parse_models(r, root, cfg);
  parse_run(r, root, cfg);

  if (r.errors.empty()) {
    const auto report = validate_device(cfg.device);
    for (const auto& v : report.violations) r.errors.push_back("device: " + v);
  }
  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return cfg;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read deck '" + path.string() + "'"});
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string dump_config(const SimulationConfig& cfg) {
  const DeviceSpec& d = cfg.device;
  const int dim = d.dimension;
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;

  e << YAML::Key << "device" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dimension" << YAML::Value << dim;
  e << YAML::Key << "extent" << YAML::Value;
  emit_point(e, d.extent, dim);
  e << YAML::Key << "resolution" << YAML::Value << YAML::Flow << YAML::BeginSeq
    << cfg.resolution.nx;
  if (dim == 2) e << cfg.resolution.ny;
  e << YAML::EndSeq;

  e << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : d.layers) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << l.name;
    e << YAML::Key << "lo" << YAML::Value;
    emit_point(e, l.bounds.lo, dim);
    e << YAML::Key << "hi" << YAML::Value;
    emit_point(e, l.bounds.hi, dim);
    e << YAML::Key << "permittivity" << YAML::Value;
    emit_tensor(e, l.eps, dim);
    e << YAML::Key << "mobility_n" << YAML::Value;
    emit_tensor(e, l.mu1, dim);
    e << YAML::Key << "mobility_p" << YAML::Value;
    emit_tensor(e, l.mu2, dim);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "doping" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : d.doping.bulk) {
    e << YAML::BeginMap;
    e << YAML::Key << "lo" << YAML::Value;
    emit_point(e, b.box.lo, dim);
    e << YAML::Key << "hi" << YAML::Value;
    emit_point(e, b.box.hi, dim);
    e << YAML::Key << "value" << YAML::Value << b.value;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "sheets" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : d.doping.sheets) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << s.name;
    e << YAML::Key << "axis" << YAML::Value << (s.axis == 0 ? "x" : "y");
    e << YAML::Key << "position" << YAML::Value << s.position;
    emit_range(e, s.from, s.to);
    e << YAML::Key << "density" << YAML::Value << s.density;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "contacts" << YAML::Value << YAML::BeginMap;
  for (const auto& c : d.boundary.contacts) {
    e << YAML::Key << c.name << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "side" << YAML::Value << side_name(c.segment.side);
    emit_range(e, c.segment.from, c.segment.to);
    e << YAML::Key << "ohmic" << YAML::Value << c.ohmic;
    if (c.ohmic) {
      e << YAML::Key << "bias" << YAML::Value;
      emit_series(e, c.bias);
    } else {
      e << YAML::Key << "phi" << YAML::Value;
      emit_series(e, c.phi);
      e << YAML::Key << "Phi_n" << YAML::Value;
      emit_series(e, c.Phi1);
      e << YAML::Key << "Phi_p" << YAML::Value;
      emit_series(e, c.Phi2);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "robin" << YAML::Value << YAML::BeginMap;
  for (const auto& s : d.boundary.robin) {
    e << YAML::Key << s.name << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "side" << YAML::Value << side_name(s.segment.side);
    emit_range(e, s.segment.from, s.segment.to);
    e << YAML::Key << "capacity" << YAML::Value << s.capacity;
    e << YAML::Key << "load" << YAML::Value;
    emit_series(e, s.load);
    e << YAML::Key << "recombination" << YAML::Value;
    emit_surface(e, s.recombination);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "neumann_recombination" << YAML::Value;
  emit_surface(e, d.boundary.neumann_recombination);

  e << YAML::Key << "interfaces" << YAML::Value << YAML::BeginSeq;
  for (const auto& itf : d.interfaces) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << itf.name;
    e << YAML::Key << "axis" << YAML::Value << (itf.axis == 0 ? "x" : "y");
    e << YAML::Key << "position" << YAML::Value << itf.position;
    emit_range(e, itf.from, itf.to);
    e << YAML::Key << "recombination" << YAML::Value;
    emit_surface(e, itf.recombination);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "ellipticity" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "low" << YAML::Value << d.bounds.low;
  e << YAML::Key << "high" << YAML::Value << d.bounds.high;
  e << YAML::EndMap;
  e << YAML::EndMap;  // device

  const auto& m = cfg.models;
  e << YAML::Key << "statistics" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "electrons" << YAML::Value << std::string(to_string(m.f1.kind()));
  e << YAML::Key << "holes" << YAML::Value << std::string(to_string(m.f2.kind()));
  e << YAML::Key << "quadrature_tol" << YAML::Value << m.f1.quadrature().rel_tol;
  e << YAML::Key << "quadrature_depth" << YAML::Value << m.f1.quadrature().max_depth;
  e << YAML::Key << "invert_tol" << YAML::Value << m.f1.invert_rtol();
  e << YAML::EndMap;

  e << YAML::Key << "flux_scheme" << YAML::Value;
  switch (m.scheme) {
    case FluxScheme::Kind::ScharfetterGummel: e << "scharfetter-gummel"; break;
    case FluxScheme::Kind::ScharfetterGummelEnhanced: e << "enhanced"; break;
    case FluxScheme::Kind::CentralDiffusion: e << "central"; break;
  }

  e << YAML::Key << "recombination" << YAML::Value << YAML::BeginSeq;
  for (const auto& model : m.bulk) emit_bulk(e, model);
  e << YAML::EndSeq;

  e << YAML::Key << "initial" << YAML::Value;
  if (cfg.initial.equilibrium) {
    e << "equilibrium";
  } else {
    e << YAML::BeginMap;
    e << YAML::Key << "Phi_n" << YAML::Value << cfg.initial.Phi1;
    e << YAML::Key << "Phi_p" << YAML::Value << cfg.initial.Phi2;
    e << YAML::EndMap;
  }

  const auto& s = cfg.stepper;
  e << YAML::Key << "stepper" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "t_end" << YAML::Value << s.t_end;
  e << YAML::Key << "dt" << YAML::Value << s.dt;
  e << YAML::Key << "dt_min" << YAML::Value << s.dt_min;
  e << YAML::Key << "dt_max" << YAML::Value << s.dt_max;
  e << YAML::Key << "gummel_tol" << YAML::Value << s.gummel_tol;
  e << YAML::Key << "gummel_max_iter" << YAML::Value << s.gummel_max_iter;
  e << YAML::Key << "anderson_depth" << YAML::Value << s.anderson_depth;
  e << YAML::Key << "blowup_threshold" << YAML::Value << s.blowup_threshold;
  e << YAML::Key << "max_steps" << YAML::Value << s.max_steps;
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "snapshot_every" << YAML::Value << cfg.output.snapshot_every;
  e << YAML::EndMap;

  e << YAML::Key << "seed" << YAML::Value << cfg.seed;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string set_config_value(std::string_view text, std::string_view path, double value) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError({"line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg});
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    parts.emplace_back(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (parts.empty() || parts.front().empty()) throw ConfigError({"empty parameter path"});

  // Node::operator= would overwrite the referenced content; reset() rebinds.
  YAML::Node node;
  node.reset(root);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node child;
    if (node.IsSequence()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[i]);
      } catch (const std::exception&) {
        throw ConfigError({"parameter path '" + std::string(path) + "': '" + parts[i] +
                           "' is not a list index"});
      }
      if (idx >= node.size()) {
        throw ConfigError({"parameter path '" + std::string(path) + "': index " + parts[i] +
                           " out of range"});
      }
      child = node[idx];
    } else if (node.IsMap() && node[parts[i]]) {
      child = node[parts[i]];
    } else {
      throw ConfigError({"parameter path '" + std::string(path) + "' does not resolve at '" +
                         parts[i] + "'"});
    }
    node.reset(child);
  }
  const std::string& leaf = parts.back();
  std::ostringstream os;
  os.precision(17);
  os << value;
  if (node.IsSequence()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(leaf);
    } catch (const std::exception&) {
      throw ConfigError({"parameter path '" + std::string(path) + "': bad index '" + leaf + "'"});
    }
    if (idx >= node.size()) throw ConfigError({"parameter path '" + std::string(path) + "': index out of range"});
    node[idx] = os.str();
  } else if (node.IsMap()) {
    if (node[leaf] && !node[leaf].IsScalar()) {
      throw ConfigError({"parameter path '" + std::string(path) + "' is not a scalar"});
    }
    node[leaf] = os.str();
  } else {
    throw ConfigError({"parameter path '" + std::string(path) + "' does not resolve"});
  }
  YAML::Emitter e;
  e << root;
  return std::string(e.c_str()) + "\n";
}

Simulation make_simulation(const SimulationConfig& config) {
  return Simulation(config.device, config.resolution, config.models);
}

CarrierState initial_state(const Simulation& sim, const SimulationConfig& config) {
  if (config.initial.equilibrium) return equilibrium_initial_state(sim);
  const int n = sim.mesh().cell_count();
  return state_from_quasi_fermi(sim, 0.0, Vector::Constant(n, config.initial.Phi1),
                                Vector::Constant(n, config.initial.Phi2));
}

}  // namespace ddsim
