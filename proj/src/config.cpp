#include "aifdom/config.hpp"

#include "aifdom/errors.hpp"
#include "aifdom/io.hpp"
#include "aifdom/spectral.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>

namespace aifdom {

namespace {

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown key '" + path + "." + key + "'");
  }
}

double num(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError("missing key '" + path + "." + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("'" + path + "." + key + "' must be a number");
  return v.get<double>();
}

double num_or(const Json& j, const std::string& path, const char* key, double fallback) {
  return j.contains(key) ? num(j, path, key) : fallback;
}

int int_or(const Json& j, const std::string& path, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + path + "." + key + "' must be an integer");
  return v.get<int>();
}

Interval interval(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError("'" + path + "' must be [lo, hi]");
  }
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (iv.empty()) throw ConfigError("'" + path + "' has lo > hi");
  return iv;
}

template <class F>
void validated(const std::string& path, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ModelConfig parse_model(const Json& j) {
  check_keys(j, "model", {"kind", "controller", "plant", "hill", "uncertainty"});
  ModelConfig m;
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("missing key 'model.kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fop") {
    m.kind = ModelKind::fop;
  } else if (kind == "all_seq") {
    m.kind = ModelKind::all_seq;
  } else if (kind == "bistable") {
    m.kind = ModelKind::bistable;
  } else {
    throw ConfigError("'model.kind' must be fop, all_seq or bistable");
  }

  if (m.kind != ModelKind::bistable) {
    if (!j.contains("controller")) throw ConfigError("missing key 'model.controller'");
    const Json& c = j.at("controller");
    check_keys(c, "model.controller", {"mu", "eta"});
    m.controller = {num(c, "model.controller", "mu"), num(c, "model.controller", "eta")};
    validated("model.controller", [&] { m.controller.validate(); });
  }
  if (!j.contains("plant")) throw ConfigError("missing key 'model.plant'");
  const Json& p = j.at("plant");
  const std::string pp = "model.plant";
  switch (m.kind) {
    case ModelKind::fop:
      check_keys(p, pp, {"theta1", "theta2", "k", "gamma"});
      m.fop = {num(p, pp, "theta1"), num(p, pp, "theta2"), num(p, pp, "k"), num(p, pp, "gamma")};
      validated(pp, [&] { m.fop.validate(); });
      break;
    case ModelKind::all_seq:
      check_keys(p, pp, {"phi1", "phi2", "theta1", "k", "theta2"});
      m.all_seq = {num(p, pp, "phi1"), num(p, pp, "phi2"), num(p, pp, "theta1"), num(p, pp, "k")};
      m.theta2 = num(p, pp, "theta2");
      validated(pp, [&] { m.all_seq.validate(); });
      if (!(m.theta2 > 0.0)) throw ConfigError("'model.plant.theta2' must be positive");
      break;
    case ModelKind::bistable:
      check_keys(p, pp, {"mu1", "mu2", "theta1", "eta", "gamma"});
      m.bistable = {num(p, pp, "mu1"), num(p, pp, "mu2"), num(p, pp, "theta1"), num(p, pp, "eta"),
                    num(p, pp, "gamma")};
      validated(pp, [&] { m.bistable.validate(); });
      break;
  }
  if (j.contains("hill")) {
    if (m.kind != ModelKind::fop) throw ConfigError("'model.hill' needs model.kind = fop");
    const Json& h = j.at("hill");
    check_keys(h, "model.hill", {"k1", "k2", "n"});
    HillParams hp{num(h, "model.hill", "k1"), num(h, "model.hill", "k2"), int_or(h, "model.hill", "n", 1)};
    validated("model.hill", [&] { hp.validate(); });
    m.hill = hp;
  }
  if (j.contains("uncertainty")) {
    const Json& u = j.at("uncertainty");
    check_keys(u, "model.uncertainty", {"eta", "actuation_slope"});
    if (u.contains("eta")) m.uncertainty.eta = interval(u.at("eta"), "model.uncertainty.eta");
    if (u.contains("actuation_slope")) {
      m.uncertainty.actuation_slope =
          interval(u.at("actuation_slope"), "model.uncertainty.actuation_slope");
    }
  }
  return m;
}

SimulateConfig parse_simulate(const Json& j) {
  const std::string path = "simulate";
  check_keys(j, path, {"x0", "t_end", "rel_tol", "abs_tol", "max_step", "transient_fraction",
                       "eq_tol", "cycle_tol"});
  SimulateConfig s;
  if (!j.contains("x0")) throw ConfigError("missing key 'simulate.x0'");
  try {
    s.x0 = vector_from_json(j.at("x0"));
  } catch (const std::exception&) {
    throw ConfigError("'simulate.x0' must be a numeric array");
  }
  s.t_end = num(j, path, "t_end");
  if (!(s.t_end > 0.0)) throw ConfigError("'simulate.t_end' must be positive");
  s.settings.rel_tol = num_or(j, path, "rel_tol", s.settings.rel_tol);
  s.settings.abs_tol = num_or(j, path, "abs_tol", s.settings.abs_tol);
  s.settings.max_step = num_or(j, path, "max_step", s.settings.max_step);
  s.classify.transient_fraction = num_or(j, path, "transient_fraction", s.classify.transient_fraction);
  s.classify.eq_tol = num_or(j, path, "eq_tol", s.classify.eq_tol);
  s.classify.cycle_tol = num_or(j, path, "cycle_tol", s.classify.cycle_tol);
  return s;
}

RegionConfig parse_region(const Json& j) {
  const std::string path = "region";
  check_keys(j, path, {"vertices", "coords", "x_box", "hull_of", "margin", "margin_fraction",
                       "transient_fraction", "max_halvings", "halvings", "box_coords",
                       "polygon_directions"});
  RegionConfig r;
  std::array<int, 2> coords{0, 1};
  if (j.contains("coords")) {
    const Json& c = j.at("coords");
    if (!c.is_array() || c.size() != 2) throw ConfigError("'region.coords' must be a pair");
    coords = {c[0].get<int>(), c[1].get<int>()};
  }
  const bool has_vertices = j.contains("vertices");
  const bool has_hull = j.contains("hull_of");
  if (has_vertices == has_hull) {
    throw ConfigError("'region' needs exactly one of 'vertices' or 'hull_of'");
  }
  if (has_vertices) {
    r.region.coords = coords;
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 2) throw ConfigError("'region.vertices' entries must be pairs");
      r.region.z_polytope.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    if (r.region.z_polytope.empty()) throw ConfigError("'region.vertices' is empty");
    if (j.contains("x_box")) {
      check_keys(j.at("x_box"), "region.x_box", {"1", "2", "3", "4", "5"});
      for (const auto& [key, iv] : j.at("x_box").items()) {
        r.region.x_box[std::stoi(key) - 1] = interval(iv, "region.x_box." + key);
      }
    }
  } else {
    if (j.at("hull_of") != "simulate") throw ConfigError("'region.hull_of' must be \"simulate\"");
    r.hull_of_simulation = true;
    r.spec.coords = coords;
    if (j.contains("margin")) r.spec.margin = num(j, path, "margin");
    r.spec.margin_fraction = num_or(j, path, "margin_fraction", r.spec.margin_fraction);
    r.spec.transient_fraction = num_or(j, path, "transient_fraction", r.spec.transient_fraction);
    r.spec.max_halvings = int_or(j, path, "max_halvings", r.spec.max_halvings);
    r.spec.polygon_directions = int_or(j, path, "polygon_directions", r.spec.polygon_directions);
    r.halvings = int_or(j, path, "halvings", 0);
    if (j.contains("box_coords")) {
      // One-based state indices in the file, zero-based internally.
      for (const auto& c : j.at("box_coords")) r.spec.box_coords.push_back(c.get<int>() - 1);
    }
    if (j.contains("x_box")) throw ConfigError("'region.x_box' is only valid with 'vertices'");
  }
  return r;
}

AnalysisConfig parse_analysis(const Json& j) {
  const std::string path = "analysis";
  check_keys(j, path, {"lambda", "p", "loop_gain", "omega_max", "n_samples", "gains", "grid_density",
                       "z_points", "epsilon"});
  AnalysisConfig a;
  a.lambda = num_or(j, path, "lambda", 0.0);
  if (!(a.lambda >= 0.0)) throw ConfigError("'analysis.lambda' must be nonnegative");
  if (j.contains("p")) a.p = int_or(j, path, "p", 0);
  a.loop_gain = num_or(j, path, "loop_gain", a.loop_gain);
  a.omega_max = num_or(j, path, "omega_max", a.omega_max);
  a.n_samples = int_or(j, path, "n_samples", a.n_samples);
  a.grid_density = int_or(j, path, "grid_density", a.grid_density);
  if (j.contains("epsilon")) a.epsilon = num(j, path, "epsilon");
  if (j.contains("gains")) {
    const Json& g = j.at("gains");
    if (g.is_array()) {
      for (const auto& v : g) a.gains.push_back(v.get<double>());
    } else {
      check_keys(g, "analysis.gains", {"min", "max", "n", "log"});
      const double lo = num(g, "analysis.gains", "min");
      const double hi = num(g, "analysis.gains", "max");
      const int n = int_or(g, "analysis.gains", "n", 100);
      const bool log = g.value("log", true);
      if (!(lo > 0.0 && hi > lo && n >= 2)) throw ConfigError("'analysis.gains' range is invalid");
      for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        a.gains.push_back(log ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
      }
    }
    if (!std::is_sorted(a.gains.begin(), a.gains.end()) || a.gains.empty() || a.gains.front() <= 0.0) {
      throw ConfigError("'analysis.gains' must be increasing and positive");
    }
  }
  if (j.contains("z_points")) {
    for (const auto& z : j.at("z_points")) {
      if (!z.is_array() || z.size() != 2) throw ConfigError("'analysis.z_points' entries must be pairs");
      a.z_points.emplace_back(z[0].get<double>(), z[1].get<double>());
    }
  }
  return a;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"name", "model", "simulate", "region", "analysis", "output"});
  ExperimentConfig c;
  c.hash = sha256_hex(text);
  try {
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (!j.contains("model")) throw ConfigError("missing key 'model'");
    c.model = parse_model(j.at("model"));
    if (j.contains("simulate")) c.simulate = parse_simulate(j.at("simulate"));
    if (j.contains("region")) c.region = parse_region(j.at("region"));
    if (j.contains("analysis")) c.analysis = parse_analysis(j.at("analysis"));
    if (j.contains("output")) {
      check_keys(j.at("output"), "output", {"dir"});
      c.output_dir = j.at("output").value("dir", c.output_dir);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
  }
  if (c.region && c.region->hull_of_simulation && !c.simulate) {
    throw ConfigError("'region.hull_of' references a missing 'simulate' block");
  }
  if (c.simulate) {
    const int dim = c.model.kind == ModelKind::bistable ? 2 : 4;
    if (c.simulate->x0.size() != dim) {
      throw ConfigError("'simulate.x0' must have " + std::to_string(dim) + " entries");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

SystemModel build_model(const ModelConfig& m) {
  switch (m.kind) {
    case ModelKind::fop: return fop_closed_loop(m.controller, m.fop, m.hill);
    case ModelKind::all_seq: return all_seq_closed_loop(m.controller, m.all_seq, m.theta2);
    case ModelKind::bistable: return bistable_model(m.bistable);
  }
  throw ConfigError("unknown model kind");
}

std::vector<EquilibriumInfo> candidate_equilibria(const ModelConfig& m, const SystemModel& model,
                                                  const Trajectory* traj) {
  std::vector<Vector> guesses;
  if (m.kind == ModelKind::fop) guesses.push_back(fop_equilibrium(m.controller, m.fop));
  if (traj != nullptr && traj->size() > 0) {
    const std::size_t w0 = traj->window_start(0.5);
    Vector mean = Vector::Zero(traj->dim());
    for (std::size_t i = w0; i < traj->size(); ++i) mean += traj->states[i];
    mean /= static_cast<double>(traj->size() - w0);
    guesses.push_back(mean);
  }
  std::vector<EquilibriumInfo> out;
  for (const auto& g : guesses) {
    try {
      const Vector xe = refine_equilibrium(model, g);
      const bool seen = std::any_of(out.begin(), out.end(), [&](const EquilibriumInfo& e) {
        return (e.point - xe).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + xe.cwiseAbs().maxCoeff());
      });
      if (!seen) out.push_back({xe, spectrum(model, xe, 0.0)});
    } catch (const Error&) {
      continue;
    }
  }
  return out;
}

}  // namespace aifdom
