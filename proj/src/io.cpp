#include "aifdom/io.hpp"

#include "aifdom/errors.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace aifdom {

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw DomainError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json to_json(const Interval& iv) { return Json::array({iv.lo, iv.hi}); }

Interval interval_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw DomainError("interval must be [lo, hi]");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (iv.empty()) throw DomainError("interval has lo > hi");
  return iv;
}

Json to_json(const Region& r) {
  Json j;
  j["coords"] = Json::array({r.coords[0], r.coords[1]});
  Json poly = Json::array();
  for (const auto& v : r.z_polytope) poly.push_back(Json::array({v.x(), v.y()}));
  j["z_polytope"] = poly;
  Json box = Json::object();
  for (const auto& [idx, iv] : r.x_box) box[std::to_string(idx)] = to_json(iv);
  j["x_box"] = box;
  Json params = Json::object();
  if (r.params.eta) params["eta"] = to_json(*r.params.eta);
  if (r.params.actuation_slope) params["actuation_slope"] = to_json(*r.params.actuation_slope);
  j["params"] = params;
  return j;
}

Region region_from_json(const Json& j) {
  Region r;
  if (j.contains("coords")) {
    r.coords = {j.at("coords").at(0).get<int>(), j.at("coords").at(1).get<int>()};
  }
  for (const auto& v : j.at("z_polytope")) {
    r.z_polytope.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  }
  if (j.contains("x_box")) {
    for (const auto& [key, iv] : j.at("x_box").items()) r.x_box[std::stoi(key)] = interval_from_json(iv);
  }
  if (j.contains("params")) {
    const Json& p = j.at("params");
    if (p.contains("eta")) r.params.eta = interval_from_json(p.at("eta"));
    if (p.contains("actuation_slope")) {
      r.params.actuation_slope = interval_from_json(p.at("actuation_slope"));
    }
  }
  return r;
}

Json to_json(const DominanceCertificate& c) {
  Json j;
  j["p"] = c.p_degree;
  j["lambda"] = c.lambda;
  j["epsilon"] = c.epsilon;
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < c.p.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < c.p.cols(); ++k) row.push_back(c.p(i, k));
    rows.push_back(row);
  }
  j["P"] = rows;
  j["region"] = c.region.z_polytope.empty() ? Json(nullptr) : to_json(c.region);
  j["residual_margin"] = c.residual_margin;
  j["checked_points"] = c.checked_points;
  return j;
}

DominanceCertificate certificate_from_json(const Json& j) {
  DominanceCertificate c;
  c.p_degree = j.at("p").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.epsilon = j.value("epsilon", 0.0);
  const Json& rows = j.at("P");
  const auto n = static_cast<Eigen::Index>(rows.size());
  c.p = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw DomainError("P must be square");
    for (Eigen::Index k = 0; k < n; ++k) c.p(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  if (j.contains("region") && !j.at("region").is_null()) c.region = region_from_json(j.at("region"));
  c.residual_margin = j.value("residual_margin", 0.0);
  c.checked_points = j.value("checked_points", 0);
  return c;
}

namespace {

const char* failure_name(VerificationFailure f) {
  switch (f) {
    case VerificationFailure::none: return "none";
    case VerificationFailure::inertia_mismatch: return "inertia_mismatch";
    case VerificationFailure::lmi_violation: return "lmi_violation";
  }
  return "unknown";
}

Json params_json(const ParamPoint& p) {
  Json j = Json::object();
  if (p.eta) j["eta"] = *p.eta;
  if (p.actuation_slope) j["actuation_slope"] = *p.actuation_slope;
  return j;
}

Json complex_list(const ComplexVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(Json::array({v[i].real(), v[i].imag()}));
  return a;
}

}  // namespace

Json to_json(const VerificationReport& r) {
  Json j;
  j["passed"] = r.passed;
  j["failure"] = failure_name(r.failure);
  j["inertia"] = Json::array({r.inertia.n_neg, r.inertia.n_zero, r.inertia.n_pos});
  j["p"] = r.p_degree;
  j["lambda"] = r.lambda;
  j["residual_margin"] = r.residual_margin;
  j["epsilon"] = r.epsilon;
  j["checked_vertices"] = r.checked_vertices;
  j["checked_points"] = r.checked_points;
  if (r.witness) {
    j["witness"] = {{"xi", to_json(r.witness->xi)},
                    {"params", params_json(r.witness->params)},
                    {"max_eigenvalue", r.witness->max_eigenvalue},
                    {"is_vertex", r.witness->is_vertex}};
  } else {
    j["witness"] = nullptr;
  }
  j["region"] = to_json(r.region);
  return j;
}

Json to_json(const AttractorReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["location"] = r.location.size() > 0 ? to_json(r.location) : Json(nullptr);
  j["period"] = r.period;
  j["n_returns"] = r.diagnostics.n_returns;
  j["diagnostics"] = {{"tail_variation", r.diagnostics.tail_variation},
                      {"tail_speed", r.diagnostics.tail_speed},
                      {"period_dispersion", r.diagnostics.period_dispersion},
                      {"closure_residual", r.diagnostics.closure_residual},
                      {"window_samples", r.diagnostics.window_samples}};
  return j;
}

Json to_json(const Classification& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  j["fixed_point"] = c.fixed_point ? to_json(*c.fixed_point) : Json(nullptr);
  j["equilibria_in_region"] = c.equilibria_in_region;
  j["statement"] = c.statement;
  return j;
}

Json locus_sidecar(const FrequencyLocus& l) {
  Json j;
  j["xi"] = to_json(l.xi);
  j["lambda"] = l.lambda;
  j["loop_gain"] = l.loop_gain;
  j["critical_point"] = Json::array({l.critical_point.real(), l.critical_point.imag()});
  j["omega_max"] = l.omega_max;
  j["n_samples"] = l.omega.size();
  j["q"] = l.q;
  j["marginal_poles"] = l.marginal_poles;
  j["encirclements"] = l.encirclements;
  j["degenerate_numerator"] = l.degenerate_numerator;
  j["open_loop_poles"] = complex_list(l.open_loop_poles);
  return j;
}

void write_locus_csv(std::ostream& os, const FrequencyLocus& l) {
  os << "omega,re,im\n" << std::setprecision(17);
  for (std::size_t i = 0; i < l.omega.size(); ++i) {
    os << l.omega[i] << ',' << l.values[i].real() << ',' << l.values[i].imag() << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumSample>& samples) {
  const Eigen::Index n = samples.empty() ? 0 : samples.front().eigenvalues.size();
  os << "which_vertex";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",re_" << i << ",im_" << i;
  os << '\n' << std::setprecision(17);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    os << s;
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',' << samples[s].eigenvalues[i].real() << ',' << samples[s].eigenvalues[i].imag();
    }
    os << '\n';
  }
}

void write_root_locus_csv(std::ostream& os, const RootLocus& rl) {
  os << "gain,trace,re,im\n" << std::setprecision(17);
  for (std::size_t g = 0; g < rl.gains.size(); ++g) {
    for (Eigen::Index i = 0; i < rl.poles[g].size(); ++i) {
      os << rl.gains[g] << ',' << i << ',' << rl.poles[g][i].real() << ',' << rl.poles[g][i].imag()
         << '\n';
    }
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw DomainError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace aifdom
