#include "aifdom/circuit_models.hpp"
#include "aifdom/config.hpp"
#include "aifdom/dominance.hpp"
#include "aifdom/errors.hpp"
#include "aifdom/io.hpp"
#include "aifdom/ode_sim.hpp"
#include "aifdom/regions.hpp"
#include "aifdom/spectral.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#ifndef AIFDOM_VERSION
#define AIFDOM_VERSION "0.0.0"
#endif

using namespace aifdom;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kInfeasible = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string certificate;
  std::uint64_t seed = 0;
  std::string format = "csv";
};

struct Context {
  std::string command;
  Options opts;
  ExperimentConfig cfg;
  SystemModel model;
  std::filesystem::path out_dir;
  std::optional<Trajectory> traj;
};

// Raised after all outputs were written, to report a nonzero status.
struct ExitStatus {
  int code;
  std::string message;
};

Json meta(const Context& ctx) {
  Json j;
  j["tool"] = "aifdom";
  j["tool_version"] = AIFDOM_VERSION;
  j["command"] = ctx.command;
  j["config_hash"] = ctx.cfg.hash;
  j["config_name"] = ctx.cfg.name;
  j["seed"] = ctx.opts.seed;
  return j;
}

void write_json(const Context& ctx, const std::string& name, Json body) {
  Json doc = meta(ctx);
  for (auto& [k, v] : body.items()) doc[k] = std::move(v);
  write_file_atomic((ctx.out_dir / name).string(), doc.dump(2) + "\n");
}

void write_text(const Context& ctx, const std::string& name, const std::string& text) {
  write_file_atomic((ctx.out_dir / name).string(), text);
}

bool csv(const Context& ctx) { return ctx.opts.format == "csv"; }

std::string indexed(const std::string& stem, std::size_t i, const char* ext) {
  std::ostringstream os;
  os << stem << '_' << std::setw(3) << std::setfill('0') << i << ext;
  return os.str();
}

const Trajectory& trajectory(Context& ctx) {
  if (!ctx.traj) {
    if (!ctx.cfg.simulate) throw ConfigError("this command needs a 'simulate' block");
    const SimulateConfig& s = *ctx.cfg.simulate;
    ctx.traj = integrate(ctx.model, s.x0, s.t_end, s.settings);
  }
  return *ctx.traj;
}

ProxyRegionSpec proxy_spec(const Context& ctx) {
  ProxyRegionSpec spec = ctx.cfg.region->spec;
  spec.params = ctx.cfg.model.uncertainty;
  return spec;
}

Region configured_region(Context& ctx) {
  if (!ctx.cfg.region) throw ConfigError("this command needs a 'region' block");
  const RegionConfig& rc = *ctx.cfg.region;
  Region r;
  if (rc.hull_of_simulation) {
    r = build_proxy_region(trajectory(ctx), proxy_spec(ctx), rc.halvings);
  } else {
    r = rc.region;
    r.params = ctx.cfg.model.uncertainty;
  }
  r.validate();
  return resolve_params(r, ctx.model);
}

struct Sample {
  Vector xi;
  ParamPoint params;
  bool is_vertex = true;
};

// Region vertices followed by interior grid points.
std::vector<Sample> region_samples(Context& ctx, const Region& r, bool with_grid) {
  std::vector<Sample> out;
  for (const auto& v : vertices(r, ctx.model)) out.push_back({v.xi, v.params, true});
  if (!with_grid) return out;
  Vector base = Vector::Zero(ctx.model.dim);
  for (const auto& [idx, iv] : r.x_box) base[idx] = iv.mid();
  for (const auto& z : interior_grid(r, ctx.cfg.analysis.grid_density)) {
    Vector xi = base;
    xi[r.coords[0]] = z.x();
    xi[r.coords[1]] = z.y();
    out.push_back({xi, {}, false});
  }
  return out;
}

// Controller states for frequency-domain commands.
std::vector<Sample> frequency_points(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  std::vector<Sample> out;
  if (!a.z_points.empty()) {
    for (const auto& z : a.z_points) {
      Vector xi = Vector::Zero(ctx.model.dim);
      xi[0] = z.x();
      xi[1] = z.y();
      out.push_back({xi, {}, false});
    }
    return out;
  }
  for (auto& s : region_samples(ctx, configured_region(ctx), false)) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Sample& o) {
      return o.xi == s.xi && o.params.eta == s.params.eta &&
             o.params.actuation_slope == s.params.actuation_slope;
    });
    if (!dup) out.push_back(std::move(s));
  }
  return out;
}

Json params_json(const ParamPoint& p) {
  Json j = Json::object();
  if (p.eta) j["eta"] = *p.eta;
  if (p.actuation_slope) j["actuation_slope"] = *p.actuation_slope;
  return j;
}

int cmd_simulate(Context& ctx) {
  const Trajectory& t = trajectory(ctx);
  const AttractorReport rep = classify_trajectory(t, ctx.cfg.simulate->classify);
  Json body;
  body["attractor"] = to_json(rep);
  Json eq = Json::array();
  for (const auto& e : candidate_equilibria(ctx.cfg.model, ctx.model, &t)) {
    eq.push_back({{"point", to_json(e.point)},
                  {"n_right", e.spectrum.n_right},
                  {"n_left", e.spectrum.n_left}});
  }
  body["equilibria"] = eq;
  body["final_state"] = to_json(t.states.back());
  body["n_samples"] = t.size();
  if (csv(ctx)) {
    std::ostringstream os;
    write_trajectory_csv(os, t);
    write_text(ctx, "trajectory.csv", os.str());
  } else {
    Json rows = Json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
      Json row = Json::array({t.times[i]});
      for (Eigen::Index k = 0; k < t.states[i].size(); ++k) row.push_back(t.states[i][k]);
      rows.push_back(row);
    }
    body["trajectory"] = rows;
  }
  write_json(ctx, "attractor.json", body);
  return kOk;
}

int cmd_spectrum(Context& ctx) {
  const double lambda = ctx.cfg.analysis.lambda;
  const Region r = configured_region(ctx);
  std::vector<SpectrumSample> ok;
  Json points = Json::array();
  std::map<std::string, int> split_counts;
  int on_axis = 0;
  for (const auto& s : region_samples(ctx, r, true)) {
    Json p;
    p["xi"] = to_json(s.xi);
    p["params"] = params_json(s.params);
    p["is_vertex"] = s.is_vertex;
    try {
      const SpectrumSample sp = spectrum(ctx.model, s.xi, lambda, s.params);
      p["n_right"] = sp.n_right;
      p["n_left"] = sp.n_left;
      p["row"] = ok.size();
      split_counts[std::to_string(sp.n_right) + "," + std::to_string(sp.n_left)] += 1;
      Json ev = Json::array();
      for (Eigen::Index i = 0; i < sp.eigenvalues.size(); ++i) {
        ev.push_back(Json::array({sp.eigenvalues[i].real(), sp.eigenvalues[i].imag()}));
      }
      if (!csv(ctx)) p["eigenvalues"] = ev;
      ok.push_back(sp);
    } catch (const BoundarySplitError& e) {
      ++on_axis;
      p["error"] = e.what();
    }
    points.push_back(p);
  }
  Json body;
  body["lambda"] = lambda;
  body["region"] = to_json(r);
  body["split_counts"] = split_counts;
  body["on_axis"] = on_axis;
  body["uniform_split"] = split_counts.size() == 1 && on_axis == 0;
  body["samples"] = points;
  if (csv(ctx)) {
    std::ostringstream os;
    write_spectrum_csv(os, ok);
    write_text(ctx, "spectrum.csv", os.str());
  }
  write_json(ctx, "spectrum.json", body);
  return kOk;
}

int cmd_nyquist(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  NyquistOptions opts;
  opts.omega_max = a.omega_max;
  opts.n_samples = a.n_samples;
  Json loci = Json::array();
  int failures = 0;
  std::size_t i = 0;
  for (const auto& s : frequency_points(ctx)) {
    Json entry;
    entry["xi"] = to_json(s.xi);
    entry["params"] = params_json(s.params);
    try {
      const FrequencyLocus l = nyquist_locus(ctx.model, s.xi, a.lambda, a.loop_gain, opts, s.params);
      Json side = locus_sidecar(l);
      if (csv(ctx)) {
        std::ostringstream os;
        write_locus_csv(os, l);
        write_text(ctx, indexed("nyquist", i, ".csv"), os.str());
        write_json(ctx, indexed("nyquist", i, ".json"), side);
        entry["file"] = indexed("nyquist", i, ".csv");
      } else {
        Json values = Json::array();
        for (std::size_t k = 0; k < l.omega.size(); ++k) {
          values.push_back(Json::array({l.omega[k], l.values[k].real(), l.values[k].imag()}));
        }
        entry["values"] = values;
      }
      entry["encirclements"] = l.encirclements;
      entry["q"] = l.q;
      entry["marginal_poles"] = l.marginal_poles;
      entry["degenerate_numerator"] = l.degenerate_numerator;
    } catch (const ContourError& e) {
      ++failures;
      entry["error"] = e.what();
    }
    loci.push_back(entry);
    ++i;
  }
  Json body;
  body["lambda"] = a.lambda;
  body["loop_gain"] = a.loop_gain;
  body["critical_point"] = Json::array({-1.0 / a.loop_gain, 0.0});
  body["loci"] = loci;
  body["failures"] = failures;
  write_json(ctx, "nyquist.json", body);
  if (failures > 0) throw ExitStatus{kNumerical, std::to_string(failures) + " loci failed"};
  return kOk;
}

int cmd_rootlocus(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  std::vector<double> gains = a.gains;
  if (gains.empty()) {
    for (int k = 0; k <= 120; ++k) gains.push_back(std::pow(10.0, -3.0 + 6.0 * k / 120.0));
  }
  Json traces = Json::array();
  std::size_t i = 0;
  for (const auto& s : frequency_points(ctx)) {
    const RootLocus rl = root_locus(frozen_loop(ctx.model, s.xi, s.params), gains, a.lambda);
    Json entry;
    entry["xi"] = to_json(s.xi);
    entry["params"] = params_json(s.params);
    Json splits = Json::array();
    for (const auto& sp : rl.split) splits.push_back(Json::array({sp[0], sp[1], sp[2]}));
    entry["split"] = splits;
    if (csv(ctx)) {
      std::ostringstream os;
      write_root_locus_csv(os, rl);
      write_text(ctx, indexed("rootlocus", i, ".csv"), os.str());
      entry["file"] = indexed("rootlocus", i, ".csv");
    } else {
      Json poles = Json::array();
      for (const auto& pg : rl.poles) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < pg.size(); ++k) row.push_back(Json::array({pg[k].real(), pg[k].imag()}));
        poles.push_back(row);
      }
      entry["poles"] = poles;
    }
    traces.push_back(entry);
    ++i;
  }
  Json body;
  body["lambda"] = a.lambda;
  body["gains"] = gains;
  body["points"] = traces;
  write_json(ctx, "rootlocus.json", body);
  return kOk;
}

Json witness_json(const std::optional<LmiWitness>& w) {
  if (!w) return nullptr;
  return {{"xi", to_json(w->xi)},
          {"params", params_json(w->params)},
          {"max_eigenvalue", w->max_eigenvalue},
          {"is_vertex", w->is_vertex}};
}

int cmd_certify(Context& ctx, bool robust) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  if (!ctx.cfg.region) throw ConfigError("this command needs a 'region' block");
  SolveOptions so;
  so.epsilon = a.epsilon;
  so.sample_density = a.grid_density;

  std::optional<DominanceCertificate> cert;
  Json proxy = nullptr;
  std::string failure;
  std::optional<LmiWitness> witness;
  Region region;
  try {
    if (ctx.cfg.region->hull_of_simulation) {
      const ProxyOutcome out = certify_on_proxy(ctx.model, trajectory(ctx), proxy_spec(ctx), a.lambda,
                                                robust, so);
      proxy = {{"halvings", out.halvings}, {"margin", out.margin}};
      region = out.region;
      cert = out.certificate;
      failure = out.failure;
    } else {
      region = configured_region(ctx);
      cert = robust ? solve_robust_dominance(ctx.model, region, a.lambda, so)
                    : solve_dominance_lmi(ctx.model, region, a.lambda, so);
    }
  } catch (const InfeasibleError& e) {
    failure = e.what();
    witness = e.witness;
  } catch (const DegenerateCertificateError& e) {
    failure = e.what();
  }

  if (!cert) {
    Json body;
    body["status"] = "infeasible";
    body["lambda"] = a.lambda;
    body["reason"] = failure;
    body["witness"] = witness_json(witness);
    body["proxy"] = proxy;
    body["region"] = to_json(region);
    write_json(ctx, "certificate_failure.json", body);
    throw ExitStatus{kInfeasible, failure};
  }

  Json body = to_json(*cert);
  body["robust"] = robust;
  body["proxy"] = proxy;
  const VerificationReport rep = verify_certificate(ctx.model, cert->region, cert->p, cert->lambda,
                                                    cert->p_degree, a.grid_density);
  body["verification"] = to_json(rep);
  if (cert->p_degree <= 2) {
    const Trajectory* t = ctx.cfg.simulate ? &trajectory(ctx) : nullptr;
    body["classification"] = to_json(classify(*cert, candidate_equilibria(ctx.cfg.model, ctx.model, t)));
  }
  write_json(ctx, "certificate.json", body);
  if (a.p && *a.p != cert->p_degree) {
    throw ExitStatus{kInfeasible, "certified p = " + std::to_string(cert->p_degree) +
                                      ", requested p = " + std::to_string(*a.p)};
  }
  if (!rep.passed) throw ExitStatus{kInfeasible, "certificate failed re-verification"};
  return kOk;
}

int cmd_verify(Context& ctx) {
  if (ctx.opts.certificate.empty()) throw ConfigError("verify needs --certificate");
  DominanceCertificate cert;
  try {
    cert = certificate_from_json(read_json_file(ctx.opts.certificate));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("certificate file: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("certificate file: ") + e.what());
  }
  const int density = ctx.cfg.analysis.grid_density;
  VerificationReport rep;
  Json proxy = nullptr;
  if (ctx.cfg.region && ctx.cfg.region->hull_of_simulation) {
    const ProxyOutcome out = verify_on_proxy(ctx.model, trajectory(ctx), proxy_spec(ctx), cert.p,
                                             cert.lambda, cert.p_degree, density);
    proxy = {{"halvings", out.halvings}, {"margin", out.margin}};
    rep = *out.verification;
  } else {
    Region r = ctx.cfg.region ? configured_region(ctx) : cert.region;
    if (r.z_polytope.empty()) throw ConfigError("no region in the config or the certificate");
    rep = verify_certificate(ctx.model, r, cert.p, cert.lambda, cert.p_degree, density);
  }
  Json body = to_json(rep);
  body["certificate_file"] = std::filesystem::path(ctx.opts.certificate).filename().string();
  body["proxy"] = proxy;
  write_json(ctx, "verification.json", body);
  if (!rep.passed) throw ExitStatus{kInfeasible, "verification failed"};
  return kOk;
}

int run(const std::string& command, const Options& opts) {
  Context ctx;
  ctx.command = command;
  ctx.opts = opts;
  ctx.cfg = load_config(opts.config);
  ctx.model = build_model(ctx.cfg.model);
  ctx.out_dir = opts.out.empty() ? std::filesystem::path(ctx.cfg.output_dir) : std::filesystem::path(opts.out);
  try {
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "spectrum") return cmd_spectrum(ctx);
    if (command == "nyquist") return cmd_nyquist(ctx);
    if (command == "rootlocus") return cmd_rootlocus(ctx);
    if (command == "certify") return cmd_certify(ctx, false);
    if (command == "robust-certify") return cmd_certify(ctx, true);
    if (command == "verify") return cmd_verify(ctx);
  } catch (const IntegratorFault& e) {
    Json body;
    body["status"] = "numerical_fault";
    body["error"] = e.what();
    write_json(ctx, "error.json", body);
    throw;
  }
  throw ConfigError("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dominance analysis of antithetic integral feedback circuits"};
  app.set_version_flag("--version", std::string(AIFDOM_VERSION));
  app.require_subcommand(1);
  Options opts;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "integrate the closed loop and classify its attractor"},
      {"spectrum", "closed-loop eigenvalue split over the region"},
      {"nyquist", "frozen-loop Nyquist loci and encirclement counts"},
      {"rootlocus", "frozen-loop root-locus traces over the gain grid"},
      {"certify", "solve the dominance LMI on the region"},
      {"verify", "check a stored certificate on the region"},
      {"robust-certify", "solve the dominance LMI over the parameter box"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", opts.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", opts.seed, "seed recorded in the outputs");
    sub->add_option("--format", opts.format, "tabular output format")
        ->check(CLI::IsMember({"csv", "json"}));
    if (std::string(name) == "verify") {
      sub->add_option("--certificate", opts.certificate, "certificate JSON to check")->required();
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return run(command, opts);
  } catch (const ExitStatus& s) {
    std::cerr << "aifdom " << command << ": " << s.message << "\n";
    return s.code;
  } catch (const ConfigError& e) {
    std::cerr << "aifdom " << command << ": config error: " << e.what() << "\n";
    return kUsage;
  } catch (const RegionError& e) {
    std::cerr << "aifdom " << command << ": region error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "aifdom " << command << ": " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "aifdom " << command << ": " << e.what() << "\n";
    return kInfeasible;
  } catch (const DegenerateCertificateError& e) {
    std::cerr << "aifdom " << command << ": " << e.what() << "\n";
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << "aifdom " << command << ": numerical fault: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "aifdom " << command << ": " << e.what() << "\n";
    return kUsage;
  }
}
