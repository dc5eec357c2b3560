#include "relbosons/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <unistd.h>

#include "relbosons/eigensolver.hpp"
#include "relbosons/kg_fields.hpp"
#include "relbosons/potentials.hpp"
#include "relbosons/variational.hpp"
#include "relbosons/verify.hpp"

namespace relbosons::cli {

using nlohmann::ordered_json;
using potentials::DParam;
using potentials::PotentialSpec;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

namespace {

/// Bad flag values found after parsing; reported with exit code 2.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numbers in JSON: finite values as %.9g numbers, the rest as strings.
ordered_json jnum(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return ordered_json::parse(format_number(v));
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_atomic(out_path, content);
  }
}

std::vector<DParam> parse_d_list(const std::string& text) {
  std::vector<DParam> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      out.push_back(DParam::parse(token));
    } catch (const std::invalid_argument& e) {
      throw FlagError(e.what());
    }
  }
  if (out.empty()) throw FlagError("--d needs at least one value");
  return out;
}

struct Range {
  double start, stop, step;
};

Range parse_range(const std::string& text) {
  Range r{};
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> r.start >> c1 >> r.stop >> c2 >> r.step) || c1 != ':' || c2 != ':' || !ss.eof()) {
    throw FlagError("--q expects start:stop:step, got '" + text + "'");
  }
  if (!(r.start > 0.0) || !(r.stop >= r.start) || !(r.step > 0.0)) {
    throw FlagError("--q needs 0 < start <= stop and step > 0");
  }
  return r;
}

PotentialSpec family_for(int spin, const std::string& channel, int angular) {
  if (spin != 0 && spin != 1) throw FlagError("--spin must be 0 or 1");
  const std::string ch = channel.empty() ? (spin == 0 ? "scalar" : "longitudinal") : channel;
  PotentialSpec spec;
  if (ch == "scalar") {
    spec = PotentialSpec::scalar(DParam::finite(0.0), angular);
  } else if (ch == "longitudinal") {
    spec = PotentialSpec::longitudinal(DParam::finite(0.0), angular);
  } else {
    throw FlagError("--channel must be scalar or longitudinal");
  }
  spec.spin = spin == 0 ? potentials::Spin::zero : potentials::Spin::one;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  return spec;
}

const char* kDefaultSweep = "0,0.5,1,2,inf";

// --------------------------------------------------------------- density

struct DensityFlags {
  double mass = 1.0, a = 0.5, t = 0.0, rmax = 6.0, dr = 0.01;
  std::string profile = "reference";
  double sigma = 1.0, centre = 0.0;
  std::string out, format = "csv", shells, map;
  double map_extent = 0.0, map_step = 0.05;
};

int run_density(const DensityFlags& f) {
  kg::WavepacketParams params;
  params.mass = f.mass;
  params.damping_a = f.a;
  params.time_t = f.t;
  try {
    if (f.profile == "reference") {
      params.profile = kg::SpectralProfile::reference();
    } else if (f.profile == "gaussian") {
      params.profile = kg::SpectralProfile::gaussian(f.sigma, f.centre);
    } else {
      throw FlagError("--profile must be reference or gaussian");
    }
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  std::vector<double> radii;
  try {
    radii = kg::radial_grid(f.rmax, f.dr);
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }

  const auto field = kg::scan_density(params, radii);

  ordered_json shells = ordered_json::array();
  for (const auto& s : field.negative_shells) {
    shells.push_back({{"r_min", jnum(s.r_min)}, {"r_max", jnum(s.r_max)}, {"rho_min", jnum(s.rho_min)}});
  }
  if (f.format == "json") {
    ordered_json doc;
    doc["params"] = {{"m", jnum(f.mass)},   {"a", jnum(f.a)},       {"t", jnum(f.t)},
                     {"rmax", jnum(f.rmax)}, {"dr", jnum(f.dr)},     {"profile", params.profile.describe()}};
    ordered_json samples = ordered_json::array();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      samples.push_back({{"r", jnum(radii[i])}, {"rho", jnum(field.rho[i])}, {"eps", jnum(field.eps[i])}});
    }
    doc["samples"] = samples;
    doc["negative_shells"] = shells;
    emit(f.out, doc.dump(2) + "\n");
  } else {
    std::string csv = "r,rho,eps\n";
    for (std::size_t i = 0; i < radii.size(); ++i) {
      csv += format_number(radii[i]) + "," + format_number(field.rho[i]) + "," + format_number(field.eps[i]) + "\n";
    }
    emit(f.out, csv);
  }
  if (!f.shells.empty()) write_atomic(f.shells, shells.dump(2) + "\n");
  if (!f.map.empty()) {
    const double extent = f.map_extent > 0.0 ? f.map_extent : f.rmax;
    std::string csv = "x,z,rho\n";
    for (const auto& p : kg::planar_charge_map(params, extent, f.map_step)) {
      csv += format_number(p.x) + "," + format_number(p.z) + "," + format_number(p.rho) + "\n";
    }
    write_atomic(f.map, csv);
  }

  std::cerr << "density: " << radii.size() << " radii, " << field.negative_shells.size() << " negative shell(s)\n";
  for (const auto& s : field.negative_shells) {
    std::cerr << "  rho < 0 on [" << format_number(s.r_min) << ", " << format_number(s.r_max)
              << "], min " << format_number(s.rho_min) << "\n";
  }
  if (!field.failures.empty()) {
    for (const auto& fail : field.failures) {
      std::cerr << "density: quadrature failed at r=" << format_number(fail.radius) << ": " << fail.message << "\n";
    }
    return 1;
  }
  return 0;
}

// -------------------------------------------------------------- potential

struct PotentialFlags {
  int spin = 0;
  std::string channel;
  std::string d = kDefaultSweep;
  int l = 0;
  std::string q = "0.05:5:0.01";
  std::string out, format = "csv";
};

int run_potential(const PotentialFlags& f) {
  auto family = family_for(f.spin, f.channel, f.l);
  const auto ds = parse_d_list(f.d);
  const auto range = parse_range(f.q);
  std::vector<double> qs;
  const auto count = static_cast<std::size_t>(std::floor((range.stop - range.start) / range.step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) qs.push_back(range.start + range.step * static_cast<double>(i));

  const bool many = ds.size() > 1;
  if (f.format == "json") {
    ordered_json doc;
    doc["spin"] = f.spin;
    doc["channel"] = family.channel == potentials::Channel::scalar ? "scalar" : "longitudinal";
    doc["angular_index"] = f.l;
    ordered_json curves = ordered_json::array();
    for (const auto& d : ds) {
      family.d = d;
      ordered_json w = ordered_json::array();
      for (double q : qs) w.push_back(jnum(potentials::effective_potential(q, family)));
      ordered_json qj = ordered_json::array();
      for (double q : qs) qj.push_back(jnum(q));
      curves.push_back({{"d", d.str()}, {"q", qj}, {"W", w}});
    }
    doc["curves"] = curves;
    emit(f.out, doc.dump(2) + "\n");
    return 0;
  }
  std::string csv = many ? "d,q,W\n" : "q,W\n";
  for (const auto& d : ds) {
    family.d = d;
    for (double q : qs) {
      if (many) csv += d.str() + ",";
      csv += format_number(q) + "," + format_number(potentials::effective_potential(q, family)) + "\n";
    }
  }
  emit(f.out, csv);
  return 0;
}

// ------------------------------------------------------------------ gamma

struct GammaFlags {
  int spin = 0;
  std::string channel;
  std::string d = kDefaultSweep;
  int l = 0;
  std::size_t n = 8000;
  double qmax = 12.0, qmin = 1e-4, tol = 1e-11;
  std::string out, format = "csv";
};

int run_gamma(const GammaFlags& f) {
  const auto family = family_for(f.spin, f.channel, f.l);
  const auto ds = parse_d_list(f.d);
  eigen::GammaCurveOptions opts;
  opts.grid = {f.qmin, f.qmax, f.n};
  opts.shooting_tol = f.tol;
  try {
    opts.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  const auto curve = eigen::gamma_curve(family, ds, opts);

  if (f.format == "json") {
    ordered_json doc;
    doc["spin"] = f.spin;
    doc["channel"] = family.channel == potentials::Channel::scalar ? "scalar" : "longitudinal";
    doc["angular_index"] = f.l;
    doc["grid"] = {{"q_min", jnum(f.qmin)}, {"q_max", jnum(f.qmax)}, {"n", f.n}};
    ordered_json pts = ordered_json::array();
    for (const auto& p : curve) {
      ordered_json j = {{"d", p.d.str()},
                        {"gamma", jnum(p.gamma)},
                        {"gamma_fd", jnum(p.gamma_fd)},
                        {"residual", jnum(p.residual)},
                        {"mean_q2", jnum(p.mean_q2)},
                        {"method", eigen::to_string(p.method)},
                        {"ok", p.ok}};
      if (!p.ok) j["failure"] = p.failure;
      pts.push_back(j);
    }
    doc["points"] = pts;
    emit(f.out, doc.dump(2) + "\n");
  } else {
    std::string csv = "d,gamma,residual,method\n";
    for (const auto& p : curve) {
      csv += p.d.str() + "," + format_number(p.ok ? p.gamma : std::nan("")) + "," + format_number(p.residual) + "," +
             eigen::to_string(p.method) + "\n";
    }
    emit(f.out, csv);
  }
  int status = 0;
  for (const auto& p : curve) {
    if (!p.ok) {
      std::cerr << "gamma: d=" << p.d.str() << " failed: " << p.failure << "\n";
      status = 1;
    }
  }
  return status;
}

// --------------------------------------------------------------- rayleigh

struct RayleighFlags {
  std::string case_name;
  std::string d = "0";
  std::string init = "wide";
  std::uint64_t seed = 1;
  std::size_t n = 2000;
  double qmax = 12.0, step = 0.02, extent = 8.0, tol = 1e-7;
  std::string out, samples;
};

int run_rayleigh(const RayleighFlags& f) {
  using namespace variational;
  const auto ds = parse_d_list(f.d);
  if (ds.size() != 1) throw FlagError("rayleigh takes a single --d value");
  std::optional<DispersionFunctional> functional;
  if (f.case_name == "spin0") functional = DispersionFunctional::spin0(ds[0]);
  if (f.case_name == "long") functional = DispersionFunctional::spin1_longitudinal(ds[0]);
  if (f.case_name == "trans-nonrel") functional = DispersionFunctional::transverse_nonrel();
  if (f.case_name == "trans-massless") functional = DispersionFunctional::transverse_massless();
  if (!functional) throw FlagError("--case must be spin0, long, trans-nonrel or trans-massless");
  if (f.init != "wide" && f.init != "narrow" && f.init != "random") throw FlagError("--init must be wide, narrow or random");

  std::mt19937_64 rng(f.seed);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  const double width = f.init == "narrow" ? 0.5 : 2.0;  // e^{-q^2/width}; the minimizer has width 2

  MinimizeOptions opts;
  opts.control.rule = numkernel::StepRule::barzilai_borwein;
  opts.control.gradient_tolerance = f.tol;
  MinimizeReport report;
  ordered_json doc;
  doc["case"] = f.case_name;
  doc["functional"] = functional->describe();

  if (functional->kind() == DispersionFunctional::Kind::transverse_massless) {
    CylindricalGeometry g;
    g.perp_max = g.z_half = f.extent;
    g.perp_step = g.z_step = f.step;
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw FlagError(e.what());
    }
    // Fixed width 4 for the random start so the seed alone decides the state.
    auto init = sample_cylindrical(g, [&](double r, double z) {
      const double scale = f.init == "random" ? jitter(rng) : 1.0;
      const double w = f.init == "random" ? 4.0 : width;
      return scale * r * std::exp(-(r * r + z * z) / w);
    });
    report = minimize_transverse_massless(g, std::move(init), opts);
    // Both readings of the closed-form minimizer q e^{-5q^2/4}.
    const auto transverse =
        make_state(g, sample_cylindrical(g, [](double r, double z) { return r * std::exp(-1.25 * (r * r + z * z)); }),
                   *functional);
    const bool magnitude_finite = axis_vanishes(
        [](double r, double z) {
          const double q = std::hypot(r, z);
          return q * std::exp(-1.25 * q * q);
        },
        g.perp_step);
    doc["closed_form_minimizer"] = {{"q_perp_reading_gamma", jnum(transverse.gamma)},
                                {"magnitude_reading", magnitude_finite ? "finite" : "divergent"}};
    doc["factorization_error"] = jnum(factorization_error(report.state));
  } else {
    RadialGeometry g{f.qmax, f.n};
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw FlagError(e.what());
    }
    auto init = sample_radial(g, [&](double q) {
      const double scale = f.init == "random" ? jitter(rng) : 1.0;
      const double w = f.init == "random" ? 2.0 : width;
      return scale * std::exp(-q * q / w);
    });
    report = minimize_radial(*functional, g, std::move(init), opts);
  }
  const auto& s = report.state;
  ordered_json result = {{"gamma", jnum(s.gamma)},
                         {"delta_q2", jnum(s.delta_q2)},
                         {"delta_rq2", jnum(s.delta_rq2)},
                         {"iterations", report.iterations},
                         {"rayleigh_quotient", jnum(report.rayleigh_quotient)},
                         {"stationarity", jnum(report.stationarity)}};
  result.insert(doc.begin(), doc.end());
  if (!report.cascade_iterations.empty()) result["cascade_iterations"] = report.cascade_iterations;
  if (!f.d.empty() && (functional->kind() == DispersionFunctional::Kind::spin0 ||
                       functional->kind() == DispersionFunctional::Kind::spin1_longitudinal)) {
    result["d"] = ds[0].str();
  }
  emit(f.out, result.dump(2) + "\n");

  if (!f.samples.empty()) {
    std::string csv;
    if (const auto* g = std::get_if<RadialGeometry>(&s.geometry)) {
      csv = "q,f\n";
      for (std::size_t k = 0; k < g->size(); ++k) csv += format_number(g->node(k)) + "," + format_number(s.f_samples[k]) + "\n";
    } else {
      const auto& c = std::get<CylindricalGeometry>(s.geometry);
      csv = "q_perp,q_z,f\n";
      for (std::size_t i = 0; i < c.perp_count(); ++i) {
        for (std::size_t r = 0; r < c.z_count(); ++r) {
          csv += format_number(c.perp(i)) + "," + format_number(c.z(r)) + "," +
                 format_number(s.f_samples[c.index(i, r)]) + "\n";
        }
      }
    }
    write_atomic(f.samples, csv);
  }
  return 0;
}

// ----------------------------------------------------------------- verify

struct VerifyFlags {
  std::uint64_t seed = 20240101;
  double step = 0.04;
  std::string out;
};

int run_verify(const VerifyFlags& f) {
  verify::VerifyOptions opts;
  opts.seed = f.seed;
  opts.transverse_step = f.step;
  const auto results = verify::run_suite(opts);
  std::size_t failed = 0;
  ordered_json doc = ordered_json::array();
  for (const auto& r : results) {
    std::printf("%-4s  %-72s  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += r.passed ? 0 : 1;
    doc.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
  std::fflush(stdout);
  if (!f.out.empty()) write_atomic(f.out, doc.dump(2) + "\n");
  return failed == 0 ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Uncertainty bounds for relativistic bosons: densities, potentials, gamma(d) and minimizers."};
  app.name("relbosons");
  app.require_subcommand(1, 1);

  DensityFlags density;
  auto* sd = app.add_subcommand("density", "Charge and energy density of the Klein-Gordon packet.\n"
                                           "CSV columns: r,rho,eps. --map writes x,z,rho; --shells writes\n"
                                           "[{r_min, r_max, rho_min}] as JSON.");
  sd->add_option("--m", density.mass, "mass")->capture_default_str();
  sd->add_option("--a", density.a, "damping a")->capture_default_str();
  sd->add_option("--t", density.t, "time")->capture_default_str();
  sd->add_option("--rmax", density.rmax, "largest radius")->capture_default_str();
  sd->add_option("--dr", density.dr, "radial step")->capture_default_str();
  sd->add_option("--profile", density.profile, "reference (cos(p/m)/E_p) or gaussian")->capture_default_str();
  sd->add_option("--sigma", density.sigma, "gaussian width")->capture_default_str();
  sd->add_option("--centre", density.centre, "gaussian centre")->capture_default_str();
  sd->add_option("--out", density.out, "output file (stdout if absent)");
  sd->add_option("--format", density.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sd->add_option("--shells", density.shells, "JSON file for the negative shells");
  sd->add_option("--map", density.map, "CSV file for the planar map rho(x, 0, z)");
  sd->add_option("--map-extent", density.map_extent, "half width of the map (default rmax)");
  sd->add_option("--map-step", density.map_step, "map pixel size")->capture_default_str();

  PotentialFlags potential;
  auto* sp = app.add_subcommand("potential", "Effective potential W(q) of -u'' + W u = 2 gamma u.\n"
                                             "CSV columns: q,W for one d, d,q,W for a list.");
  sp->add_option("--spin", potential.spin, "0 or 1")->capture_default_str();
  sp->add_option("--channel", potential.channel, "scalar (spin 0) or longitudinal (spin 1)");
  sp->add_option("--d", potential.d, "comma-separated d values, 'inf' for the massless limit")->capture_default_str();
  sp->add_option("--l", potential.l, "angular index l or j")->capture_default_str()->check(CLI::NonNegativeNumber);
  sp->add_option("--q", potential.q, "start:stop:step")->capture_default_str();
  sp->add_option("--out", potential.out, "output file (stdout if absent)");
  sp->add_option("--format", potential.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  GammaFlags gamma;
  auto* sg = app.add_subcommand("gamma", "Ground-state gamma(d) by shooting with a finite-difference cross-check.\n"
                                         "CSV columns: d,gamma,residual,method.");
  sg->add_option("--spin", gamma.spin, "0 or 1")->capture_default_str();
  sg->add_option("--channel", gamma.channel, "scalar (spin 0) or longitudinal (spin 1)");
  sg->add_option("--d", gamma.d, "comma-separated d values, 'inf' for the massless limit")->capture_default_str();
  sg->add_option("--l", gamma.l, "angular index l or j")->capture_default_str()->check(CLI::NonNegativeNumber);
  sg->add_option("--n", gamma.n, "finite-difference nodes")->capture_default_str();
  sg->add_option("--qmax", gamma.qmax, "outer boundary")->capture_default_str();
  sg->add_option("--qmin", gamma.qmin, "series start of the outward integration")->capture_default_str();
  sg->add_option("--tol", gamma.tol, "shooting tolerance on lambda")->capture_default_str();
  sg->add_option("--out", gamma.out, "output file (stdout if absent)");
  sg->add_option("--format", gamma.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  RayleighFlags rayleigh;
  auto* sr = app.add_subcommand("rayleigh", "Direct minimization of a dispersion functional.\n"
                                            "JSON: gamma, delta_q2, delta_rq2, iterations, rayleigh_quotient.\n"
                                            "--samples CSV columns: q,f (radial) or q_perp,q_z,f (cylindrical).");
  sr->add_option("--case", rayleigh.case_name, "spin0, long, trans-nonrel or trans-massless")->required();
  sr->add_option("--d", rayleigh.d, "d value or 'inf' (spin0 and long)")->capture_default_str();
  sr->add_option("--init", rayleigh.init, "wide, narrow or random")->capture_default_str();
  sr->add_option("--seed", rayleigh.seed, "seed of the random start")->capture_default_str();
  sr->add_option("--n", rayleigh.n, "radial nodes")->capture_default_str();
  sr->add_option("--qmax", rayleigh.qmax, "radial outer boundary")->capture_default_str();
  sr->add_option("--step", rayleigh.step, "cylindrical grid step")->capture_default_str();
  sr->add_option("--extent", rayleigh.extent, "cylindrical half width")->capture_default_str();
  sr->add_option("--tol", rayleigh.tol, "gradient tolerance")->capture_default_str();
  sr->add_option("--out", rayleigh.out, "JSON output file (stdout if absent)");
  sr->add_option("--samples", rayleigh.samples, "CSV file for the minimizer samples");

  VerifyFlags verify_flags;
  auto* sv = app.add_subcommand("verify", "Run the reference checks and print a pass/fail table.");
  sv->add_option("--seed", verify_flags.seed, "seed of the randomized checks")->capture_default_str();
  sv->add_option("--step", verify_flags.step, "cylindrical step of the transverse checks")->capture_default_str();
  sv->add_option("--out", verify_flags.out, "JSON report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (sd->parsed()) return run_density(density);
    if (sp->parsed()) return run_potential(potential);
    if (sg->parsed()) return run_gamma(gamma);
    if (sr->parsed()) return run_rayleigh(rayleigh);
    if (sv->parsed()) return run_verify(verify_flags);
  } catch (const FlagError& e) {
    std::cerr << "relbosons: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "relbosons: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace relbosons::cli
