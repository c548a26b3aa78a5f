#include "strobe/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "strobe/ancilla.hpp"
#include "strobe/io.hpp"
#include "strobe/linalg.hpp"
#include "strobe/pauli_operator.hpp"

#ifndef STROBE_VERSION
#define STROBE_VERSION "0.0.0"
#endif

namespace strobe {

const char* const kOmegaDefinition =
    "Omega = elementary gates per unit time of the configured schedule; gates run one after "
    "another, each lasting tau, so Omega = 1 / tau and Gamma_e = EPG * Omega";

const char* library_version() { return STROBE_VERSION; }

double gate_frequency(double tau) { return 1.0 / tau; }

namespace {

nlohmann::json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  out.back() = b;
  return out;
}

// Ranks with ties averaged.
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t k = i;
    while (k + 1 < idx.size() && v[idx[k + 1]] == v[idx[i]]) ++k;
    for (std::size_t m = i; m <= k; ++m) r[idx[m]] = 0.5 * static_cast<double>(i + k);
    i = k + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2) return 0.0;
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : 0.0;
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Line l;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return l;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (l.slope * x[i] + l.intercept);
    ss += r * r;
  }
  l.rms = std::sqrt(ss / n);
  return l;
}

class Recorder {
 public:
  Recorder(const ScenarioConfig& cfg, RunRecord& rec)
      : dir_(cfg.resolved_output_dir()), prefix_(to_string(cfg.kind)), rec_(rec) {}

  void row(std::string step, std::vector<std::pair<std::string, double>> values) {
    rec_.metrics.push_back({std::move(step), std::move(values)});
  }
  void check(std::string name, bool passed, std::string detail) {
    rec_.assertions.push_back({std::move(name), passed, std::move(detail)});
  }
  void write(const std::string& suffix, const std::string& content) {
    const auto path = dir_ / (prefix_ + "_" + suffix);
    write_atomic(path, content);
    rec_.outputs.push_back(path);
  }
  std::filesystem::path path(const std::string& suffix) const { return dir_ / (prefix_ + "_" + suffix); }
  void track(const std::filesystem::path& p) { rec_.outputs.push_back(p); }

 private:
  std::filesystem::path dir_;
  std::string prefix_;
  RunRecord& rec_;
};

std::string fmt(double v) { return format_number(v); }

// -- sequence scan ---------------------------------------------------------------------

void run_sequence_scan(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary) {
  const double a = c.phi.value_or(c.alpha), b = c.phi.value_or(c.beta), g = c.phi.value_or(c.gamma);
  const auto gens = vertex_generators();
  const double phi2 = (a * a + b * b + g * g) / 3.0;

  const auto rep = effective_hamiltonian(echoed_u123(a, b, g, gens, c.tau),
                                         predicted_terms(a, b, g, gens, true, c.tau));
  std::string coeff_csv =
      csv_header("strobe.coefficients", 1, "term,measured,predicted,relative_error");
  const auto four = four_body_term(gens).str();
  for (const auto& t : rep.target_coefficients) {
    const double rel = std::abs(t.measured - t.predicted) / std::abs(t.predicted);
    coeff_csv += t.term.str() + "," + fmt(t.measured) + "," + fmt(t.predicted) + "," + fmt(rel) + "\n";
    out.row("coefficient:" + t.term.str(),
            {{"measured", t.measured}, {"predicted", t.predicted}, {"relative_error", rel}});
    const bool is_four = t.term.str() == four;
    const double limit = is_four ? phi2 : std::sqrt(phi2);
    out.check(std::string("echoed ") + t.term.str() + (is_four ? " matches J_e" : " matches chi"),
              rel < limit, "relative error " + fmt(rel) + " < " + fmt(limit));
  }
  out.write("coefficients.csv", coeff_csv);

  const std::vector<PauliString> single_targets{four_body_term(gens)};
  const std::vector<PauliString> echo_targets{four_body_term(gens), gens[1]};
  const auto single = order_scan([&](double p) { return u123(p, p, p, gens, c.tau); }, c.phi_grid,
                                 single_targets);
  const auto echoed = order_scan([&](double p) { return echoed_u123(p, p, p, gens, c.tau); },
                                 c.phi_grid, echo_targets);

  std::string scan_csv = csv_header("strobe.order_scan", 1, "sequence,term,phi,coefficient");
  std::string fit_csv = csv_header("strobe.order_fit", 1, "sequence,term,target,slope,degenerate");
  for (const auto& [name, res] : {std::pair{"u123", &single}, std::pair{"echoed", &echoed}}) {
    for (const auto& t : res->terms) {
      for (std::size_t i = 0; i < t.phis.size(); ++i) {
        scan_csv += std::string(name) + "," + t.term.str() + "," + fmt(t.phis[i]) + "," +
                    fmt(t.coefficients[i]) + "\n";
      }
      fit_csv += std::string(name) + "," + t.term.str() + "," + (t.is_target ? "1" : "0") + "," +
                 fmt(t.slope) + "," + (t.degenerate ? "1" : "0") + "\n";
    }
    fit_csv += std::string(name) + ",residual,0," + fmt(res->residual_slope) + "," +
               (res->residual_degenerate ? "1" : "0") + "\n";
  }
  out.write("order_scan.csv", scan_csv);
  out.write("order_fit.csv", fit_csv);

  for (const char* t : {"IXZZ", "ZZYI"}) {
    const auto* f = single.find(PauliString::parse(t));
    const double slope = f ? f->slope : 0.0;
    out.row(std::string("u123 slope:") + t, {{"slope", slope}});
    out.check(std::string("u123 ") + t + " slope 4.0 +- 0.3",
              f && !f->degenerate && std::abs(slope - 4.0) <= 0.3, "slope " + fmt(slope));
    summary["u123_slopes"][t] = slope;
  }
  out.row("echoed residual slope", {{"slope", echoed.residual_slope}});
  out.check("echoed residual slope >= 5.5", !echoed.residual_degenerate && echoed.residual_slope >= 5.5,
            "slope " + fmt(echoed.residual_slope));

  std::vector<double> errs;
  std::string comp_csv = csv_header("strobe.serial_composition", 1, "phi,error");
  for (double p : c.phi_grid) {
    const auto comp = serial_compose(echoed_u123(p, p, p, vertex_generators(), c.tau),
                                     echoed_u123(p, p, p, plaquette_generators(), c.tau));
    errs.push_back(comp.report.error);
    comp_csv += fmt(p) + "," + fmt(comp.report.error) + "\n";
    out.row("serial composition phi=" + fmt(p), {{"error", comp.report.error}});
  }
  out.write("serial_composition.csv", comp_csv);
  const auto fit = fit_log_log(c.phi_grid, errs, 1e-15);
  out.row("serial composition slope", {{"slope", fit.slope}});
  out.check("serial composition slope >= 6.5", !fit.degenerate && fit.slope >= 6.5,
            "slope " + fmt(fit.slope));

  const TorusLattice lat(c.L);
  const double cycle = estimate_cycle_time(lat, c.tau_seconds, c.gates_per_u);
  out.row("cycle time", {{"seconds", cycle}});
  summary["cycle_time_seconds"] = cycle;
  summary["counting"] = "(vertices + plaquettes) * 20 U * gates_per_u * tau_seconds, serial";
  summary["echoed_residual_slope"] = echoed.residual_slope;
  summary["serial_composition_slope"] = fit.slope;
}

// -- spectra --------------------------------------------------------------------------------

ScanOptions scan_options(const ScenarioConfig& c) {
  ScanOptions o;
  o.pairing = c.pairing;
  o.n_eigenvalues = c.n_eigenvalues;
  o.eigen.block_size = c.block_size;
  o.eigen.max_basis = c.max_basis;
  o.eigen.tolerance = c.eigen_tolerance;
  o.eigen.seed = c.seed;
  return o;
}

void run_spectral(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary, bool fidelity) {
  const TorusLattice lat(c.L);
  const auto scan = fidelity_scan(lat, c.chi_grid, c.h_z, scan_options(c));
  emit_figure_data(FigureKind::Spectrum, scan, out.path("spectrum.csv"));
  out.track(out.path("spectrum.csv"));
  if (fidelity) {
    emit_figure_data(FigureKind::Fidelity, scan, out.path("fidelity.csv"));
    out.track(out.path("fidelity.csv"));
  }

  bool converged = true;
  for (const auto& pt : scan.points) {
    if (pt.error) {
      converged = false;
      out.row("chi=" + fmt(pt.chi), {{"failed", 1.0}});
      continue;
    }
    out.row("chi=" + fmt(pt.chi), {{"e0", pt.eigenvalues.front()},
                                   {"spread", pt.manifold_spread},
                                   {"gap", pt.gap},
                                   {"subspace_fidelity", pt.subspace_fidelity}});
    if (std::abs(pt.chi) <= 0.2 + 1e-12) {
      out.check("four-fold manifold at chi=" + fmt(pt.chi),
                pt.gap > 0.0 && pt.manifold_spread < pt.gap / 5.0,
                "spread " + fmt(pt.manifold_spread) + ", gap " + fmt(pt.gap));
    }
  }
  out.check("every chi point converged", converged, std::to_string(scan.points.size()) + " points");

  if (fidelity) {
    double inside_min = 1.0;
    std::vector<std::pair<double, double>> outside;
    std::optional<std::pair<double, double>> edge;  // largest |chi| <= 0.4
    for (const auto& pt : scan.points) {
      if (pt.error) continue;
      const double x = std::abs(pt.chi);
      if (x <= 0.4 + 1e-12) {
        inside_min = std::min(inside_min, pt.subspace_fidelity);
        if (!edge || x > edge->first) edge = {x, pt.subspace_fidelity};
      } else {
        outside.emplace_back(x, pt.subspace_fidelity);
      }
    }
    out.check("subspace fidelity >= 0.8 for |chi| <= 0.4", inside_min >= 0.8,
              "minimum " + fmt(inside_min));
    if (!outside.empty() && edge) {
      std::sort(outside.begin(), outside.end());
      bool decreasing = outside.front().second < edge->second;
      for (std::size_t i = 1; i < outside.size(); ++i) {
        decreasing = decreasing && outside[i].second < outside[i - 1].second;
      }
      const bool visible = outside.back().second < edge->second - 0.05;
      out.check("fidelity degrades beyond |chi| = 0.4", decreasing && visible,
                "F(" + fmt(edge->first) + ") = " + fmt(edge->second) + ", F(" +
                    fmt(outside.back().first) + ") = " + fmt(outside.back().second));
    }
  }
  summary["h_z"] = c.h_z;
  summary["pairing"] = to_string(c.pairing);
  summary["energy_units"] = "J_e = J_m";
}

// -- dissipation ------------------------------------------------------------------------------

double pair_gap(double j) { return 4.0 * j; }

// E^dagger on link 0 applied to the first reference ground state.
Eigen::VectorXcd pair_vector(const TorusLattice& lat) {
  const auto g = reference_ground_states(lat).front();
  const PauliOperator create(excitation_ops(lat, 0, ExcitationType::Electric).create);
  Eigen::VectorXcd psi(g.size());
  create.apply({g.data(), static_cast<std::size_t>(g.size())},
               {psi.data(), static_cast<std::size_t>(psi.size())});
  return psi.normalized();
}

MatrixXcd pair_state(const TorusLattice& lat) {
  const auto psi = pair_vector(lat);
  return psi * psi.adjoint();
}

EvolveOptions evolve_options(const ScenarioConfig& c) {
  EvolveOptions o;
  o.abs_tol = c.abs_tol;
  o.rel_tol = c.rel_tol;
  return o;
}

void run_thermalize(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary) {
  const TorusLattice lat(c.L);
  const auto model = thermal_jump_set(lat, c.p, c.lambda_star, c.gamma_star, c.j);
  const Liouvillian gen(model);
  const auto h0 = toric_hamiltonian(lat, c.j);
  const MatrixXcd h0d = to_dense(h0.sum());
  const double gap = pair_gap(c.j);
  const double t_target = temperature_target(c.p, gap);
  const double t_balance = c.p > 0.0 ? detailed_balance_temperature(c.p, gap) : 0.0;
  const MatrixXcd target = gibbs_state(h0, t_target);
  const MatrixXcd balance = gibbs_state(h0, t_balance);

  const auto ss = stationary_state(gen);
  const double d_target = trace_distance(ss.rho, target);
  const double d_balance = trace_distance(ss.rho, balance);

  const auto times = linspace(0.0, c.t_final, c.n_times);
  const MatrixXcd rho0 = pair_state(lat);
  const auto ev = evolve(gen, rho0, times, evolve_options(c));
  std::string csv = csv_header("strobe.thermalize", 1,
                               "t,energy,entropy,excitation_density,trace_distance_target,"
                               "trace_distance_stationary");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& r = ev.states[i];
    const double e = (h0d * r).trace().real();
    const double s = von_neumann_entropy(r);
    const double n = excitation_density(lat, r);
    const double dt = trace_distance(r, target);
    const double ds = trace_distance(r, ss.rho);
    csv += fmt(times[i]) + "," + fmt(e) + "," + fmt(s) + "," + fmt(n) + "," + fmt(dt) + "," + fmt(ds) + "\n";
    out.row("t=" + fmt(times[i]), {{"energy", e},
                                   {"entropy", s},
                                   {"excitation_density", n},
                                   {"trace_distance_target", dt}});
  }
  out.write("evolution.csv", csv);

  // Detailed balance on the constructed rates.
  bool balanced = true;
  for (const auto& jump : model.jumps()) {
    if (jump.label.rfind("E_", 0) != 0) continue;
    const std::string up_label = "Edag_" + jump.label.substr(2);
    for (const auto& up : model.jumps()) {
      if (up.label != up_label) continue;
      const double ratio = up.rate / jump.rate;
      const double want = c.p / (1.0 - c.p);
      balanced = balanced && std::abs(ratio - want) <= 4 * std::numeric_limits<double>::epsilon() * want;
    }
  }

  out.check("rates obey up/down = p/(1-p)", balanced, "p = " + fmt(c.p));
  out.check("stationary state is Gibbs at T = -gap / ln p", d_target < 1e-6,
            "trace distance " + fmt(d_target) + " at T = " + fmt(t_target));
  out.check("evolution stays a density matrix",
            ev.max_trace_error < 1e-8 && ev.min_eigenvalue > -1e-8,
            "trace error " + fmt(ev.max_trace_error) + ", min eigenvalue " + fmt(ev.min_eigenvalue));
  out.row("stationary", {{"null_dimension", static_cast<double>(ss.null_dimension)},
                         {"trace_distance_target", d_target},
                         {"trace_distance_detailed_balance", d_balance},
                         {"residual", ss.residual}});

  std::vector<PauliString> loops{lat.logical_z(0), lat.logical_z(1)};
  summary["temperature_target"] = number_or_string(t_target);
  summary["temperature_detailed_balance"] = number_or_string(t_balance);
  summary["trace_distance_target"] = d_target;
  summary["trace_distance_detailed_balance"] = d_balance;
  summary["null_dimension"] = ss.null_dimension;
  summary["trace_block_null_dimension"] = ss.trace_block_null_dimension;
  summary["logical_z_sector_null_dimension"] = sector_null_dimension(ss, lat.n_links(), loops);
  summary["model"] = model.to_json();

  if (c.samples > 0) {
    TrajectoryOptions topt;
    topt.dt = c.trajectory_dt;
    topt.seed = c.seed;
    topt.n_samples = c.samples;
    std::vector<std::pair<std::string, PauliSum>> obs{{"energy", h0.sum()}};
    const auto st = trajectories(model, pair_vector(lat), times, obs, topt);
    out.write("trajectories.csv", trajectory_csv(st));
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double dense = (h0d * ev.states[i]).trace().real();
      const double z = std::abs(st.mean[0][i] - dense) / std::max(st.stderr_[0][i], 1e-12);
      worst = std::max(worst, std::abs(st.mean[0][i] - dense) > 1e-9 ? z : 0.0);
    }
    out.check("trajectory energy within 4 standard errors of the master equation", worst <= 4.0,
              "largest deviation " + fmt(worst) + " standard errors");
  }
}

void run_cool(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary) {
  const TorusLattice lat(c.L);
  const auto model = cooling_jump_set(lat, c.lambda_star, c.j);

  // The ground space is dark: every jump annihilates it.
  double leak = 0.0;
  for (const auto& g : reference_ground_states(lat)) {
    for (const auto& jump : model.jumps()) {
      const PauliOperator op(jump.op);
      Eigen::VectorXcd img(g.size());
      op.apply({g.data(), static_cast<std::size_t>(g.size())},
               {img.data(), static_cast<std::size_t>(img.size())});
      leak = std::max(leak, img.norm());
    }
  }
  out.check("ground space is dark", leak < 1e-12, "largest ||c g|| = " + fmt(leak));

  const Liouvillian gen(model);
  const auto times = linspace(0.0, c.t_final, c.n_times);
  const auto ev = evolve(gen, pair_state(lat), times, evolve_options(c));
  std::string csv = csv_header("strobe.cooling", 1, "t,energy,entropy,excitation_density");
  const MatrixXcd h0d = to_dense(toric_hamiltonian(lat, c.j).sum());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& r = ev.states[i];
    const double e = (h0d * r).trace().real();
    const double s = von_neumann_entropy(r);
    const double n = excitation_density(lat, r);
    csv += fmt(times[i]) + "," + fmt(e) + "," + fmt(s) + "," + fmt(n) + "\n";
    out.row("t=" + fmt(times[i]), {{"energy", e}, {"entropy", s}, {"excitation_density", n}});
  }
  out.write("evolution.csv", csv);
  const double final_n = excitation_density(lat, ev.states.back());
  out.check("pair cooled below 1e-6 excitation density", final_n < 1e-6,
            "density " + fmt(final_n) + " at t = " + fmt(times.back()));

  const auto rep = cool_with_noise(c);
  std::string sweep = csv_header("strobe.noise_limited_cooling", 1,
                                 "ratio,gamma_e,epg,energy,excitation_density,temperature,residual");
  const double omega = gate_frequency(c.tau);
  for (const auto& p : rep.points) {
    sweep += fmt(p.ratio) + "," + fmt(p.gamma_e) + "," + fmt(p.gamma_e / omega) + "," + fmt(p.energy) +
             "," + fmt(p.excitation_density) + "," + fmt(p.temperature) + "," + fmt(p.residual) + "\n";
    out.row("ratio=" + fmt(p.ratio), {{"gamma_e", p.gamma_e},
                                      {"energy", p.energy},
                                      {"excitation_density", p.excitation_density},
                                      {"temperature", p.temperature}});
  }
  out.write("sweep.csv", sweep);
  out.check("noiseless stationary state in the ground space", rep.noiseless_density < 1e-6,
            "density " + fmt(rep.noiseless_density));
  out.check("stationary states are steady", rep.steady, "residual tolerance 1e-8");
  bool monotone = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    monotone = monotone && rep.points[i].temperature < rep.points[i - 1].temperature;
  }
  out.check("temperature decreases as cooling outpaces noise", monotone && rep.rank_correlation == 1.0,
            "rank correlation " + fmt(rep.rank_correlation) + ", fit rms " + fmt(rep.fit_rms));
  const auto hot = std::min_element(rep.points.begin(), rep.points.end(),
                                    [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
  if (hot != rep.points.end() && hot->ratio < 1.0) {
    out.check("noise-dominated endpoint is hotter than the gap",
              hot->temperature > pair_gap(c.j), "T = " + fmt(hot->temperature));
  }
  summary["sweep"] = rep.to_json();
  summary["omega"] = omega;
}

void run_pump(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary) {
  PumpProtocol pr;
  pr.theta = c.theta;
  pr.gamma20 = c.gamma20;
  pr.rabi = c.rabi;
  pr.gap = pair_gap(c.j);
  const auto res = pump_ancilla(pr);
  std::string csv = csv_header("strobe.pump", 1, "step,duration,p0,p1,p2");
  for (const auto& s : res.steps) {
    csv += s.name + "," + fmt(s.duration) + "," + fmt(s.populations[0]) + "," + fmt(s.populations[1]) +
           "," + fmt(s.populations[2]) + "\n";
    out.row(s.name, {{"p0", s.populations[0]}, {"p1", s.populations[1]}, {"p2", s.populations[2]}});
  }
  out.write("steps.csv", csv);
  const double s2 = std::pow(std::sin(c.theta), 2), c2 = std::pow(std::cos(c.theta), 2);
  const double err = std::max(std::abs(res.rho(0, 0).real() - s2), std::abs(res.rho(1, 1).real() - c2));
  const double coh = std::abs(res.rho(0, 1));
  out.check("pumped state is diag(sin^2, cos^2)", err <= 1e-4 && coh <= 1e-4,
            "population error " + fmt(err) + ", coherence " + fmt(coh));
  out.row("result", {{"p0", res.rho(0, 0).real()}, {"p1", res.rho(1, 1).real()}, {"t_eff", res.t_eff}});
  summary["pump"] = res.to_json();
  summary["pump"]["t_eff"] = number_or_string(res.t_eff);
}

void run_eliminate(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary) {
  EliminationOptions o;
  o.g_grid = c.g_grid;
  o.lambda_grid = c.lambda_grid;
  o.gamma = c.gamma_mixed;
  const auto res = adiabatic_elimination_probe(o);
  std::string csv = csv_header("strobe.elimination", 1, "g,lambda,rate,fit_rms,markovian");
  bool markovian = true;
  for (const auto& p : res.points) {
    csv += fmt(p.g) + "," + fmt(p.lambda) + "," + fmt(p.rate) + "," + fmt(p.fit_rms) + "," +
           (p.markovian ? "1" : "0") + "\n";
    out.row("g=" + fmt(p.g) + " lambda=" + fmt(p.lambda), {{"rate", p.rate}, {"fit_rms", p.fit_rms}});
    markovian = markovian && p.markovian;
  }
  out.write("rates.csv", csv);
  out.row("fit", {{"g_exponent", res.g_exponent},
                  {"lambda_exponent", res.lambda_exponent},
                  {"rms_lambda", res.rms_lambda},
                  {"rms_inverse_lambda", res.rms_inverse_lambda}});
  out.check("effective rate scales as g^2", std::abs(res.g_exponent - 2.0) <= 0.1,
            "g exponent " + fmt(res.g_exponent));
  out.check("reduced dynamics is Markovian", markovian, "per-point exponential fits");
  summary["elimination"] = res.to_json();
}

void run_entropy(const ScenarioConfig& c, Recorder& out, nlohmann::json& summary) {
  const auto rep = entropy_per_gate(c);
  std::string csv = csv_header("strobe.entropy", 1, "epg,delta_s");
  for (const auto& p : rep.points) {
    csv += fmt(p.epg) + "," + fmt(p.delta_s) + "\n";
    out.row("epg=" + fmt(p.epg), {{"delta_s", p.delta_s}});
  }
  out.write("sweep.csv", csv);
  bool nonnegative = true;
  double at_zero = 0.0;
  for (const auto& p : rep.points) {
    nonnegative = nonnegative && p.delta_s >= 0.0;
    if (p.epg == 0.0) at_zero = p.delta_s;
  }
  out.check("entropy is non-negative", nonnegative, "all EPG values");
  out.check("no entropy without noise", at_zero == 0.0, "dS = " + fmt(at_zero));
  out.check("dS ~ EPG (exponent 1.0 +- 0.15)", std::abs(rep.exponent - 1.0) <= 0.15,
            "exponent " + fmt(rep.exponent));
  summary["entropy"] = rep.to_json();
}

}  // namespace

// -- records --------------------------------------------------------------------------------

bool RunRecord::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

std::string RunRecord::metrics_csv() const {
  std::string out = csv_header("strobe.metrics", 1, "step,name,value");
  for (const auto& r : metrics) {
    for (const auto& [name, value] : r.values) out += r.step + "," + name + "," + fmt(value) + "\n";
  }
  return out;
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j;
  j["schema"] = "strobe.run_record/1";
  j["scenario"] = scenario;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hash;
  j["version"] = version;
  j["omega_definition"] = omega_definition;
  j["assertions"] = nlohmann::json::array();
  for (const auto& a : assertions) {
    j["assertions"].push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  }
  j["passed"] = passed();
  j["outputs"] = nlohmann::json::array();
  for (const auto& o : outputs) j["outputs"].push_back(o.filename().string());
  j["summary"] = summary;
  return j;
}

RunRecord run(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.scenario = to_string(config.kind);
  rec.config_hash = config.hash();
  rec.version = library_version();
  rec.omega_definition = kOmegaDefinition;
  rec.summary = nlohmann::json::object();
  rec.summary["config"] = config.to_json();
  Recorder out(config, rec);
  switch (config.kind) {
    case ScenarioKind::SequenceScan: run_sequence_scan(config, out, rec.summary); break;
    case ScenarioKind::Spectrum: run_spectral(config, out, rec.summary, false); break;
    case ScenarioKind::FidelityScan: run_spectral(config, out, rec.summary, true); break;
    case ScenarioKind::Thermalize: run_thermalize(config, out, rec.summary); break;
    case ScenarioKind::Cool: run_cool(config, out, rec.summary); break;
    case ScenarioKind::Pump: run_pump(config, out, rec.summary); break;
    case ScenarioKind::Eliminate: run_eliminate(config, out, rec.summary); break;
    case ScenarioKind::Entropy: run_entropy(config, out, rec.summary); break;
  }
  out.write("metrics.csv", rec.metrics_csv());
  const auto record_path = out.path("record.json");
  rec.outputs.push_back(record_path);
  write_atomic(record_path, rec.to_json().dump(2) + "\n");
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// -- cooling against noise ---------------------------------------------------------------------

double effective_temperature(double n, double j) {
  if (n <= 0.0) return 0.0;
  if (n >= 0.5) return std::numeric_limits<double>::infinity();
  return 2.0 * j / std::log((1.0 - n) / n);
}

nlohmann::json CoolingReport::to_json() const {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : points) {
    j["points"].push_back({{"ratio", p.ratio},
                           {"gamma_e", p.gamma_e},
                           {"energy", p.energy},
                           {"excitation_density", p.excitation_density},
                           {"temperature", number_or_string(p.temperature)},
                           {"residual", p.residual}});
  }
  j["noiseless_density"] = noiseless_density;
  j["fit"] = {{"form", "T = a * gap / ln(ratio) + b"},
              {"a", fit_scale},
              {"b", fit_offset},
              {"rms", fit_rms}};
  j["rank_correlation"] = rank_correlation;
  j["steady"] = steady;
  return j;
}

CoolingReport cool_with_noise(const ScenarioConfig& c) {
  if (c.L != 2) throw std::invalid_argument("cool_with_noise: L must be 2");
  const TorusLattice lat(c.L);
  const double gap = pair_gap(c.j);
  const MatrixXcd h0d = to_dense(toric_hamiltonian(lat, c.j).sum());
  CoolingReport rep;
  {
    const auto ss = stationary_state(Liouvillian(cooling_jump_set(lat, c.lambda_star, c.j)));
    rep.noiseless_density = excitation_density(lat, ss.rho);
  }
  std::vector<double> ratios = c.ratio_grid;
  std::sort(ratios.begin(), ratios.end());
  for (double r : ratios) {
    auto model = cooling_jump_set(lat, c.lambda_star, c.j);
    CoolingPoint p;
    p.ratio = r;
    p.gamma_e = c.lambda_star / r;
    add_depolarizing(model, p.gamma_e);
    const Liouvillian gen(model);
    const auto ss = stationary_state(gen);
    p.energy = (h0d * ss.rho).trace().real();
    p.excitation_density = excitation_density(lat, ss.rho);
    p.temperature = effective_temperature(p.excitation_density, c.j);
    p.residual = ss.residual;
    p.drift = ss.residual;
    rep.steady = rep.steady && ss.residual <= 1e-8;
    rep.points.push_back(p);
  }
  std::vector<double> x, y, rs, neg_t;
  for (const auto& p : rep.points) {
    rs.push_back(p.ratio);
    neg_t.push_back(-p.temperature);
    if (p.ratio > 1.0 && std::isfinite(p.temperature)) {
      x.push_back(gap / std::log(p.ratio));
      y.push_back(p.temperature);
    }
  }
  const auto line = least_squares(x, y);
  rep.fit_scale = line.slope;
  rep.fit_offset = line.intercept;
  rep.fit_rms = line.rms;
  rep.rank_correlation = spearman(rs, neg_t);
  return rep;
}

// -- entropy per gate ------------------------------------------------------------------------

MatrixXcd depolarize(const MatrixXcd& rho, std::uint64_t support, std::size_t n_qubits, double epg) {
  if (epg == 0.0) return rho;
  std::vector<std::uint64_t> subsets{0};
  for (std::size_t q = 0; q < n_qubits; ++q) {
    if (!((support >> q) & 1u)) continue;
    const std::size_t m = subsets.size();
    for (std::size_t i = 0; i < m; ++i) subsets.push_back(subsets[i] | (std::uint64_t{1} << q));
  }
  const double others = static_cast<double>(subsets.size() * subsets.size() - 1);
  MatrixXcd acc = MatrixXcd::Zero(rho.rows(), rho.cols());
  for (auto x : subsets) {
    for (auto z : subsets) {
      if (x == 0 && z == 0) continue;
      const MatrixXcd p = to_dense(PauliString(n_qubits, x, z));
      acc.noalias() += p * rho * p;
    }
  }
  return (1.0 - epg) * rho + (epg / others) * acc;
}

double cycle_entropy(const GateSequence& cycle, const NoiseModel& noise) {
  const std::size_t n = cycle.n_qubits();
  MatrixXcd rho = MatrixXcd::Zero(std::size_t{1} << n, std::size_t{1} << n);
  rho(0, 0) = 1.0;
  for (const auto& g : cycle.gates()) {
    const MatrixXcd u = g.unitary();
    rho = u * rho * u.adjoint();
    rho = depolarize(rho, g.generator.support(), n, noise.epg);
  }
  if (noise.epg == 0.0) return 0.0;
  return std::max(0.0, von_neumann_entropy(hermitize(rho)));
}

nlohmann::json EntropyReport::to_json() const {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : points) j["points"].push_back({{"epg", p.epg}, {"delta_s", p.delta_s}});
  j["exponent"] = exponent;
  j["prefactor"] = prefactor;
  j["gates_per_cycle"] = gates;
  return j;
}

EntropyReport entropy_per_gate(const ScenarioConfig& c) {
  const double a = c.phi.value_or(c.alpha), b = c.phi.value_or(c.beta), g = c.phi.value_or(c.gamma);
  const auto cycle = echoed_u123(a, b, g, vertex_generators(), c.tau);
  EntropyReport rep;
  rep.gates = cycle.size();
  std::vector<double> epgs = c.epg_grid;
  epgs.push_back(0.0);
  if (c.noise.epg > 0.0) epgs.push_back(c.noise.epg);
  std::sort(epgs.begin(), epgs.end());
  epgs.erase(std::unique(epgs.begin(), epgs.end()), epgs.end());
  for (double e : epgs) {
    NoiseModel nm = c.noise;
    nm.epg = e;
    rep.points.push_back({e, cycle_entropy(cycle, nm)});
  }
  std::vector<double> x, y;
  for (const auto& p : rep.points) {
    if (p.epg <= 0.0 || p.delta_s <= 0.0) continue;
    if (std::find(c.epg_grid.begin(), c.epg_grid.end(), p.epg) == c.epg_grid.end()) continue;
    x.push_back(std::log(p.epg));
    y.push_back(std::log(p.delta_s));
  }
  const auto line = least_squares(x, y);
  rep.exponent = line.slope;
  rep.prefactor = std::exp(line.intercept);
  return rep;
}

// -- figure data ---------------------------------------------------------------------------------

void emit_figure_data(FigureKind kind, const FidelityScan& scan, const std::filesystem::path& path) {
  const std::string content = kind == FigureKind::Spectrum ? spectrum_csv(scan) : fidelity_csv(scan);
  const std::string schema = content.substr(0, content.find('\n'));
  if (std::filesystem::exists(path)) {
    std::ifstream is(path);
    std::string existing;
    std::getline(is, existing);
    if (existing != schema) {
      throw SchemaMismatch("emit_figure_data: " + path.string() + " holds '" + existing +
                           "', refusing to overwrite with '" + schema + "'");
    }
  }
  write_atomic(path, content);
}

}  // namespace strobe
