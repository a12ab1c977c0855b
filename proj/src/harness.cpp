#include "crystalflow/harness.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "crystalflow/compare.hpp"
#include "crystalflow/errors.hpp"
#include "crystalflow/functionals.hpp"
#include "crystalflow/io.hpp"
#include "crystalflow/kmc.hpp"
#include "crystalflow/meso.hpp"
#include "crystalflow/pde.hpp"
#include "crystalflow/spectral.hpp"
#include "crystalflow/statmech.hpp"

namespace crystalflow::harness {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reads keys from one JSON object and rejects any it did not consume.
class Params {
 public:
  Params(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigInvalid(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) return require(key, fallback);
    if (!v->is_number()) throw ConfigInvalid(path(key) + ": expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigInvalid(path(key) + ": must be finite");
    return d;
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) return require(key, fallback);
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
      throw ConfigInvalid(path(key) + ": expected a nonnegative integer");
    return v->get<std::size_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigInvalid(path(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) return require(key, fallback);
    if (!v->is_string()) throw ConfigInvalid(path(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigInvalid(path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ConfigInvalid(path(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json* raw(const std::string& key) { return find(key); }

  Params child(const std::string& key) {
    static const json empty = json::object();
    const json* v = find(key);
    return Params(v ? *v : empty, path(key));
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!used_.count(k)) throw ConfigInvalid(where_ + ": unknown key \"" + k + "\"");
  }

 private:
  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <class T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigInvalid(path(key) + ": required");
    return *fallback;
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

struct Profile {
  std::string name = "constant";
  double offset = 0.0;
  double amplitude = 0.0;
  int mode = 1;
  std::string file;
};

Profile read_profile(Params p, double default_offset) {
  Profile pr;
  if (p.has("file")) {
    pr.file = p.text("file");
    p.finish();
    return pr;
  }
  pr.name = p.text("profile", std::string("constant"));
  pr.offset = p.number("offset", default_offset);
  pr.amplitude = p.number("amplitude", 0.0);
  pr.mode = static_cast<int>(p.count("mode", 1));
  p.finish();
  if (pr.name != "constant" && pr.name != "sine" && pr.name != "cosine")
    throw ConfigInvalid("initial.profile must be constant, sine or cosine");
  return pr;
}

double profile_value(const Profile& pr, double x) {
  if (pr.name == "sine") return pr.offset + pr.amplitude * std::sin(kTwoPi * pr.mode * x);
  if (pr.name == "cosine") return pr.offset + pr.amplitude * std::cos(kTwoPi * pr.mode * x);
  return pr.offset;
}

GridField make_field(const Profile& pr, std::size_t n) {
  if (!pr.file.empty()) {
    fs::path stem = pr.file;
    if (stem.extension() == ".bin" || stem.extension() == ".json") stem.replace_extension();
    auto snap = io::read_snapshot(stem);
    if (snap.field.size() != n) throw GridMismatch("initial file has N_g = " + std::to_string(snap.field.size()));
    return snap.field;
  }
  return GridField::sample(n, [&](double x) { return profile_value(pr, x); });
}

std::vector<double> schedule(Params& p, double t_final) {
  const double dt = p.number("sample_dt", 0.0);
  auto times = p.numbers("sample_times", {});
  if (dt < 0.0) throw ConfigInvalid("sample_dt must be >= 0");
  if (dt > 0.0 && !times.empty()) throw ConfigInvalid("give either sample_dt or sample_times, not both");
  if (dt > 0.0) {
    for (std::size_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * dt;
      if (t >= t_final * (1.0 - 1e-12)) break;
      times.push_back(t);
    }
  }
  if (times.empty() || times.back() < t_final) times.push_back(t_final);
  return times;
}

class Artifacts {
 public:
  explicit Artifacts(fs::path root) : root_(std::move(root)) {}
  void write(const fs::path& rel, std::string_view bytes) {
    io::write_atomic(root_ / rel, bytes);
    list_.push_back(rel);
  }
  void snapshot(const fs::path& rel_stem, const GridField& f, double t) {
    io::write_snapshot(root_ / rel_stem, f, t);
    fs::path b = rel_stem, j = rel_stem;
    b += ".bin";
    j += ".json";
    list_.push_back(b);
    list_.push_back(j);
  }
  const std::vector<fs::path>& list() const { return list_; }

 private:
  fs::path root_;
  std::vector<fs::path> list_;
};

std::string stem_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu", prefix, i);
  return buf;
}

pde::TimeControl time_control(Params& p, const std::vector<double>& samples) {
  pde::TimeControl c;
  c.tol = p.number("tol", c.tol);
  c.fixed_dt = p.number("fixed_dt", 0.0);
  c.dt_initial = p.number("dt_initial", 0.0);
  c.sample_times = samples;
  return c;
}

json run_kmc(Params p, std::uint64_t seed, Artifacts& out, std::ostream& log) {
  const std::size_t n = p.count("N", 64);
  kmc::KmcParams kp;
  kp.beta = p.number("beta", 1.0);
  kp.p = static_cast<int>(p.count("p", 2));
  kp.rho_evap = p.number("rho_evap", 0.0);
  kp.tau_dep_inv = p.number("tau_dep_inv", 0.0);
  kp.mu_dep = p.number("mu_dep", 0.0);
  kp.seed = seed;
  const double t_final = p.number("t_final");
  const std::size_t n_reps = p.count("n_reps", 1);
  const auto samples = schedule(p, t_final);
  const bool record = p.flag("record_events", false);
  const std::size_t box = p.count("box", 0);
  const unsigned threads = static_cast<unsigned>(p.count("threads", 0));
  const auto pr = read_profile(p.child("initial"), 0.0);
  std::vector<double> zeta = p.numbers("slope_offset", {0.0, 1.0});
  p.finish();
  if (!pr.file.empty()) throw ConfigInvalid("kmc: initial.file is not supported; use a named profile");
  if (zeta.size() != 2) throw ConfigInvalid("kmc: slope_offset must be [numerator, denominator]");

  auto initial = kmc::MicroState::flat(n);
  initial.slope_offset = {static_cast<std::int64_t>(zeta[0]), static_cast<std::int64_t>(zeta[1])};
  for (std::size_t i = 0; i < n; ++i)
    initial.heights[i] = std::llround(profile_value(pr, static_cast<double>(i) / static_cast<double>(n)));
  initial.validate();
  kp.validate();
  if (box && n % box != 0) throw BadPartition("kmc: box must divide N");

  kmc::EnsembleOptions eo;
  eo.sample_times = samples;
  eo.threads = threads;
  const auto ens = kmc::run_ensemble(initial, kp, t_final, n_reps, eo);
  log << "kmc: " << n_reps << " replicates, " << ens.total_events << " events\n";

  io::CsvWriter csv({"t", "site", "mean", "variance"});
  for (std::size_t s = 0; s < ens.sample_times.size(); ++s)
    for (std::size_t i = 0; i < n; ++i)
      csv.row({ens.sample_times[s], static_cast<double>(i), ens.mean[s][i], ens.variance[s][i]});
  out.write("ensemble.csv", csv.text());

  CounterRng rng(seed, 0);
  const auto traj = kmc::run_trajectory(initial, kp, samples, rng, record);
  std::string snaps;
  for (std::size_t s = 0; s < traj.sample_times.size(); ++s) {
    json line;
    line["t"] = traj.sample_times[s];
    line["heights"] = traj.snapshots[s];
    snaps += line.dump() + "\n";
  }
  out.write("snapshots.ndjson", snaps);
  if (record) {
    std::string ev;
    for (std::size_t e = 0; e < traj.events.size(); ++e) {
      json line;
      line["t"] = traj.event_times[e];
      line["kind"] = kmc::to_string(traj.events[e].kind);
      line["site"] = traj.events[e].site;
      line["waiting_time"] = traj.events[e].waiting_time;
      ev += line.dump() + "\n";
    }
    out.write("events.ndjson", ev);
  }
  if (box) {
    io::CsvWriter cg({"t", "box", "h_bar", "z_bar"});
    for (std::size_t s = 0; s < ens.sample_times.size(); ++s) {
      const auto prof = kmc::coarse_grain(ens.mean[s], ens.sample_times[s], box);
      for (std::size_t k = 0; k < prof.h_bar.size(); ++k)
        cg.row({prof.t, static_cast<double>(k), prof.h_bar[k], prof.z_bar[k]});
    }
    out.write("coarse.csv", cg.text());
  }
  return {{"events", ens.total_events}, {"replicates", n_reps}};
}

json run_meso(Params p, Artifacts& out, std::ostream& log) {
  meso::MesoParams mp;
  mp.N = p.count("N", 64);
  const double n2 = static_cast<double>(mp.N) * static_cast<double>(mp.N);
  mp.beta = p.number("beta", 0.5);
  mp.hop_coef = p.number("hop_coef", n2);
  mp.dep_coef = p.number("dep_coef", 1.0);
  mp.laplacian = meso::parse_laplacian_scaling(p.text("laplacian", std::string("grid")));
  const double t_final = p.number("t_final");
  meso::MesoControl mc;
  mc.sample_times = schedule(p, t_final);
  mc.tol = p.number("tol", mc.tol);
  const auto pr = read_profile(p.child("initial"), 0.0);
  p.finish();
  mp.validate();
  const auto h0 = make_field(pr, mp.N);
  const auto traj = meso::integrate_meso(h0, mp, t_final, mc);
  log << "meso: " << traj.steps << " steps, " << traj.rejected << " rejected\n";
  io::CsvWriter csv({"t", "x_k", "h_k"});
  for (std::size_t s = 0; s < traj.times.size(); ++s)
    for (std::size_t k = 0; k < mp.N; ++k) csv.row({traj.times[s], traj.snapshots[s].x(k), traj.snapshots[s][k]});
  out.write("meso.csv", csv.text());
  return {{"steps", traj.steps}, {"rejected", traj.rejected}};
}

json run_pde(Params p, Artifacts& out, std::ostream& log) {
  const std::size_t n = p.count("N_g", 256);
  RegParams reg;
  reg.epsilon = p.number("epsilon", reg.epsilon);
  reg.alpha = p.number("alpha", reg.alpha);
  const double t_final = p.number("t_final");
  const auto control = time_control(p, schedule(p, t_final));
  const auto pr = read_profile(p.child("initial"), 1.0);
  p.finish();
  reg.validate();
  const auto u0 = make_field(pr, n);
  const auto run = pde::solve_pde(u0, reg, t_final, control);
  const auto& r = run.report;
  log << "pde: " << r.steps << " steps, " << r.rejected << " rejected\n";
  io::CsvWriter csv({"t", "min_u", "F", "E", "F_eps", "log_invariant", "E_integral"});
  for (std::size_t i = 0; i < r.times.size(); ++i)
    csv.row({r.times[i], r.min_u[i], r.F[i], r.E[i], r.F_eps[i], r.log_invariant[i], r.E_integral[i]});
  out.write("report.csv", csv.text());
  for (std::size_t i = 0; i < run.snapshots.size(); ++i)
    out.snapshot(fs::path("snapshots") / stem_name("u", i), run.snapshots[i], r.times[i]);
  return {{"steps", r.steps},
          {"rejected", r.rejected},
          {"worst_E_increase", r.worst_E_increase},
          {"global_min_u", r.global_min_u}};
}

json run_h_equation(Params p, Artifacts& out, std::ostream& log) {
  const std::size_t n = p.count("N_g", 128);
  pde::HCoefficients coef;
  coef.c1 = p.number("c1", 1.0);
  coef.c2 = p.number("c2", 1.0);
  const double t_final = p.number("t_final");
  const auto control = time_control(p, schedule(p, t_final));
  const auto pr = read_profile(p.child("initial"), 0.0);
  p.finish();
  const auto h0 = make_field(pr, n);
  const auto traj = pde::solve_h_equation(h0, t_final, control, coef);
  log << "h_equation: " << traj.steps << " steps, " << traj.rejected << " rejected\n";
  io::CsvWriter csv({"t", "mean", "min", "max", "norm_0", "norm_2"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& h = traj.snapshots[i];
    csv.row({traj.times[i], h.mean(), h.min(), h.max(), spectral::s_norm(h, 0.0), spectral::s_norm(h, 2.0)});
    out.snapshot(fs::path("snapshots") / stem_name("h", i), h, traj.times[i]);
  }
  out.write("h_report.csv", csv.text());
  return {{"steps", traj.steps}, {"rejected", traj.rejected}};
}

json audit_json(const spectral::LyapunovReport& ly, const spectral::DecayReport& dc) {
  return {{"lyapunov",
           {{"s", ly.s},
            {"sigma", ly.sigma},
            {"h0_norm2", ly.h0_norm2},
            {"threshold", ly.threshold},
            {"binding", ly.binding},
            {"holds", ly.holds},
            {"worst_slack", ly.worst_slack},
            {"worst_interval", ly.worst_interval},
            {"norm2_nonincreasing", ly.norm2_nonincreasing},
            {"norm2_strictly_decreasing", ly.norm2_strictly_decreasing},
            {"note", ly.note}}},
          {"decay",
           {{"s1", dc.s1},
            {"s2", dc.s2},
            {"exponent", dc.exponent},
            {"C", dc.C},
            {"initial_norm", dc.initial_norm},
            {"finite", dc.finite},
            {"envelope_holds", dc.envelope_holds}}}};
}

json run_spectral_audit(Params p, Artifacts& out, std::ostream& log) {
  const fs::path traj_dir = p.text("traj");
  const double s = p.number("s", 2.0);
  const double s1 = p.number("s1", 0.0);
  const double s2 = p.number("s2", 2.0);
  const bool strict = p.flag("strict", false);
  p.finish();
  const auto snaps = io::read_trajectory(traj_dir);
  std::vector<double> times;
  std::vector<GridField> fields;
  for (const auto& sn : snaps) {
    times.push_back(sn.t);
    fields.push_back(sn.field);
  }
  const auto ly = spectral::lyapunov_audit(times, fields, s, strict);
  const auto dc = spectral::decay_audit(times, fields, s1, s2);
  const json j = audit_json(ly, dc);
  log << "spectral_audit: " << snaps.size() << " snapshots\n";
  out.write("audit.json", j.dump(2) + "\n");
  return j;
}

json run_statmech_table(Params p, Artifacts& out, std::ostream& log) {
  const double beta = p.number("beta", 1.0);
  const int pw = static_cast<int>(p.count("p", 2));
  const auto us = p.numbers("u_values", {-0.5, -0.25, 0.0, 0.25, 0.5});
  const auto kappas = p.numbers("kappa_values", {1.0, 10.0, 100.0, 1000.0});
  const double u_limit = p.number("limit_u", 0.4321);
  p.finish();
  io::CsvWriter csv({"u", "eta_star", "sigma", "residual"});
  for (double u : us) {
    const auto t = statmech::surface_tension(u, beta, pw);
    const double resid = statmech::tilt_mean({beta, t.eta_star, pw, 8}) - u;
    csv.row({u, t.eta_star, t.sigma, resid});
  }
  out.write("statmech.csv", csv.text());
  if (pw == 2) {
    io::CsvWriter lim({"kappa", "u", "scaled", "error"});
    for (double k : kappas) {
      const double v = statmech::scaled_tension_limit(u_limit, beta, k);
      lim.row({k, u_limit, v, std::abs(v - 2.0 * beta * u_limit)});
    }
    out.write("limit.csv", lim.text());
  }
  log << "statmech_table: " << us.size() << " rows\n";
  return {{"rows", us.size()}};
}

json run_compare(Params p, std::uint64_t seed, Artifacts& out, std::ostream& log) {
  compare::MesoPdeOptions mo;
  compare::KmcOptions ko;
  ko.seed = seed;
  bool with_meso = false, with_kmc = false;
  if (p.has("meso_pde")) {
    with_meso = true;
    auto q = p.child("meso_pde");
    std::vector<double> ns = q.numbers("N", {64, 128, 256});
    mo.N.assign(ns.begin(), ns.end());
    mo.amplitude = q.number("amplitude", mo.amplitude);
    mo.mode = static_cast<int>(q.count("mode", 1));
    mo.times = q.numbers("times", mo.times);
    mo.meso_tol = q.number("meso_tol", mo.meso_tol);
    mo.pde_tol = q.number("pde_tol", mo.pde_tol);
    mo.pde_grid = q.count("pde_grid", mo.pde_grid);
    q.finish();
  }
  if (p.has("kmc")) {
    with_kmc = true;
    auto q = p.child("kmc");
    if (const json* ladder = q.raw("ladder")) {
      if (!ladder->is_array()) throw ConfigInvalid("parameters.kmc.ladder: expected an array");
      ko.ladder.clear();
      for (const auto& e : *ladder) {
        Params r(e, "parameters.kmc.ladder[]");
        ko.ladder.push_back({r.count("N"), r.count("M"), r.count("n_reps")});
        r.finish();
      }
    }
    ko.beta = q.number("beta", ko.beta);
    ko.amplitude = q.number("amplitude", ko.amplitude);
    ko.mode = static_cast<int>(q.count("mode", 1));
    ko.t_macro = q.number("t_macro", ko.t_macro);
    ko.threads = static_cast<unsigned>(q.count("threads", 0));
    q.finish();
  }
  p.finish();
  if (!with_meso && !with_kmc) throw ConfigInvalid("compare: give meso_pde and/or kmc");

  compare::CompareReport rep;
  if (with_meso) rep = compare::meso_vs_pde(mo);
  if (with_kmc) {
    auto k = compare::kmc_vs_pde(ko);
    rep.points.insert(rep.points.end(), k.points.begin(), k.points.end());
    rep.kmc_pde_decreasing = k.kmc_pde_decreasing;
    rep.kmc_events = k.kmc_events;
  }
  io::CsvWriter csv({"pair", "N", "M", "n_reps", "t", "l2"});
  for (const auto& pt : rep.points)
    csv.row_text({pt.pair, std::to_string(pt.N), std::to_string(pt.M), std::to_string(pt.n_reps),
                  io::format_double(pt.t), io::format_double(pt.l2)});
  out.write("compare.csv", csv.text());
  json verdict;
  if (with_meso) {
    verdict["meso_pde_orders"] = rep.meso_pde_orders;
    verdict["meso_pde_decreasing"] = rep.meso_pde_decreasing;
  }
  if (with_kmc) {
    verdict["kmc_pde_decreasing"] = rep.kmc_pde_decreasing;
    verdict["kmc_events"] = rep.kmc_events;
  }
  out.write("compare.json", verdict.dump(2) + "\n");
  log << "compare: " << rep.points.size() << " distances\n";
  return verdict;
}

}  // namespace

std::string_view version() noexcept { return "0.1.0"; }

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::Kmc: return "kmc";
    case Scenario::Meso: return "meso";
    case Scenario::Pde: return "pde";
    case Scenario::HEquation: return "h_equation";
    case Scenario::Compare: return "compare";
    case Scenario::SpectralAudit: return "spectral_audit";
    case Scenario::StatmechTable: return "statmech_table";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  for (auto sc : {Scenario::Kmc, Scenario::Meso, Scenario::Pde, Scenario::HEquation, Scenario::Compare,
                  Scenario::SpectralAudit, Scenario::StatmechTable})
    if (to_string(sc) == s) return sc;
  throw ConfigInvalid("unknown scenario \"" + std::string(s) + "\"");
}

RunConfig parse_config(const json& doc) {
  Params p(doc, "config");
  RunConfig cfg;
  cfg.scenario = parse_scenario(p.text("scenario"));
  cfg.seed = p.count("seed", 0);
  cfg.out_dir = p.text("out_dir", std::string());
  if (const json* params = p.raw("parameters")) {
    if (!params->is_object()) throw ConfigInvalid("config.parameters: expected an object");
    cfg.parameters = *params;
  }
  p.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  const std::string text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::string canonical(const RunConfig& cfg) {
  json j;
  j["scenario"] = to_string(cfg.scenario);
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir.string();
  j["parameters"] = cfg.parameters;
  return j.dump();
}

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
  if (cfg.out_dir.empty()) throw ConfigInvalid("out_dir is required");
  const auto start = std::chrono::steady_clock::now();
  Artifacts out(cfg.out_dir);
  Params p(cfg.parameters, "parameters");
  json summary;
  switch (cfg.scenario) {
    case Scenario::Kmc: summary = run_kmc(std::move(p), cfg.seed, out, log); break;
    case Scenario::Meso: summary = run_meso(std::move(p), out, log); break;
    case Scenario::Pde: summary = run_pde(std::move(p), out, log); break;
    case Scenario::HEquation: summary = run_h_equation(std::move(p), out, log); break;
    case Scenario::Compare: summary = run_compare(std::move(p), cfg.seed, out, log); break;
    case Scenario::SpectralAudit: summary = run_spectral_audit(std::move(p), out, log); break;
    case Scenario::StatmechTable: summary = run_statmech_table(std::move(p), out, log); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string canon = canonical(cfg);
  nlohmann::ordered_json manifest;
  manifest["scenario"] = to_string(cfg.scenario);
  manifest["seed"] = cfg.seed;
  manifest["config_hash"] = io::hex64(io::fnv1a(canon));
  manifest["version"] = version();
  manifest["wall_time_s"] = wall;
  std::vector<std::string> names;
  for (const auto& a : out.list()) names.push_back(a.generic_string());
  manifest["artifacts"] = names;
  manifest["summary"] = summary;
  manifest["config"] = json::parse(canon);
  out.write("manifest.json", manifest.dump(2) + "\n");

  RunOutcome outcome;
  outcome.artifacts = out.list();
  outcome.summary = summary;
  return outcome;
}

}  // namespace crystalflow::harness
