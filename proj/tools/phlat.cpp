// Command-line front end: one subcommand per simulator task, a JSON config
// file with flag overrides, CSV/JSON artifacts with self-describing headers.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phlat.hpp"

namespace {

using nlohmann::ordered_json;
using namespace phlat;

constexpr double unset = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Config file: one JSON object of nested tables.  Every key is checked
// against the schema up front, so a typo fails fast no matter which
// subcommand runs.

const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"model", {"N", "g", "delta", "omega", "frame"}},
      {"perturbation", {"kind", "strength", "seed"}},
      {"spectrum",
       {"edge-fraction", "band-fraction", "circ-fraction", "c3-blocks",
        "circulation", "output", "summary"}},
      {"chern", {"m-from", "m-to", "step", "grid", "output", "summary"}},
      {"phase-map", {"resolution", "grid", "output", "summary"}},
      {"evolve",
       {"start", "qubit", "t-final", "samples", "circulation", "max-subspace",
        "step-tol", "dense-threshold", "output", "summary"}},
      {"coherent",
       {"nbar", "tail-tol", "qubit", "t-final", "samples", "max-subspace",
        "step-tol", "dense-threshold", "output", "summary"}},
      {"lifetime",
       {"kind", "delta", "seed", "realizations", "N", "threshold",
        "samples-per-period", "q-max", "max-subspace", "step-tol",
        "dense-threshold", "output", "summary"}},
      {"semiclassical",
       {"epsilon", "photons", "periods", "samples", "tol", "output",
        "summary"}},
      {"floquet",
       {"omega-d", "omega-0", "periods", "steps-per-period", "n-max",
        "window-half", "leak-tol", "check-effective", "output", "summary"}},
      {"route",
       {"f0", "sigma", "omega", "r-in", "r-out", "cutoffs", "t-final", "dt",
        "step-tol", "leak-tol", "floor-tol", "output", "summary"}},
  };
  return schema;
}

ordered_json load_config(const std::string& path) {
  if (path.empty()) return ordered_json::object();
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  ordered_json root;
  try {
    root = ordered_json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const std::exception& e) {
    throw config_error("config parse error in " + path + ": " + e.what());
  }
  if (!root.is_object())
    throw config_error("config root must be a JSON object: " + path);
  for (const auto& [key, value] : root.items()) {
    if (key == "threads") {
      if (!value.is_number_integer())
        throw config_error("config key 'threads' must be an integer");
      continue;
    }
    const auto it = config_schema().find(key);
    if (it == config_schema().end())
      throw config_error("unknown config key '" + key + "'");
    if (!value.is_object())
      throw config_error("config table '" + key + "' must be an object");
    for (const auto& [sub, subval] : value.items()) {
      (void)subval;
      if (std::find(it->second.begin(), it->second.end(), sub) ==
          it->second.end())
        throw config_error("unknown config key '" + key + "." + sub + "'");
    }
  }
  return root;
}

const ordered_json* table(const ordered_json& root, const char* name) {
  const auto it = root.find(name);
  return it == root.end() ? nullptr : &*it;
}

[[noreturn]] void bad_type(const char* key, const char* want) {
  throw config_error(std::string("config key '") + key + "' must be " + want);
}

void fetch(const ordered_json* t, const char* key, double& dst) {
  if (!t || !t->contains(key)) return;
  const auto& v = t->at(key);
  if (!v.is_number()) bad_type(key, "a number");
  dst = v.get<double>();
}
void fetch(const ordered_json* t, const char* key, int& dst) {
  if (!t || !t->contains(key)) return;
  const auto& v = t->at(key);
  if (!v.is_number_integer()) bad_type(key, "an integer");
  dst = v.get<int>();
}
void fetch(const ordered_json* t, const char* key, std::uint64_t& dst) {
  if (!t || !t->contains(key)) return;
  const auto& v = t->at(key);
  if (!v.is_number_integer() || v.is_number_float() ||
      (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    bad_type(key, "a non-negative integer");
  dst = v.get<std::uint64_t>();
}
void fetch(const ordered_json* t, const char* key, bool& dst) {
  if (!t || !t->contains(key)) return;
  const auto& v = t->at(key);
  if (!v.is_boolean()) bad_type(key, "a boolean");
  dst = v.get<bool>();
}
void fetch(const ordered_json* t, const char* key, std::string& dst) {
  if (!t || !t->contains(key)) return;
  const auto& v = t->at(key);
  if (!v.is_string()) bad_type(key, "a string");
  dst = v.get<std::string>();
}
void fetch(const ordered_json* t, const char* key, std::vector<int>& dst) {
  if (!t || !t->contains(key)) return;
  const auto& v = t->at(key);
  if (!v.is_array()) bad_type(key, "an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) bad_type(key, "an array of integers");
    out.push_back(e.get<int>());
  }
  dst = std::move(out);
}

// ---------------------------------------------------------------------------
// Shared parameter plumbing.

struct ModelArgs {
  int N = 20;
  double g = 1.0;
  double delta = 0.0;
  double omega = 0.0;
  std::string frame = "rotating";

  void from_config(const ordered_json& root) {
    const auto* t = table(root, "model");
    fetch(t, "N", N);
    fetch(t, "g", g);
    fetch(t, "delta", delta);
    fetch(t, "omega", omega);
    fetch(t, "frame", frame);
  }
  ModelParams params() const { return ModelParams{g, delta, omega, N}; }
  Frame frame_enum() const {
    if (frame == "rotating") return Frame::rotating;
    if (frame == "lab") return Frame::lab;
    throw config_error("frame must be 'rotating' or 'lab', got '" + frame + "'");
  }
  void stamp(RunHeader& h) const {
    h.set("N", N);
    h.set("g", g);
    h.set("delta", delta);
    h.set("omega", omega);
    h.set("frame", frame);
  }
};

struct PertArgs {
  std::string kind = "none";
  double strength = 0.0;
  std::uint64_t seed = 0;

  void from_config(const ordered_json& root) {
    const auto* t = table(root, "perturbation");
    fetch(t, "kind", kind);
    fetch(t, "strength", strength);
    fetch(t, "seed", seed);
  }
  PerturbationSpec spec() const {
    PerturbationSpec s;
    s.kind = parse_kind(kind);
    s.strength = strength;
    s.seed = seed;
    return s;
  }
  static PerturbationKind parse_kind(const std::string& k) {
    if (k == "none") return PerturbationKind::none;
    if (k == "cavity_frequency") return PerturbationKind::cavity_frequency;
    if (k == "coupling_generic") return PerturbationKind::coupling_generic;
    if (k == "coupling_p_symmetric") return PerturbationKind::coupling_p_symmetric;
    throw config_error(
        "kind must be one of none, cavity_frequency, coupling_generic, "
        "coupling_p_symmetric; got '" + k + "'");
  }
  void stamp(RunHeader& h) const {
    h.set("kind", kind);
    h.set("strength", strength);
    h.set("seed", seed);
  }
};

Eigen::Vector2cd parse_qubit(const std::string& q) {
  if (q == "plus-x") return plus_x();
  if (q == "up") return Eigen::Vector2cd(1.0, 0.0);
  if (q == "down") return Eigen::Vector2cd(0.0, 1.0);
  throw config_error("qubit must be 'plus-x', 'up' or 'down', got '" + q + "'");
}

std::vector<double> sample_times(double t_final, int samples) {
  if (!(t_final > 0.0)) throw config_error("t-final must be positive");
  if (samples < 2) throw config_error("samples must be at least 2");
  std::vector<double> ts(std::size_t(samples) + 1);
  for (int k = 0; k <= samples; ++k) ts[std::size_t(k)] = t_final * k / samples;
  return ts;
}

ordered_json summary_skeleton(const RunHeader& h) {
  ordered_json j;
  j["phlat-json"] = csv_schema_version;
  j["command"] = h.command();
  j["code-version"] = code_version;
  j["timestamp"] = h.timestamp();
  ordered_json params = ordered_json::object();
  for (const auto& [key, value] : h.entries()) params[key] = value;
  j["params"] = params;
  return j;
}

void write_summary(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw config_error("write failed: " + path);
}

void announce(const std::string& name, const CsvWriter& csv,
              const std::string& csv_path, const std::string& summary_path) {
  std::cout << name << ": wrote " << csv_path << " (" << csv.rows()
            << " rows), " << summary_path << '\n';
}

int threads_from(const ordered_json& root, int flag_value) {
  if (flag_value > 0) return flag_value;
  int t = 0;
  if (root.contains("threads")) t = root["threads"].get<int>();
  if (t > 0) return t;
  return recommended_threads();
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
  ModelArgs model;
  PertArgs pert;
  double edge_fraction = 0.15;
  double band_fraction = 0.4;
  double circ_fraction = 0.06;
  bool c3_blocks = true;
  bool circulation = true;
  std::string output = "spectrum.csv";
  std::string summary = "spectrum_summary.json";
};

void run_spectrum(const SpectrumArgs& a) {
  const SectorBasis basis = SectorBasis::enumerate(a.model.N);
  const SparseOperator H = build_hamiltonian(basis, a.model.params(),
                                             a.pert.spec(), a.model.frame_enum());
  SpectrumOptions opt;
  opt.edge_fraction = a.edge_fraction;
  opt.band_fraction = a.band_fraction;
  opt.circ_fraction = a.circ_fraction;
  opt.use_c3_blocks = a.c3_blocks;
  opt.with_circulation = a.circulation;
  const SpectrumResult spec = analyze_spectrum(basis, H, a.model.g, opt);
  const BoundaryBandStats band = boundary_band_stats(spec, a.model.N, a.model.g, opt);
  const double residual = pairing_residual(spec);

  RunHeader h("spectrum");
  a.model.stamp(h);
  a.pert.stamp(h);
  h.set("edge-fraction", a.edge_fraction);
  h.set("band-fraction", a.band_fraction);
  h.set("circ-fraction", a.circ_fraction);
  h.set("c3-blocks", a.c3_blocks ? "true" : "false");
  h.set("circulation", a.circulation ? "true" : "false");

  CsvWriter csv(a.output, h,
                {"index", "energy", "edge_mean", "circ_mean", "c3_sector"});
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    const StateRecord& s = spec.states[i];
    csv.row(i, s.energy, s.edge_mean, s.circ_mean, s.c3_sector);
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  j["results"] = {
      {"dim", basis.size()},
      {"gap_estimate", spec.gap_estimate},
      {"gap_over_g_sqrt_n",
       spec.gap_estimate / (std::abs(a.model.g) * std::sqrt(double(a.model.N)))},
      {"pairing_residual", residual},
      {"band_count", band.count},
      {"band_edge_mean_over_n", band.edge_mean_over_n},
      {"band_circ_mean_norm", band.circ_mean_norm},
  };
  write_summary(a.summary, j);
  announce("spectrum", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// chern

struct ChernArgs {
  double m_from = -5.0;
  double m_to = 10.0;
  double step = 0.05;
  int grid = 48;
  std::string output = "chern.csv";
  std::string summary = "chern_summary.json";
};

void run_chern(const ChernArgs& a) {
  if (!(a.step > 0.0)) throw config_error("step must be positive");
  if (a.m_to < a.m_from) throw config_error("m-to must be >= m-from");
  std::vector<double> ms;
  const int count = int(std::floor((a.m_to - a.m_from) / a.step + 1e-9)) + 1;
  ms.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) ms.push_back(a.m_from + a.step * k);
  const auto points = chern_scan(ms, a.grid);

  RunHeader h("chern");
  h.set("m-from", a.m_from);
  h.set("m-to", a.m_to);
  h.set("step", a.step);
  h.set("grid", a.grid);
  h.set("seed", 0);

  CsvWriter csv(a.output, h, {"m", "chern", "gapless"});
  int gapless = 0;
  for (const auto& p : points) {
    csv.row(p.m, p.chern, p.gapless ? 1 : 0);
    gapless += p.gapless ? 1 : 0;
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  j["results"] = {{"points", int(points.size())}, {"gapless_points", gapless}};
  write_summary(a.summary, j);
  announce("chern", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// phase-map

struct PhaseMapArgs {
  ModelArgs model;
  int resolution = 24;
  int grid = 24;
  int threads = 0;
  std::string output = "phase-map.csv";
  std::string summary = "phase-map_summary.json";
};

void run_phase_map(const PhaseMapArgs& a, const ordered_json& root) {
  const ThreadPool pool(threads_from(root, a.threads));
  const auto cells = local_phase_map(a.model.N, a.model.g, a.model.delta,
                                     a.resolution, a.grid, pool);

  RunHeader h("phase-map");
  a.model.stamp(h);
  h.set("resolution", a.resolution);
  h.set("grid", a.grid);
  h.set("seed", 0);

  CsvWriter csv(a.output, h,
                {"n1", "n2", "n3", "f1", "f2", "f3", "gap", "chern"});
  int nontrivial = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) {
    csv.row(c.n[0], c.n[1], c.n[2], c.f[0], c.f[1], c.f[2], c.gap, c.chern);
    nontrivial += (c.chern == -1) ? 1 : 0;
    min_gap = std::min(min_gap, c.gap);
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  j["results"] = {
      {"sites", int(cells.size())},
      {"chern_minus_one_fraction",
       cells.empty() ? 0.0 : double(nontrivial) / double(cells.size())},
      {"min_gap", min_gap},
  };
  write_summary(a.summary, j);
  announce("phase-map", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveArgs {
  ModelArgs model;
  PertArgs pert;
  std::vector<int> start;  // empty: (0, 0, N)
  std::string qubit = "plus-x";
  double t_final = unset;  // default: two circulation periods
  int samples = 240;
  bool circulation = false;
  int max_subspace = 30;
  double step_tol = 1e-10;
  int dense_threshold = 600;
  bool n_given = false;
  std::string output = "evolve.csv";
  std::string summary = "evolve_summary.json";
};

void run_evolve(EvolveArgs a) {
  std::array<int, 3> start{};
  if (a.start.empty()) {
    start = {0, 0, a.model.N};
  } else {
    if (a.start.size() != 3)
      throw config_error("start must have exactly three occupation numbers");
    for (int i = 0; i < 3; ++i) start[std::size_t(i)] = a.start[std::size_t(i)];
    const int total = start[0] + start[1] + start[2];
    if (a.n_given && total != a.model.N)
      throw config_error("start occupations must sum to N");
    a.model.N = total;
  }
  const double T = circulation_period(a.model.g);
  if (std::isnan(a.t_final)) a.t_final = 2.0 * T;

  const SectorBasis basis = SectorBasis::enumerate(a.model.N);
  const SparseOperator H = build_hamiltonian(basis, a.model.params(),
                                             a.pert.spec(), a.model.frame_enum());
  const Eigen::VectorXcd psi0 = fock_state(basis, start, parse_qubit(a.qubit));
  const auto times = sample_times(a.t_final, a.samples);
  EvolveOptions opt;
  opt.krylov = KrylovOptions{a.max_subspace, a.step_tol, a.dense_threshold};
  opt.with_circulation = a.circulation;
  const TimeSeries ts = evolve_sector(basis, H, psi0, times, opt);

  RunHeader h("evolve");
  a.model.stamp(h);
  a.pert.stamp(h);
  h.set("start", std::to_string(start[0]) + "," + std::to_string(start[1]) +
                     "," + std::to_string(start[2]));
  h.set("qubit", a.qubit);
  h.set("t-final", a.t_final);
  h.set("samples", a.samples);
  h.set("circulation", a.circulation ? "true" : "false");
  h.set("max-subspace", a.max_subspace);
  h.set("step-tol", a.step_tol);
  h.set("dense-threshold", a.dense_threshold);

  std::vector<std::string> cols = {"t",       "n1",   "n2",       "n3",
                                   "sigma_x", "sigma_y", "sigma_z",
                                   "fidelity", "norm"};
  if (a.circulation) cols.push_back("circulation");
  CsvWriter csv(a.output, h, cols);
  double norm_drift = 0.0;
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    const int c = int(k);
    norm_drift = std::max(norm_drift, std::abs(ts.norm[k] - 1.0));
    if (a.circulation)
      csv.row(ts.times[k], ts.n_exp(0, c), ts.n_exp(1, c), ts.n_exp(2, c),
              ts.sigma_exp(0, c), ts.sigma_exp(1, c), ts.sigma_exp(2, c),
              ts.fidelity[k], ts.norm[k], ts.circulation[k]);
    else
      csv.row(ts.times[k], ts.n_exp(0, c), ts.n_exp(1, c), ts.n_exp(2, c),
              ts.sigma_exp(0, c), ts.sigma_exp(1, c), ts.sigma_exp(2, c),
              ts.fidelity[k], ts.norm[k]);
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  ordered_json res = {{"dim", basis.size()},
                      {"circulation_period", T},
                      {"norm_drift_max", norm_drift}};
  try {
    std::vector<double> sx(ts.times.size());
    for (std::size_t k = 0; k < sx.size(); ++k) sx[k] = ts.sigma_exp(0, int(k));
    res["period_sigma_x"] = period_from_upward_crossings(ts.times, sx);
  } catch (const numerical_error&) {
    res["period_sigma_x"] = nullptr;  // fewer than two upward crossings
  }
  j["results"] = res;
  write_summary(a.summary, j);
  announce("evolve", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// coherent

struct CoherentArgs {
  ModelArgs model;
  double nbar = 50.0;
  double tail_tol = 1e-8;
  std::string qubit = "plus-x";
  double t_final = unset;  // default: one circulation period
  int samples = 180;
  int max_subspace = 30;
  double step_tol = 1e-10;
  int dense_threshold = 600;
  int threads = 0;
  std::string output = "coherent.csv";
  std::string summary = "coherent_summary.json";
};

void run_coherent(CoherentArgs a, const ordered_json& root) {
  const double T = circulation_period(a.model.g);
  if (std::isnan(a.t_final)) a.t_final = T;
  const ThreadPool pool(threads_from(root, a.threads));
  const auto times = sample_times(a.t_final, a.samples);
  CoherentOptions opt;
  opt.tail_tol = a.tail_tol;
  opt.krylov = KrylovOptions{a.max_subspace, a.step_tol, a.dense_threshold};
  const CoherentSeries cs = coherent_series(a.model.params(), a.nbar,
                                            parse_qubit(a.qubit), times, opt, pool);

  RunHeader h("coherent");
  a.model.stamp(h);
  h.set("nbar", a.nbar);
  h.set("tail-tol", a.tail_tol);
  h.set("qubit", a.qubit);
  h.set("t-final", a.t_final);
  h.set("samples", a.samples);
  h.set("seed", 0);

  CsvWriter csv(a.output, h,
                {"t", "n1", "n2", "n3", "sigma_x", "sigma_y", "sigma_z",
                 "pred_n1", "pred_n2", "pred_n3"});
  double max_dev = 0.0;
  double circle_sq = 0.0;
  for (std::size_t k = 0; k < cs.times.size(); ++k) {
    const int c = int(k);
    const double x = cs.times[k] / T;
    const Eigen::Vector3d pred = a.nbar * boundary_path(x);
    csv.row(cs.times[k], cs.n_exp(0, c), cs.n_exp(1, c), cs.n_exp(2, c),
            cs.sigma_exp(0, c), cs.sigma_exp(1, c), cs.sigma_exp(2, c),
            pred[0], pred[1], pred[2]);
    for (int m = 0; m < 3; ++m)
      max_dev = std::max(max_dev, std::abs(cs.n_exp(m, c) - pred[m]) / a.nbar);
    const double dx = cs.sigma_exp(0, c) - std::cos(2.0 * pi * x);
    const double dy = cs.sigma_exp(1, c) - std::sin(2.0 * pi * x);
    circle_sq += dx * dx + dy * dy;
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  j["results"] = {
      {"sector_min", cs.sector_min},
      {"sector_max", cs.sector_max},
      {"max_occupation_deviation", max_dev},
      {"qubit_circle_rms", std::sqrt(circle_sq / double(cs.times.size()))},
  };
  write_summary(a.summary, j);
  announce("coherent", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// lifetime

struct LifetimeArgs {
  ModelArgs model;
  std::string kind = "coupling_generic";
  double strength = 0.1;  // the --delta flag: disorder half-width
  std::uint64_t seed = 1;
  int realizations = 100;
  std::vector<int> Ns = {16, 24, 32};
  double threshold = 0.9;
  int samples_per_period = 40;
  int q_max = 0;  // 0: heuristic per perturbation kind
  int max_subspace = 30;
  double step_tol = 1e-10;
  int dense_threshold = 600;
  int threads = 0;
  std::string output = "lifetime.csv";
  std::string summary = "lifetime_summary.json";
};

void run_lifetime(const LifetimeArgs& a, const ordered_json& root) {
  if (a.Ns.empty()) throw config_error("lifetime needs at least one N");
  const ThreadPool pool(threads_from(root, a.threads));
  LifetimeOptions opt;
  opt.pert.kind = PertArgs::parse_kind(a.kind);
  opt.pert.strength = a.strength;
  opt.pert.seed = a.seed;
  opt.realizations = a.realizations;
  opt.samples_per_period = a.samples_per_period;
  opt.threshold = a.threshold;
  opt.q_max = a.q_max;
  opt.krylov = KrylovOptions{a.max_subspace, a.step_tol, a.dense_threshold};
  const LifetimeResult res = lifetime_sweep(a.Ns, a.model.params(), opt, pool);

  RunHeader h("lifetime");
  h.set("g", a.model.g);
  h.set("detuning", a.model.delta);
  h.set("kind", a.kind);
  h.set("delta", a.strength);
  h.set("seed", a.seed);
  h.set("realizations", a.realizations);
  std::string ns_text;
  for (std::size_t i = 0; i < a.Ns.size(); ++i)
    ns_text += (i ? "," : "") + std::to_string(a.Ns[i]);
  h.set("N", ns_text);
  h.set("threshold", a.threshold);
  h.set("samples-per-period", a.samples_per_period);
  h.set("q-max", a.q_max);

  CsvWriter csv(a.output, h, {"N", "q", "t_mean", "peak_mean", "peak_over_n"});
  for (const auto& per : res.per_n)
    for (const auto& pt : per.points)
      csv.row(per.N, pt.q, pt.t_mean, pt.peak_mean, pt.peak_mean / per.N);
  csv.close();

  ordered_json j = summary_skeleton(h);
  ordered_json per = ordered_json::array();
  for (const auto& p : res.per_n)
    per.push_back({{"N", p.N}, {"t_star", p.t_star}, {"censored", p.censored}});
  j["results"] = {
      {"beta", res.beta},
      {"amplitude", res.amplitude},
      {"any_censored", res.any_censored},
      {"per_n", per},
  };
  write_summary(a.summary, j);
  announce("lifetime", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// semiclassical

struct SemiclassicalArgs {
  ModelArgs model;
  double epsilon = 0.0;
  double photons = 50.0;
  double periods = 1.0;
  int samples = 720;
  double tol = 1e-10;
  std::string output = "semiclassical.csv";
  std::string summary = "semiclassical_summary.json";
};

void run_semiclassical(const SemiclassicalArgs& a) {
  if (!(a.periods > 0.0)) throw config_error("periods must be positive");
  const double g = a.model.g;
  const FixedPointSolution fp =
      solve_circulating_point(a.photons, a.epsilon, g);
  const double delta = detuning_for_epsilon(a.epsilon, g);
  const auto times = sample_times(a.periods * fp.period, a.samples);
  const ClassicalTrajectory traj =
      integrate(fp.initial_state(), g, delta, times, a.tol);

  RunHeader h("semiclassical");
  h.set("g", g);
  h.set("epsilon", a.epsilon);
  h.set("photons", a.photons);
  h.set("periods", a.periods);
  h.set("samples", a.samples);
  h.set("tol", a.tol);
  h.set("seed", 0);

  CsvWriter csv(a.output, h,
                {"t", "n1", "n2", "n3", "sigma_x", "sigma_y", "sigma_z",
                 "energy"});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const ClassicalState& st = traj.states[k];
    const Eigen::Vector3d n = occupations(st);
    csv.row(traj.times[k], n[0], n[1], n[2], st.sigma[0], st.sigma[1],
            st.sigma[2], classical_energy(st, g, delta));
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  ordered_json res = {
      {"b_z", fp.b_z},
      {"fixed_point_residual", fp.residual},
      {"period_fixed_point", fp.period},
      {"period_series", period_series(a.photons, a.epsilon, g)},
      {"detuning", delta},
      {"energy_drift",
       std::abs(classical_energy(traj.states.back(), g, delta) -
                classical_energy(traj.states.front(), g, delta))},
  };
  if (a.periods >= 2.0) {
    res["period_measured"] = measure_period(traj);
  } else {
    res["period_measured"] = nullptr;  // needs two full turns of sigma_x
  }
  if (std::abs(a.periods - 1.0) < 1e-9) {
    const TrajectoryAverages avg = trajectory_averages(traj, g, delta);
    res["avg_edge_over_n"] = avg.edge_distance / a.photons;
    res["avg_circulation_norm"] =
        avg.circulation / (g * a.photons * a.photons);
    res["photons_conserved"] = avg.photons;
  } else {
    res["avg_edge_over_n"] = nullptr;  // cycle averages need exactly one period
    res["avg_circulation_norm"] = nullptr;
    res["photons_conserved"] = nullptr;
  }
  j["results"] = res;
  write_summary(a.summary, j);
  announce("semiclassical", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// floquet

struct FloquetArgs {
  ModelArgs model;
  double omega_d = unset;  // default 5000 |g|
  double omega_0 = unset;  // default 200 |g|
  int periods = 200;
  int steps_per_period = 64;
  int n_max = -1;
  int window_half = 5;
  double leak_tol = 1e-6;
  bool check_effective = false;
  std::string output = "floquet.csv";
  std::string summary = "floquet_summary.json";
};

void run_floquet(FloquetArgs a) {
  const double g = a.model.g;
  if (std::isnan(a.omega_d)) a.omega_d = 5000.0 * std::abs(g);
  if (std::isnan(a.omega_0)) a.omega_0 = 200.0 * std::abs(g);
  const DriveSpec d = default_drive_solution(g, a.omega_d, a.omega_0, a.model.N);
  StroboscopicOptions opt;
  opt.steps_per_period = a.steps_per_period;
  opt.n_max = a.n_max;
  opt.window_half = a.window_half;
  opt.leak_tol = a.leak_tol;
  const StroboscopicSeries series =
      stroboscopic_evolve(d, g, a.model.N, a.periods, opt);

  RunHeader h("floquet");
  h.set("N", a.model.N);
  h.set("g", g);
  h.set("omega-d", a.omega_d);
  h.set("omega-0", a.omega_0);
  h.set("periods", a.periods);
  h.set("steps-per-period", a.steps_per_period);
  h.set("n-max", a.n_max);
  h.set("window-half", a.window_half);
  h.set("leak-tol", a.leak_tol);
  h.set("seed", 0);

  CsvWriter csv(a.output, h,
                {"q", "t", "lab_n1", "lab_n2", "lab_n3", "static_n1",
                 "static_n2", "static_n3", "total", "leakage", "deviation"});
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const int c = int(k);
    csv.row(int(k), series.times[k], series.lab_occupations(0, c),
            series.lab_occupations(1, c), series.lab_occupations(2, c),
            series.static_occupations(0, c), series.static_occupations(1, c),
            series.static_occupations(2, c), series.total[k],
            series.leakage[k], series.deviation[k]);
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  const ValidityReport v = validity_report(g, a.model.N, a.omega_0, a.omega_d);
  ordered_json res = {
      {"max_deviation", series.max_deviation},
      {"max_deviation_over_n", series.max_deviation / a.model.N},
      {"covariance_violation", covariance_violation(d)},
      {"validity",
       {{"first_order_scale", v.first_order_scale},
        {"second_order_scale", v.second_order_scale},
        {"magnus_ratio", v.magnus_ratio},
        {"rwa_ratio", v.rwa_ratio},
        {"pair_coupling_scale", v.pair_coupling_scale},
        {"pair_gap", v.pair_gap},
        {"pair_ratio", v.pair_ratio}}},
  };
  if (a.check_effective) {
    if (a.model.N > 12)
      throw config_error("check-effective is a small-sector diagnostic (N <= 12)");
    const SectorBasis sb = SectorBasis::enumerate(a.model.N);
    const Eigen::MatrixXcd heff = effective_hamiltonian(d, sb).to_dense();
    const Eigen::MatrixXcd target =
        build_hamiltonian(sb, ModelParams{g, 0.0, 0.0, a.model.N},
                          PerturbationRealization{}, Frame::rotating)
            .to_dense();
    res["effective_residual"] = (heff - target).cwiseAbs().maxCoeff();
  } else {
    res["effective_residual"] = nullptr;
  }
  j["results"] = res;
  write_summary(a.summary, j);
  announce("floquet", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// route

struct RouteArgs {
  ModelArgs model;
  double f0 = 2.0;
  double sigma = 0.1;
  double omega = 1.0;
  double r_in = 0.02;
  double r_out = 2.0;
  std::vector<int> cutoffs = {6, 6, 6, 6, 6};
  double t_final = unset;  // default: three quarters of the circulation period
  double dt = 0.05;
  double step_tol = 1e-8;
  double leak_tol = 1e-3;
  double floor_tol = 1e-8;
  std::string output = "route.csv";
  std::string summary = "route_summary.json";
};

void run_route(RouteArgs a) {
  if (a.cutoffs.size() != 5)
    throw config_error("cutoffs must list five per-mode values");
  const double T = circulation_period(a.model.g);
  if (std::isnan(a.t_final)) a.t_final = 0.75 * T;
  RouterConfig cfg;
  cfg.f0 = cx(a.f0, 0.0);
  cfg.sigma_pulse = a.sigma;
  cfg.omega = a.omega;
  cfg.r_in = a.r_in;
  cfg.r_out = a.r_out;
  cfg.g = a.model.g;
  for (int m = 0; m < 5; ++m) cfg.cutoffs[std::size_t(m)] = a.cutoffs[std::size_t(m)];
  cfg.t_final = a.t_final;
  cfg.dt = a.dt;
  cfg.step_tol = a.step_tol;
  cfg.leak_tol = a.leak_tol;
  cfg.floor_tol = a.floor_tol;
  const RouterSeries series = evolve_router(cfg);

  RunHeader h("route");
  h.set("g", a.model.g);
  h.set("f0", a.f0);
  h.set("sigma", a.sigma);
  h.set("omega", a.omega);
  h.set("r-in", a.r_in);
  h.set("r-out", a.r_out);
  std::string cut_text;
  for (std::size_t i = 0; i < a.cutoffs.size(); ++i)
    cut_text += (i ? "," : "") + std::to_string(a.cutoffs[i]);
  h.set("cutoffs", cut_text);
  h.set("t-final", a.t_final);
  h.set("dt", a.dt);
  h.set("step-tol", a.step_tol);
  h.set("leak-tol", a.leak_tol);
  h.set("floor-tol", a.floor_tol);
  h.set("seed", 0);

  CsvWriter csv(a.output, h,
                {"t", "n1", "n2", "n3", "n_d1", "n_d2", "imbalance", "norm"});
  double peak = 0.0;
  double peak_time = 0.0;
  double late_min = std::numeric_limits<double>::infinity();
  double late_max = -std::numeric_limits<double>::infinity();
  double norm_max = 0.0;
  const double late_start = 0.75 * a.t_final - 1e-12;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const int c = int(k);
    csv.row(series.times[k], series.core(0, c), series.core(1, c),
            series.core(2, c), series.detectors(0, c), series.detectors(1, c),
            series.imbalance[k], series.norm[k]);
    if (std::abs(series.imbalance[k]) > std::abs(peak)) {
      peak = series.imbalance[k];
      peak_time = series.times[k];
    }
    if (series.times[k] >= late_start) {
      late_min = std::min(late_min, series.imbalance[k]);
      late_max = std::max(late_max, series.imbalance[k]);
    }
    norm_max = std::max(norm_max, series.norm[k]);
  }
  csv.close();

  ordered_json j = summary_skeleton(h);
  const int last = int(series.times.size()) - 1;
  j["results"] = {
      {"deposited_photons", a.f0 * a.f0 / 4.0},
      {"imbalance_peak", peak},
      {"imbalance_peak_time", peak_time},
      {"imbalance_late_min", late_min},
      {"imbalance_late_max", late_max},
      {"imbalance_final", series.imbalance[std::size_t(last)]},
      {"detectors_final",
       {series.detectors(0, last), series.detectors(1, last)}},
      {"norm_final", series.norm[std::size_t(last)]},
      {"norm_max", norm_max},
  };
  write_summary(a.summary, j);
  announce("route", csv, a.output, a.summary);
}

// ---------------------------------------------------------------------------
// wiring

void add_model_flags(CLI::App* sub, ModelArgs& m, bool with_n = true,
                     bool with_frame = true) {
  if (with_n) sub->add_option("--N", m.N, "photon-number sector");
  sub->add_option("--g", m.g, "hopping coupling strength");
  sub->add_option("--delta", m.delta, "qubit detuning");
  sub->add_option("--omega", m.omega, "bare cavity frequency (lab frame)");
  if (with_frame)
    sub->add_option("--frame", m.frame, "'rotating' or 'lab'");
}

void add_pert_flags(CLI::App* sub, PertArgs& p) {
  sub->add_option("--kind", p.kind, "disorder kind");
  sub->add_option("--strength", p.strength, "disorder half-width");
  sub->add_option("--seed", p.seed, "disorder seed");
}

void add_output_flags(CLI::App* sub, std::string& output, std::string& summary) {
  sub->add_option("--output,-o", output, "CSV artifact path");
  sub->add_option("--summary", summary, "JSON summary path");
}

int run_cli(int argc, char** argv) {
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" || arg == "-c") {
      if (i + 1 >= argc) throw config_error("--config needs a file path");
      config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    }
  }
  const ordered_json root = load_config(config_path);

  ModelArgs model_defaults;
  model_defaults.from_config(root);
  PertArgs pert_defaults;
  pert_defaults.from_config(root);

  SpectrumArgs sp;
  sp.model = model_defaults;
  sp.pert = pert_defaults;
  {
    const auto* t = table(root, "spectrum");
    fetch(t, "edge-fraction", sp.edge_fraction);
    fetch(t, "band-fraction", sp.band_fraction);
    fetch(t, "circ-fraction", sp.circ_fraction);
    fetch(t, "c3-blocks", sp.c3_blocks);
    fetch(t, "circulation", sp.circulation);
    fetch(t, "output", sp.output);
    fetch(t, "summary", sp.summary);
  }

  ChernArgs ch;
  {
    const auto* t = table(root, "chern");
    fetch(t, "m-from", ch.m_from);
    fetch(t, "m-to", ch.m_to);
    fetch(t, "step", ch.step);
    fetch(t, "grid", ch.grid);
    fetch(t, "output", ch.output);
    fetch(t, "summary", ch.summary);
  }

  PhaseMapArgs pm;
  pm.model = model_defaults;
  {
    const auto* t = table(root, "phase-map");
    fetch(t, "resolution", pm.resolution);
    fetch(t, "grid", pm.grid);
    fetch(t, "output", pm.output);
    fetch(t, "summary", pm.summary);
  }

  EvolveArgs ev;
  ev.model = model_defaults;
  ev.pert = pert_defaults;
  {
    const auto* t = table(root, "evolve");
    fetch(t, "start", ev.start);
    fetch(t, "qubit", ev.qubit);
    fetch(t, "t-final", ev.t_final);
    fetch(t, "samples", ev.samples);
    fetch(t, "circulation", ev.circulation);
    fetch(t, "max-subspace", ev.max_subspace);
    fetch(t, "step-tol", ev.step_tol);
    fetch(t, "dense-threshold", ev.dense_threshold);
    fetch(t, "output", ev.output);
    fetch(t, "summary", ev.summary);
  }

  CoherentArgs co;
  co.model = model_defaults;
  {
    const auto* t = table(root, "coherent");
    fetch(t, "nbar", co.nbar);
    fetch(t, "tail-tol", co.tail_tol);
    fetch(t, "qubit", co.qubit);
    fetch(t, "t-final", co.t_final);
    fetch(t, "samples", co.samples);
    fetch(t, "max-subspace", co.max_subspace);
    fetch(t, "step-tol", co.step_tol);
    fetch(t, "dense-threshold", co.dense_threshold);
    fetch(t, "output", co.output);
    fetch(t, "summary", co.summary);
  }

  LifetimeArgs lt;
  lt.model = model_defaults;
  {
    const auto* t = table(root, "lifetime");
    fetch(t, "kind", lt.kind);
    fetch(t, "delta", lt.strength);
    fetch(t, "seed", lt.seed);
    fetch(t, "realizations", lt.realizations);
    fetch(t, "N", lt.Ns);
    fetch(t, "threshold", lt.threshold);
    fetch(t, "samples-per-period", lt.samples_per_period);
    fetch(t, "q-max", lt.q_max);
    fetch(t, "max-subspace", lt.max_subspace);
    fetch(t, "step-tol", lt.step_tol);
    fetch(t, "dense-threshold", lt.dense_threshold);
    fetch(t, "output", lt.output);
    fetch(t, "summary", lt.summary);
  }

  SemiclassicalArgs sc;
  sc.model = model_defaults;
  {
    const auto* t = table(root, "semiclassical");
    fetch(t, "epsilon", sc.epsilon);
    fetch(t, "photons", sc.photons);
    fetch(t, "periods", sc.periods);
    fetch(t, "samples", sc.samples);
    fetch(t, "tol", sc.tol);
    fetch(t, "output", sc.output);
    fetch(t, "summary", sc.summary);
  }

  FloquetArgs fl;
  fl.model = model_defaults;
  {
    const auto* t = table(root, "floquet");
    fetch(t, "omega-d", fl.omega_d);
    fetch(t, "omega-0", fl.omega_0);
    fetch(t, "periods", fl.periods);
    fetch(t, "steps-per-period", fl.steps_per_period);
    fetch(t, "n-max", fl.n_max);
    fetch(t, "window-half", fl.window_half);
    fetch(t, "leak-tol", fl.leak_tol);
    fetch(t, "check-effective", fl.check_effective);
    fetch(t, "output", fl.output);
    fetch(t, "summary", fl.summary);
  }

  RouteArgs rt;
  rt.model = model_defaults;
  {
    const auto* t = table(root, "route");
    fetch(t, "f0", rt.f0);
    fetch(t, "sigma", rt.sigma);
    fetch(t, "omega", rt.omega);
    fetch(t, "r-in", rt.r_in);
    fetch(t, "r-out", rt.r_out);
    fetch(t, "cutoffs", rt.cutoffs);
    fetch(t, "t-final", rt.t_final);
    fetch(t, "dt", rt.dt);
    fetch(t, "step-tol", rt.step_tol);
    fetch(t, "leak-tol", rt.leak_tol);
    fetch(t, "floor-tol", rt.floor_tol);
    fetch(t, "output", rt.output);
    fetch(t, "summary", rt.summary);
  }

  CLI::App app{"three-cavity photon-lattice simulator"};
  app.set_version_flag("--version", code_version);
  app.require_subcommand(1);
  std::string config_echo;
  app.add_option("--config,-c", config_echo, "JSON configuration file");

  auto* s_sp = app.add_subcommand("spectrum", "sector eigensystem and boundary-band diagnostics");
  add_model_flags(s_sp, sp.model);
  add_pert_flags(s_sp, sp.pert);
  s_sp->add_option("--edge-fraction", sp.edge_fraction, "boundary-band <d>/N ceiling");
  s_sp->add_option("--band-fraction", sp.band_fraction, "boundary-band |E|/gap ceiling");
  s_sp->add_option("--circ-fraction", sp.circ_fraction, "bulk-onset circulation floor");
  s_sp->add_flag("--c3-blocks,!--no-c3-blocks", sp.c3_blocks, "diagonalize symmetry blocks");
  s_sp->add_flag("--circulation,!--no-circulation", sp.circulation, "per-state circulation");
  add_output_flags(s_sp, sp.output, sp.summary);

  auto* s_ch = app.add_subcommand("chern", "band Chern number over a splitting range");
  s_ch->add_option("--m-from", ch.m_from, "first splitting value");
  s_ch->add_option("--m-to", ch.m_to, "last splitting value");
  s_ch->add_option("--step", ch.step, "splitting increment");
  s_ch->add_option("--grid", ch.grid, "Brillouin-zone plaquettes per side");
  add_output_flags(s_ch, ch.output, ch.summary);

  auto* s_pm = app.add_subcommand("phase-map", "local gap and Chern marker across the occupation simplex");
  add_model_flags(s_pm, pm.model, true, false);
  s_pm->add_option("--resolution", pm.resolution, "simplex samples per side");
  s_pm->add_option("--grid", pm.grid, "Brillouin-zone plaquettes per side");
  s_pm->add_option("--threads", pm.threads, "worker threads");
  add_output_flags(s_pm, pm.output, pm.summary);

  auto* s_ev = app.add_subcommand("evolve", "sector time evolution from a Fock start");
  add_model_flags(s_ev, ev.model);
  add_pert_flags(s_ev, ev.pert);
  s_ev->add_option("--start", ev.start, "initial occupations n1,n2,n3")->delimiter(',');
  s_ev->add_option("--qubit", ev.qubit, "initial qubit: plus-x, up, down");
  s_ev->add_option("--t-final", ev.t_final, "evolution time (default two periods)");
  s_ev->add_option("--samples", ev.samples, "output intervals");
  s_ev->add_flag("--circulation,!--no-circulation", ev.circulation, "track circulation");
  s_ev->add_option("--max-subspace", ev.max_subspace, "Krylov subspace cap");
  s_ev->add_option("--step-tol", ev.step_tol, "propagator step tolerance");
  s_ev->add_option("--dense-threshold", ev.dense_threshold, "dense propagator cutoff");
  add_output_flags(s_ev, ev.output, ev.summary);

  auto* s_co = app.add_subcommand("coherent", "coherent-state evolution mixed over sectors");
  add_model_flags(s_co, co.model, false, false);
  s_co->add_option("--nbar", co.nbar, "mean photon number");
  s_co->add_option("--tail-tol", co.tail_tol, "omitted Poisson mass");
  s_co->add_option("--qubit", co.qubit, "initial qubit: plus-x, up, down");
  s_co->add_option("--t-final", co.t_final, "evolution time (default one period)");
  s_co->add_option("--samples", co.samples, "output intervals");
  s_co->add_option("--max-subspace", co.max_subspace, "Krylov subspace cap");
  s_co->add_option("--step-tol", co.step_tol, "propagator step tolerance");
  s_co->add_option("--dense-threshold", co.dense_threshold, "dense propagator cutoff");
  s_co->add_option("--threads", co.threads, "worker threads");
  add_output_flags(s_co, co.output, co.summary);

  auto* s_lt = app.add_subcommand("lifetime", "disorder-averaged revival lifetime scaling");
  s_lt->add_option("--g", lt.model.g, "hopping coupling strength");
  s_lt->add_option("--kind", lt.kind, "disorder kind");
  s_lt->add_option("--delta", lt.strength, "disorder half-width");
  s_lt->add_option("--seed", lt.seed, "base seed (realization r uses stream r)");
  s_lt->add_option("--realizations", lt.realizations, "disorder draws per N");
  s_lt->add_option("--N", lt.Ns, "sector sizes, comma-separated")->delimiter(',');
  s_lt->add_option("--threshold", lt.threshold, "alive while peak/N stays above");
  s_lt->add_option("--samples-per-period", lt.samples_per_period, "revival sampling density");
  s_lt->add_option("--q-max", lt.q_max, "revival windows (0: per-kind heuristic)");
  s_lt->add_option("--max-subspace", lt.max_subspace, "Krylov subspace cap");
  s_lt->add_option("--step-tol", lt.step_tol, "propagator step tolerance");
  s_lt->add_option("--dense-threshold", lt.dense_threshold, "dense propagator cutoff");
  s_lt->add_option("--threads", lt.threads, "worker threads");
  add_output_flags(s_lt, lt.output, lt.summary);

  auto* s_sc = app.add_subcommand("semiclassical", "classical circulating orbit from the fixed point");
  s_sc->add_option("--g", sc.model.g, "hopping coupling strength");
  s_sc->add_option("--epsilon", sc.epsilon, "detuning parameter");
  s_sc->add_option("--photons", sc.photons, "total photon number (classical)");
  s_sc->add_option("--periods", sc.periods, "orbit periods to integrate");
  s_sc->add_option("--samples", sc.samples, "output intervals");
  s_sc->add_option("--tol", sc.tol, "integrator tolerance");
  add_output_flags(s_sc, sc.output, sc.summary);

  auto* s_fl = app.add_subcommand("floquet", "stroboscopic lab-frame drive against the static target");
  s_fl->add_option("--N", fl.model.N, "photon-number sector");
  s_fl->add_option("--g", fl.model.g, "target coupling strength");
  s_fl->add_option("--omega-d", fl.omega_d, "drive frequency (default 5000 |g|)");
  s_fl->add_option("--omega-0", fl.omega_0, "cavity frequency (default 200 |g|)");
  s_fl->add_option("--periods", fl.periods, "drive periods to sample");
  s_fl->add_option("--steps-per-period", fl.steps_per_period, "integrator steps per period");
  s_fl->add_option("--n-max", fl.n_max, "per-mode cutoff (-1: N + 4)");
  s_fl->add_option("--window-half", fl.window_half, "total-photon window half-width");
  s_fl->add_option("--leak-tol", fl.leak_tol, "truncation leakage ceiling");
  s_fl->add_flag("--check-effective,!--no-check-effective", fl.check_effective,
                 "compare the effective Hamiltonian entrywise (N <= 12)");
  add_output_flags(s_fl, fl.output, fl.summary);

  auto* s_rt = app.add_subcommand("route", "pulsed non-reciprocal routing into chiral detectors");
  s_rt->add_option("--g", rt.model.g, "hopping coupling strength");
  s_rt->add_option("--f0", rt.f0, "pulse weight (deposits f0^2/4 photons)");
  s_rt->add_option("--sigma", rt.sigma, "pulse width");
  s_rt->add_option("--omega", rt.omega, "common mode frequency");
  s_rt->add_option("--r-in", rt.r_in, "detector back-coupling");
  s_rt->add_option("--r-out", rt.r_out, "cavity-to-detector coupling");
  s_rt->add_option("--cutoffs", rt.cutoffs, "five per-mode cutoffs")->delimiter(',');
  s_rt->add_option("--t-final", rt.t_final, "evolution time (default 0.75 periods)");
  s_rt->add_option("--dt", rt.dt, "output sample spacing");
  s_rt->add_option("--step-tol", rt.step_tol, "integrator relative tolerance");
  s_rt->add_option("--leak-tol", rt.leak_tol, "core truncation leakage ceiling");
  s_rt->add_option("--floor-tol", rt.floor_tol, "imbalance denominator floor");
  add_output_flags(s_rt, rt.output, rt.summary);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ev.n_given = s_ev->count("--N") > 0 ||
               (table(root, "model") && table(root, "model")->contains("N"));

  if (s_sp->parsed()) run_spectrum(sp);
  if (s_ch->parsed()) run_chern(ch);
  if (s_pm->parsed()) run_phase_map(pm, root);
  if (s_ev->parsed()) run_evolve(ev);
  if (s_co->parsed()) run_coherent(co, root);
  if (s_lt->parsed()) run_lifetime(lt, root);
  if (s_sc->parsed()) run_semiclassical(sc);
  if (s_fl->parsed()) run_floquet(fl);
  if (s_rt->parsed()) run_route(rt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
