#include "cofmat/cli.hpp"

#include "cofmat/blockops.hpp"
#include "cofmat/damped.hpp"
#include "cofmat/diagnostics.hpp"
#include "cofmat/discrete.hpp"
#include "cofmat/error.hpp"
#include "cofmat/funcalc.hpp"
#include "cofmat/ibvp.hpp"
#include "cofmat/io.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace cofmat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Command c) {
  switch (c) {
    case Command::verify: return "verify";
    case Command::simulate: return "simulate";
    case Command::spectrum: return "spectrum";
    case Command::sweep: return "sweep";
    case Command::emit: return "emit";
  }
  return "?";
}

namespace {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config

struct Config {
  std::string instance;
  bool all_checks = false;
  std::set<std::string> checks;
  std::vector<Index> meshes;
  bool meshes_given = false;
  std::uint64_t seed = 1;
  double t_end = 5.0;
  int samples = 100;

  Cenn2Params cenn2;
  std::optional<double> cenn2_lambda;
  StromParams strom;
  int compl_dim = 1;
  Index compl_n = 16;
  Index cs2_n = 16;
  double cs2_eps = 1.0;
  fs::path custom_system;

  std::map<std::string, double> tol{
      {"coupling", 1e-8},     {"oracle", 1e-7},     {"energy", 1e-6},
      {"similarity", 1e-10},  {"lambda", 1e-8},     {"parabola_stability", 0.2},
      {"residual", 1e-5},     {"functional", 1e-9}, {"sector_bound", kSectorBound},
      {"uniform_ratio", kUniformRatio},
  };

  Index primary_n() const {
    if (instance == "cenn2") return cenn2.n;
    if (instance == "strom") return strom.n;
    if (instance == "compl") return compl_n;
    if (instance == "cs2") return cs2_n;
    return 0;
  }
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_number(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(key + ": '" + text + "' is not a finite number");
  }
  return v;
}

long long parse_integer(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(key + ": '" + text + "' is not an integer");
  }
  return v;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& key, std::size_t want) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number(item, key));
  if (want != 0 && out.size() != want) {
    throw ParseError(key + ": expected " + std::to_string(want) + " values, got " + std::to_string(out.size()));
  }
  return out;
}

Index parse_mesh(const std::string& text, const std::string& key) {
  const long long n = parse_integer(text, key);
  if (n < 2 || n > 4096) throw ParseError(key + ": mesh size must lie in [2, 4096]");
  return static_cast<Index>(n);
}

Config parse_config(const fs::path& path) {
  if (!fs::exists(path)) throw ParseError("config file not found: " + path.string());
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> known{
      {"run", {"instance", "checks", "check", "meshes", "seed", "T", "samples", "n"}},
      {"cenn2", {"dim", "n", "beta", "btil", "lambda"}},
      {"strom", {"n", "mu", "p", "bc2"}},
      {"compl", {"dim", "n"}},
      {"cs2", {"n", "eps"}},
      {"custom", {"system"}},
      {"tolerances", {}},
  };
  Config cfg;
  for (const auto& [section, body] : pt) {
    const auto it = known.find(section);
    if (it == known.end()) {
      if (body.empty()) throw ParseError("config: key '" + section + "' outside a [section]");
      throw ParseError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (section == "tolerances") {
        if (!cfg.tol.count(key)) throw ParseError("config: unknown tolerance '" + key + "'");
        const double v = parse_number(value.data(), "tolerances." + key);
        if (!(v > 0.0)) throw ParseError("tolerances." + key + " must be positive");
        cfg.tol[key] = v;
      } else if (!it->second.count(key)) {
        throw ParseError("config: unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
  auto get = [&](const std::string& dotted) -> std::optional<std::string> {
    if (auto v = pt.get_optional<std::string>(boost::property_tree::ptree::path_type(dotted, '.'))) return trim(*v);
    return std::nullopt;
  };

  const auto instance = get("run.instance");
  if (!instance) throw ParseError("config: [run] instance is required");
  cfg.instance = *instance;
  static const std::set<std::string> instances{"cenn2", "strom", "compl", "cs2", "custom"};
  if (!instances.count(cfg.instance)) throw ParseError("config: unknown instance '" + cfg.instance + "'");

  const auto checks = get("run.checks") ? get("run.checks") : get("run.check");
  if (get("run.checks") && get("run.check")) throw ParseError("config: give either checks or check, not both");
  if (!checks) {
    cfg.all_checks = true;
  } else {
    for (const auto& c : split_list(*checks)) {
      if (c == "all") cfg.all_checks = true;
      else cfg.checks.insert(c);
    }
  }
  if (auto v = get("run.seed")) {
    const long long s = parse_integer(*v, "run.seed");
    if (s < 0) throw ParseError("run.seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("run.T")) {
    cfg.t_end = parse_number(*v, "run.T");
    if (!(cfg.t_end > 0.0)) throw ParseError("run.T must be positive");
  }
  if (auto v = get("run.samples")) {
    const long long s = parse_integer(*v, "run.samples");
    if (s < 1 || s > 100000) throw ParseError("run.samples must lie in [1, 100000]");
    cfg.samples = static_cast<int>(s);
  }
  std::optional<Index> run_n;
  if (auto v = get("run.n")) run_n = parse_mesh(*v, "run.n");

  auto section_n = [&](const std::string& sec, Index fallback) {
    if (auto v = get(sec + ".n")) return parse_mesh(*v, sec + ".n");
    return run_n.value_or(fallback);
  };
  auto dim_of = [&](const std::string& sec) {
    if (auto v = get(sec + ".dim")) {
      const long long d = parse_integer(*v, sec + ".dim");
      if (d != 1 && d != 2) throw ParseError(sec + ".dim must be 1 or 2");
      return static_cast<int>(d);
    }
    return 1;
  };

  cfg.cenn2.dim = dim_of("cenn2");
  cfg.cenn2.n = section_n("cenn2", 16);
  if (auto v = get("cenn2.beta")) cfg.cenn2.beta = parse_number(*v, "cenn2.beta");
  if (auto v = get("cenn2.lambda")) cfg.cenn2_lambda = parse_number(*v, "cenn2.lambda");
  if (auto v = get("cenn2.btil")) {
    const Index nb = Mesh::make(cfg.cenn2.dim, cfg.cenn2.n).boundary_count();
    const auto vals = parse_numbers(*v, "cenn2.btil", static_cast<std::size_t>(nb * nb));
    Matrix b(nb, nb);
    for (Index i = 0; i < nb; ++i)
      for (Index j = 0; j < nb; ++j) b(i, j) = vals[static_cast<std::size_t>(i * nb + j)];
    cfg.cenn2.btil = b;
  }

  cfg.strom.n = section_n("strom", 8);
  if (auto v = get("strom.mu")) {
    const auto mu = parse_numbers(*v, "strom.mu", 3);
    cfg.strom.mu1 = mu[0];
    cfg.strom.mu2 = mu[1];
    cfg.strom.mu3 = mu[2];
  }
  if (auto v = get("strom.p")) {
    const auto p = parse_numbers(*v, "strom.p", 4);
    cfg.strom.p1 = p[0];
    cfg.strom.p2 = p[1];
    cfg.strom.p3 = p[2];
    cfg.strom.p4 = p[3];
  }
  if (auto v = get("strom.bc2")) {
    try {
      cfg.strom.bc2 = parse_bc(*v);
    } catch (const Error& e) {
      throw ParseError(std::string("strom.bc2: ") + e.what());
    }
  }

  cfg.compl_dim = dim_of("compl");
  cfg.compl_n = section_n("compl", 16);
  cfg.cs2_n = section_n("cs2", 16);
  if (auto v = get("cs2.eps")) cfg.cs2_eps = parse_number(*v, "cs2.eps");

  if (auto v = get("custom.system")) {
    fs::path p = *v;
    if (p.is_relative()) p = path.parent_path() / p;
    cfg.custom_system = p;
  } else if (cfg.instance == "custom") {
    throw ParseError("config: [custom] system is required for the custom instance");
  }

  if (auto v = get("run.meshes")) {
    for (const auto& item : split_list(*v)) cfg.meshes.push_back(parse_mesh(item, "run.meshes"));
    if (cfg.meshes.empty()) throw ParseError("run.meshes is empty");
    cfg.meshes_given = true;
  } else {
    cfg.meshes = {cfg.primary_n()};
  }
  return cfg;
}

// ---------------------------------------------------------------- run context

unsigned thread_budget() {
  if (const char* env = std::getenv("COFMAT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// fn(k) for k < count on up to thread_budget() threads; rethrows the first failure.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, thread_budget());
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t k = 0;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= count || failure) return;
          k = next++;
        }
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

using Row = std::vector<double>;

class Context {
 public:
  Context(const Config& cfg, const Options& opts) : cfg_(cfg), opts_(opts) {}

  const Config& cfg() const { return cfg_; }
  double tol(const std::string& key) const { return cfg_.tol.at(key); }
  std::mt19937_64 rng(std::uint64_t salt = 0) const { return std::mt19937_64(cfg_.seed * 1000003u + salt); }

  bool wanted(const std::string& name) const { return cfg_.all_checks || cfg_.checks.count(name) > 0; }

  /// Runs a named check when selected; exceptions become FAIL verdicts.
  void check(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    if (!wanted(name)) return;
    try {
      const auto [pass, detail] = fn();
      record(name, pass, detail);
    } catch (const std::exception& e) {
      record(name, false, std::string("error: ") + e.what());
    }
  }

  /// Produces output files; a failure is reported as a FAIL verdict on `name`.
  void step(const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      const std::string msg = std::string("error: ") + e.what();
      if (wanted(name)) record(name, false, msg);
      else errors_.push_back(name + ": " + msg);
    }
  }

  void write_csv(const std::string& file, const std::vector<std::string>& header, const std::vector<Row>& rows) {
    std::string s;
    for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
    s += "\n";
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) s += (k ? "," : "") + io::format_double(r[k]);
      s += "\n";
    }
    write_text(file, s);
  }

  void write_text(const std::string& file, const std::string& content) {
    io::write_file_atomic(opts_.out / file, content);
    add_output(opts_.out / file);
  }

  void add_output(const fs::path& p) {
    if (std::find(outputs_.begin(), outputs_.end(), p) == outputs_.end()) outputs_.push_back(p);
  }

  const fs::path& out_dir() const { return opts_.out; }
  const std::vector<fs::path>& outputs() const { return outputs_; }
  const std::map<std::string, bool>& verdicts() const { return verdicts_; }
  const std::map<std::string, std::string>& details() const { return details_; }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  void record(const std::string& name, bool pass, const std::string& detail) {
    // a name may be reported by several steps; any FAIL sticks
    const auto it = verdicts_.find(name);
    if (it != verdicts_.end() && !it->second) return;
    verdicts_[name] = pass;
    details_[name] = detail;
  }

  const Config& cfg_;
  const Options& opts_;
  std::vector<fs::path> outputs_;
  std::map<std::string, bool> verdicts_;
  std::map<std::string, std::string> details_;
  std::vector<std::string> errors_;
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(3) << x;
  return os.str();
}

std::pair<bool, std::string> at_most(double value, double bound, const std::string& what) {
  return {value <= bound, what + " = " + fmt(value) + " (bound " + fmt(bound) + ")"};
}

Row trajectory_row(double t, const Vector& u, const Vector& v, const Row& extra) {
  Row r{t};
  r.insert(r.end(), u.data(), u.data() + u.size());
  r.insert(r.end(), v.data(), v.data() + v.size());
  r.insert(r.end(), extra.begin(), extra.end());
  return r;
}

std::vector<std::string> trajectory_header(Index n, const std::vector<std::string>& extra) {
  std::vector<std::string> h{"t"};
  for (Index k = 0; k < n; ++k) h.push_back("u" + std::to_string(k));
  for (Index k = 0; k < n; ++k) h.push_back("v" + std::to_string(k));
  h.insert(h.end(), extra.begin(), extra.end());
  return h;
}

std::vector<std::string> sorted_keys(const std::map<std::string, double>& m) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : m) keys.push_back(k);
  return keys;
}

// ---------------------------------------------------------------- spectra

struct MeshFit {
  Index n = 0;
  ParabolaFit fit;
};

void write_spectrum(Context& ctx, const std::string& stem, const CVector& ev) {
  std::vector<Row> rows;
  for (Index k = 0; k < ev.size(); ++k) rows.push_back({ev(k).real(), ev(k).imag()});
  ctx.write_csv(stem + "_spectrum.csv", {"re", "im"}, rows);
}

double relative_spread(const std::vector<double>& xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (std::isinf(*lo) && std::isinf(*hi) && *lo == *hi) return 0.0;
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  return scale > 0.0 ? (*hi - *lo) / scale : 0.0;
}

/// Eigenvalues and parabola per mesh, the fit table and the "parabola" verdict.
void parabola_suite(Context& ctx, const std::string& instance, const std::function<Matrix(Index)>& generator) {
  const auto& meshes = ctx.cfg().meshes;
  std::vector<MeshFit> fits(meshes.size());
  std::vector<CVector> spectra(meshes.size());
  bool ok = false;
  ctx.step("parabola", [&] {
    parallel_for(meshes.size(), [&](std::size_t k) {
      spectra[k] = eigenvalues(generator(meshes[k]));
      fits[k] = {meshes[k], parabola_fit(spectra[k])};
    });
    std::vector<Row> rows;
    for (std::size_t k = 0; k < meshes.size(); ++k) {
      write_spectrum(ctx, meshes[k] > 0 ? instance + "_n" + std::to_string(meshes[k]) : instance, spectra[k]);
      const auto& f = fits[k].fit;
      rows.push_back({static_cast<double>(meshes[k]), f.omega, f.c, f.margin, f.real_spectrum ? 1.0 : 0.0,
                      f.pass ? 1.0 : 0.0});
    }
    ctx.write_csv(instance + "_parabola.csv", {"n", "omega", "c", "margin", "real_spectrum", "pass"}, rows);
    ok = true;
  });
  ctx.check("parabola", [&]() -> std::pair<bool, std::string> {
    if (!ok) throw std::runtime_error("spectra unavailable");
    bool pass = true;
    std::vector<double> omegas, cs;
    for (const auto& f : fits) {
      pass = pass && f.fit.pass;
      omegas.push_back(f.fit.omega);
      cs.push_back(f.fit.c);
    }
    std::string detail = "omega = " + fmt(omegas.front()) + ", c = " + fmt(cs.front());
    if (fits.size() > 1) {
      const double spread = std::max(relative_spread(omegas), relative_spread(cs));
      pass = pass && spread <= ctx.tol("parabola_stability");
      detail += "; spread across meshes " + fmt(spread);
    }
    return {pass, detail};
  });
}

// ---------------------------------------------------------------- cenn2

struct Cenn2Setup {
  Cenn2 inst;
  CoupledMatrix cm;
};

Cenn2Setup cenn2_setup(const Config& cfg, Index n) {
  Cenn2Params p = cfg.cenn2;
  p.n = n;
  if (p.btil && n != cfg.cenn2.n) p.btil.reset();  // an explicit B̃ belongs to the configured mesh
  Cenn2 inst = cenn2_instance(p);
  const double lam = cfg.cenn2_lambda ? *cfg.cenn2_lambda : default_lambda(inst.triple);
  CoupledMatrix cm = assemble_coupled(inst.triple, inst.b, inst.btil, lam);
  return {std::move(inst), std::move(cm)};
}

struct InitialData {
  Vector f, g, h, j;
};

/// A few smooth modes with seeded amplitudes.
Vector smooth_modes(const Matrix& xy, std::mt19937_64& rng, bool cosine) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  Vector v = Vector::Zero(xy.rows());
  for (int k = 1; k <= 3; ++k) {
    const double a = amp(rng);
    for (Index i = 0; i < xy.rows(); ++i) {
      double m = 1.0;
      for (Index d = 0; d < xy.cols(); ++d) {
        const double arg = k * std::numbers::pi * xy(i, d);
        m *= cosine ? std::cos(arg) : std::sin(arg);
      }
      v(i) += a * m;
    }
  }
  return v;
}

InitialData cenn2_data(const Context& ctx, const Cenn2& c) {
  auto rng = ctx.rng(1);
  const Matrix xy = interior_coordinates(c.mesh);
  const Index nb = c.triple.boundary();
  InitialData d;
  d.f = smooth_modes(xy, rng, true);
  d.g = smooth_modes(xy, rng, true);
  d.h = random_matrix(nb, 1, rng);
  d.j = random_matrix(nb, 1, rng);
  return d;
}

void cenn2_simulate(Context& ctx) {
  const Config& cfg = ctx.cfg();
  std::optional<DynamicBcRun> run;
  std::optional<Trajectory> oracle;
  ctx.step("coupling", [&] {
    const Cenn2Setup s = cenn2_setup(cfg, cfg.cenn2.n);
    const InitialData d = cenn2_data(ctx, s.inst);
    run = simulate_dynamic_bc(s.inst.triple, s.cm, d.f, d.g, d.h, d.j, cfg.t_end, cfg.samples, ctx.tol("coupling"));
    if (ctx.wanted("oracle")) {
      oracle = simulate_reduction_oracle(coupled_direct(s.inst.triple, s.inst.b, s.inst.btil), d.f, d.g, d.h, d.j,
                                         cfg.t_end, cfg.samples);
    }
    std::vector<Row> rows;
    for (std::size_t k = 0; k < run->traj.size(); ++k) {
      double gap = std::numeric_limits<double>::quiet_NaN();
      if (oracle) {
        gap = std::max((run->traj.u[k] - oracle->u[k]).cwiseAbs().maxCoeff(),
                       (run->traj.v[k] - oracle->v[k]).cwiseAbs().maxCoeff());
      }
      rows.push_back(trajectory_row(run->traj.t[k], run->traj.u[k], run->traj.v[k], {run->coupling[k], gap}));
    }
    ctx.write_csv("cenn2_trajectory.csv", trajectory_header(s.cm.atil.rows(), {"coupling", "oracle_gap"}), rows);
  });
  ctx.check("coupling", [&] {
    if (!run) throw std::runtime_error("simulation unavailable");
    return at_most(run->max_coupling, ctx.tol("coupling"), "max relative coupling residual");
  });
  ctx.check("oracle", [&] {
    if (!run || !oracle) throw std::runtime_error("simulation unavailable");
    double gap = 0.0;
    for (std::size_t k = 0; k < run->traj.size(); ++k) {
      gap = std::max(gap, (run->traj.u[k] - oracle->u[k]).cwiseAbs().maxCoeff());
      gap = std::max(gap, (run->traj.v[k] - oracle->v[k]).cwiseAbs().maxCoeff());
    }
    return at_most(gap, ctx.tol("oracle"), "max deviation from the reduction exponential");
  });
  // decoupled boundary (B = 0): ½(‖ẇ‖² − ⟨B̃w, w⟩) in ∂X is conserved
  ctx.check("energy", [&] {
    Cenn2Params p = cfg.cenn2;
    p.beta = 0.0;
    const Cenn2 inst = cenn2_instance(p);
    const double lam = cfg.cenn2_lambda ? *cfg.cenn2_lambda : default_lambda(inst.triple);
    const CoupledMatrix cm = assemble_coupled(inst.triple, inst.b, inst.btil, lam);
    const InitialData d = cenn2_data(ctx, inst);
    const DynamicBcRun r = simulate_dynamic_bc(inst.triple, cm, d.f, d.g, d.h, d.j, cfg.t_end, cfg.samples);
    const Index nb = inst.triple.boundary();
    const GradedSpace& dx = inst.triple.dx;
    std::vector<Row> rows;
    double e0 = 0.0, drift = 0.0;
    for (std::size_t k = 0; k < r.traj.size(); ++k) {
      const Vector w = r.traj.u[k].tail(nb);
      const Vector wd = r.traj.v[k].tail(nb);
      const double e = 0.5 * (dx.norm_squared(wd) - dx.inner(inst.btil * w, w));
      if (k == 0) e0 = e;
      drift = std::max(drift, std::abs(e - e0));
      rows.push_back({r.traj.t[k], e});
    }
    ctx.write_csv("cenn2_boundary_energy.csv", {"t", "energy"}, rows);
    return at_most(e0 > 0.0 ? drift / e0 : drift, ctx.tol("energy"), "relative boundary energy drift (B = 0)");
  });
}

void cenn2_verify(Context& ctx) {
  const Config& cfg = ctx.cfg();
  ctx.check("similarity", [&] {
    double worst = 0.0;
    for (Index n : cfg.meshes) {
      const Cenn2Setup s = cenn2_setup(cfg, n);
      worst = std::max(worst, similarity_residual(s.cm) / std::max(1.0, s.cm.alam.cwiseAbs().maxCoeff()));
    }
    return at_most(worst, ctx.tol("similarity"), "relative similarity residual");
  });
  ctx.check("lambda_independence", [&] {
    double worst = 0.0;
    for (Index n : cfg.meshes) {
      const Cenn2Setup s = cenn2_setup(cfg, n);
      const CoupledMatrix other = assemble_coupled(s.inst.triple, s.inst.b, s.inst.btil, s.cm.lambda + 1.0);
      const Matrix direct = coupled_direct(s.inst.triple, s.inst.b, s.inst.btil);
      const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
      worst = std::max(worst, (s.cm.atil - other.atil).cwiseAbs().maxCoeff() / scale);
      worst = std::max(worst, (s.cm.atil - direct).cwiseAbs().maxCoeff() / scale);
    }
    return at_most(worst, ctx.tol("lambda"), "relative change of the coupled matrix across shifts");
  });
  cenn2_simulate(ctx);
  parabola_suite(ctx, "cenn2", [&](Index n) { return cenn2_setup(cfg, n).cm.atil; });
}

// ---------------------------------------------------------------- block systems

/// Either hypothesis of the perturbation result suffices for each coupling.
std::pair<bool, std::string> certificates_uniform(const std::vector<Index>& meshes,
                                                  const std::vector<BlockSystem>& systems, double ratio) {
  std::map<std::string, std::vector<double>> series;
  for (const auto& sys : systems)
    for (const auto& [name, v] : sys.certificates) series[name].push_back(v);
  std::map<std::string, bool> uniform;
  for (const auto& [name, vals] : series) {
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const bool finite = std::all_of(vals.begin(), vals.end(), [](double v) { return std::isfinite(v); });
    bool ok = finite;
    if (ok && meshes.size() > 1 && *hi > 0.0) {
      std::vector<double> h;
      for (std::size_t k = 0; k < meshes.size(); ++k) h.push_back(1.0 / static_cast<double>(meshes[k] + 1));
      ok = *lo > 0.0 && *hi / *lo <= ratio && loglog_slope(h, vals) > kGrowthRate;
    }
    uniform[name] = ok;
  }
  bool pass = true;
  std::string detail;
  for (const auto& [name, ok] : uniform) {
    const std::string prefix = name.rfind("step", 0) == 0 ? name.substr(0, name.find(':') + 1) : "";
    const std::string base = name.substr(prefix.size());
    if (base == "H:[D(D)]->V" || base == "K:[D(A)]->W") {
      const std::string alt = prefix + (base[0] == 'H' ? "H:W->X" : "K:V->Y");
      const bool either = ok || (uniform.count(alt) && uniform.at(alt));
      pass = pass && either;
      detail += (detail.empty() ? "" : "; ") + prefix + base.substr(0, 1) + (either ? " bounded" : " unbounded");
    }
  }
  return {pass, detail};
}

void certificates_csv(Context& ctx, const std::string& instance, const std::vector<Index>& meshes,
                      const std::vector<BlockSystem>& systems) {
  std::vector<std::string> header{"n", "h"};
  const auto names = sorted_keys(systems.front().certificates);
  header.insert(header.end(), names.begin(), names.end());
  std::vector<Row> rows;
  for (std::size_t k = 0; k < meshes.size(); ++k) {
    Row r{static_cast<double>(meshes[k]), 1.0 / static_cast<double>(meshes[k] + 1)};
    for (const auto& nm : names) r.push_back(systems[k].certificates.at(nm));
    rows.push_back(r);
  }
  ctx.write_csv(instance + "_sweep.csv", header, rows);
}

/// Propagates seeded data with the cosine and sine families of `gen`.
Trajectory propagate(const Context& ctx, const Matrix& gen, std::uint64_t salt) {
  auto rng = ctx.rng(salt);
  const Index n = gen.rows();
  const Vector f = random_matrix(n, 1, rng);
  const Vector g = random_matrix(n, 1, rng);
  const CofPair pair(gen);
  Trajectory traj;
  for (int k = 0; k <= ctx.cfg().samples; ++k) {
    const double t = ctx.cfg().t_end * k / ctx.cfg().samples;
    const CofSof cs = pair.at(t);
    traj.t.push_back(t);
    traj.u.push_back(cs.cos * f + cs.sin * g);
    traj.v.push_back(gen * (cs.sin * f) + cs.cos * g);
  }
  return traj;
}

std::pair<bool, std::string> finite_trajectory(const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (!traj.u[k].allFinite() || !traj.v[k].allFinite()) return {false, "non-finite state at t = " + fmt(traj.t[k])};
  return {true, std::to_string(traj.size()) + " finite samples"};
}

void plain_simulate(Context& ctx, const std::string& instance, const Matrix& gen) {
  std::optional<Trajectory> traj;
  ctx.step("finite", [&] {
    traj = propagate(ctx, gen, 2);
    std::vector<Row> rows;
    for (std::size_t k = 0; k < traj->size(); ++k) rows.push_back(trajectory_row(traj->t[k], traj->u[k], traj->v[k], {}));
    ctx.write_csv(instance + "_trajectory.csv", trajectory_header(gen.rows(), {}), rows);
  });
  ctx.check("finite", [&] {
    if (!traj) throw std::runtime_error("simulation unavailable");
    return finite_trajectory(*traj);
  });
}

void cs2_simulate(Context& ctx) {
  const Config& cfg = ctx.cfg();
  ctx.check("energy", [&] {
    const BlockSystem sys = cs2_assemble(cfg.cs2_n, cfg.cs2_eps);
    const SquareRoot root = sqrt_neg_half(sys.assembled, sys.phase.base);
    const Trajectory traj = propagate(ctx, sys.assembled, 3);
    const auto e = energy_trace(traj, root.kisynski, sys.phase.base);
    const auto ep = energy_trace(traj, sys.phase.kisynski, sys.phase.base);
    std::vector<Row> rows;
    double drift = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      drift = std::max(drift, std::abs(e[k] - e.front()));
      rows.push_back(trajectory_row(traj.t[k], traj.u[k], traj.v[k], {e[k], ep[k]}));
    }
    ctx.write_csv("cs2_trajectory.csv", trajectory_header(sys.size(), {"energy", "product_energy"}), rows);
    return at_most(drift / e.front(), ctx.tol("energy"), "relative energy drift");
  });
}

void cs2_verify(Context& ctx) {
  const Config& cfg = ctx.cfg();
  ctx.check("symmetric", [&]() -> std::pair<bool, std::string> {
    const BlockSystem sys = cs2_assemble(cfg.cs2_n, cfg.cs2_eps);
    const bool sym = is_symmetric(sys.assembled);
    const double top = symmetric_eigenvalues(sys.assembled).maxCoeff();
    return {sym && top < 0.0, std::string(sym ? "symmetric" : "not symmetric") + ", max eigenvalue " + fmt(top)};
  });
  cs2_simulate(ctx);
  parabola_suite(ctx, "cs2", [&](Index n) { return cs2_assemble(n, cfg.cs2_eps).assembled; });
}

StromParams strom_at(const Config& cfg, Index n) {
  StromParams p = cfg.strom;
  p.n = n;
  return p;
}

void strom_verify(Context& ctx) {
  const Config& cfg = ctx.cfg();
  ctx.check("form_positivity", [&]() -> std::pair<bool, std::string> {
    const Matrix a1 = strom_assemble(strom_at(cfg, cfg.strom.n)).block(0, 0);
    const double top = symmetric_eigenvalues(a1).maxCoeff();
    const double scale = a1.cwiseAbs().maxCoeff();
    return {is_symmetric(a1) && top <= 1e-10 * scale, "max eigenvalue of A1 " + fmt(top)};
  });
  ctx.check("certificates", [&]() -> std::pair<bool, std::string> {
    const BlockSystem sys = strom_assemble(strom_at(cfg, cfg.strom.n));
    for (const auto& [name, v] : sys.certificates)
      if (!std::isfinite(v)) return {false, name + " is not finite"};
    return {true, std::to_string(sys.certificates.size()) + " finite certificates"};
  });
  parabola_suite(ctx, "strom", [&](Index n) { return strom_assemble(strom_at(cfg, n)).assembled; });
}

// ---------------------------------------------------------------- compl

Vector sine_modes(const Matrix& xy, std::mt19937_64& rng) { return smooth_modes(xy, rng, false); }

void compl_simulate(Context& ctx) {
  const Config& cfg = ctx.cfg();
  std::optional<DampedRun> run;
  std::vector<double> energy;
  ctx.step("energy", [&] {
    const CompleteProblem p = compl_instance(cfg.compl_dim, cfg.compl_n);
    const Matrix xy = interior_coordinates(Mesh::make(cfg.compl_dim, cfg.compl_n));
    auto rng = ctx.rng(4);
    const Vector f = sine_modes(xy, rng);
    const Vector g = sine_modes(xy, rng);
    run = overdamped_simulate(p, f, g, cfg.t_end, cfg.samples);
    energy = damped_energy(p, run->traj);
    std::vector<Row> rows;
    for (std::size_t k = 0; k < run->traj.size(); ++k)
      rows.push_back(trajectory_row(run->traj.t[k], run->traj.u[k], run->traj.v[k], {run->state_norms[k], energy[k]}));
    ctx.write_csv("compl_trajectory.csv", trajectory_header(p.a.rows(), {"state_norm", "energy"}), rows);
  });
  ctx.check("energy", [&] {
    if (!run) throw std::runtime_error("simulation unavailable");
    double rise = 0.0;
    for (std::size_t k = 1; k < energy.size(); ++k) rise = std::max(rise, energy[k] - energy[k - 1]);
    return at_most(energy.front() > 0.0 ? rise / energy.front() : rise, ctx.tol("energy"),
                   "largest relative energy increase");
  });
  ctx.check("residual", [&] {
    if (!run) throw std::runtime_error("simulation unavailable");
    return at_most(run->residual, ctx.tol("residual"), "relative residual of the damped equation");
  });
  ctx.check("dissipation", [&]() -> std::pair<bool, std::string> {
    if (!run) throw std::runtime_error("simulation unavailable");
    const auto& s = run->state_norms;
    const bool bounded = std::all_of(s.begin(), s.end(), [&](double x) { return std::isfinite(x) && x <= s.front() * (1 + 1e-12); });
    return {bounded && s.back() < s.front(), "state norm " + fmt(s.front()) + " -> " + fmt(s.back())};
  });
}

void compl_spectrum(Context& ctx) {
  const Config& cfg = ctx.cfg();
  parabola_suite(ctx, "compl", [&](Index n) { return compl_instance(cfg.compl_dim, n).reduction; });
  ctx.check("overdamped", [&]() -> std::pair<bool, std::string> {
    double worst = 0.0;
    bool left = true;
    for (Index n : cfg.meshes) {
      const CVector ev = eigenvalues(compl_instance(cfg.compl_dim, n).reduction);
      for (Index k = 0; k < ev.size(); ++k) left = left && ev(k).real() < 0.0;
      worst = std::max(worst, spectral_half_angle(ev));
    }
    return {left && worst < std::numbers::pi / 2, "spectral half-angle " + fmt(worst)};
  });
  ctx.check("sector", [&]() -> std::pair<bool, std::string> {
    const CompleteProblem p = compl_instance(cfg.compl_dim, cfg.compl_n);
    const SectorTable t = sector_probe(p.reduction, 0.0, default_sector_angles(), default_sector_radii(), p.phase());
    std::vector<Row> rows;
    for (const auto& s : t.rows) rows.push_back({s.theta, s.r, s.value, s.pass ? 1.0 : 0.0});
    ctx.write_csv("compl_sector.csv", {"theta", "r", "value", "pass"}, rows);
    return {t.pass && t.max_value <= ctx.tol("sector_bound"), "max scaled resolvent norm " + fmt(t.max_value)};
  });
}

// ---------------------------------------------------------------- sweep

std::pair<bool, std::string> verdict_of(const RefinementTable& t, const std::string& want, double ratio) {
  const bool uniform = t.ratio <= ratio && t.rate > kGrowthRate;
  const std::string got = uniform ? "uniform" : "growing";
  return {got == want, got + " (ratio " + fmt(t.ratio) + ", rate " + fmt(t.rate) + ")"};
}

RefinementTable table_of(const std::vector<Index>& meshes, const std::vector<double>& norms) {
  RefinementTable t;
  t.meshes = meshes;
  for (Index n : meshes) t.h.push_back(1.0 / static_cast<double>(n + 1));
  t.norms = norms;
  const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
  t.ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  t.rate = *lo > 0.0 ? loglog_slope(t.h, norms) : 0.0;
  t.uniform = t.ratio <= kUniformRatio && t.rate > kGrowthRate;
  return t;
}

std::vector<Index> sweep_meshes(const Config& cfg) {
  if (cfg.meshes_given) {
    if (cfg.meshes.size() < 2) throw ParseError("sweep: run.meshes needs at least two entries");
    return cfg.meshes;
  }
  return {8, 16, 32, 64};
}

void cenn2_sweep(Context& ctx, const std::vector<Index>& meshes) {
  const Config& cfg = ctx.cfg();
  const std::size_t m = meshes.size();
  std::vector<double> b_v(m), b_graph(m), g_h1(m), g_l2(m);
  bool ok = false;
  ctx.step("boundedness", [&] {
    parallel_for(m, [&](std::size_t k) {
      Cenn2Params p = cfg.cenn2;
      p.n = meshes[k];
      p.btil.reset();
      const Cenn2 c = cenn2_instance(p);
      const BoundaryNorms bn = boundary_operator_norms(c.triple, c.b);
      b_v[k] = bn.y_to_dx;
      b_graph[k] = bn.da0_to_dy;
      const GradDiv gd = grad_div(c.mesh);
      g_h1[k] = op_norm(gd.grad.matrix, interior_h1(c.mesh), face_l2(c.mesh));
      g_l2[k] = op_norm(gd.grad.matrix, interior_l2(c.mesh), face_l2(c.mesh));
    });
    std::vector<Row> rows;
    for (std::size_t k = 0; k < m; ++k)
      rows.push_back({static_cast<double>(meshes[k]), 1.0 / static_cast<double>(meshes[k] + 1), b_v[k], b_graph[k],
                      g_h1[k], g_l2[k]});
    ctx.write_csv("cenn2_sweep.csv", {"n", "h", "B_V_to_dX", "BE0_graph_to_dY", "grad_H1_to_L2", "grad_L2_to_L2"},
                  rows);
    ok = true;
  });
  const double ratio = ctx.tol("uniform_ratio");
  auto need = [&] {
    if (!ok) throw std::runtime_error("sweep unavailable");
  };
  ctx.check("boundedness", [&] {
    need();
    return verdict_of(table_of(meshes, b_v), "uniform", ratio);
  });
  ctx.check("grad_h1", [&] {
    need();
    return verdict_of(table_of(meshes, g_h1), "uniform", ratio);
  });
  ctx.check("grad_l2_control", [&] {
    need();
    return verdict_of(table_of(meshes, g_l2), "growing", ratio);
  });
}

void system_sweep(Context& ctx, const std::string& instance, const std::vector<Index>& meshes,
                  const std::function<BlockSystem(Index)>& build) {
  std::vector<BlockSystem> systems(meshes.size());
  bool ok = false;
  ctx.step("boundedness", [&] {
    parallel_for(meshes.size(), [&](std::size_t k) { systems[k] = build(meshes[k]); });
    certificates_csv(ctx, instance, meshes, systems);
    ok = true;
  });
  ctx.check("boundedness", [&] {
    if (!ok) throw std::runtime_error("sweep unavailable");
    return certificates_uniform(meshes, systems, ctx.tol("uniform_ratio"));
  });
}

void compl_sweep(Context& ctx, const std::vector<Index>& meshes) {
  const Config& cfg = ctx.cfg();
  std::vector<double> a_norm(meshes.size()), sector(meshes.size());
  bool ok = false;
  ctx.step("boundedness", [&] {
    parallel_for(meshes.size(), [&](std::size_t k) {
      const CompleteProblem p = compl_instance(cfg.compl_dim, meshes[k]);
      a_norm[k] = p.a_norm;
      sector[k] = sector_probe(p.reduction, 0.0, default_sector_angles(), default_sector_radii(), p.phase()).max_value;
    });
    std::vector<Row> rows;
    for (std::size_t k = 0; k < meshes.size(); ++k)
      rows.push_back({static_cast<double>(meshes[k]), 1.0 / static_cast<double>(meshes[k] + 1), a_norm[k], sector[k]});
    ctx.write_csv("compl_sweep.csv", {"n", "h", "A_V_to_X", "sector_max"}, rows);
    ok = true;
  });
  ctx.check("boundedness", [&] {
    if (!ok) throw std::runtime_error("sweep unavailable");
    return verdict_of(table_of(meshes, a_norm), "uniform", ctx.tol("uniform_ratio"));
  });
  ctx.check("sector", [&] {
    if (!ok) throw std::runtime_error("sweep unavailable");
    auto r = verdict_of(table_of(meshes, sector), "uniform", ctx.tol("uniform_ratio"));
    const double top = *std::max_element(sector.begin(), sector.end());
    r.first = r.first && top <= ctx.tol("sector_bound");
    r.second += ", max " + fmt(top);
    return r;
  });
}

// ---------------------------------------------------------------- custom

Matrix custom_generator(const Config& cfg) {
  const io::LoadedSystem sys = io::load_block_system(cfg.custom_system);
  require_square(sys.assembled, "custom system");
  require_finite(sys.assembled, "custom system");
  return sys.assembled;
}

void custom_verify(Context& ctx, const Matrix& gen) {
  ctx.check("functional", [&] {
    const std::vector<double> ts{0.25, 0.5, 1.0}, ss{0.125, 0.25, 0.5};
    const double scale = std::max(1.0, cof_eval(gen, 1.0).cwiseAbs().maxCoeff());
    return at_most(functional_equation_residual(gen, ts, ss) / scale, ctx.tol("functional"),
                   "relative d'Alembert residual");
  });
}

// ---------------------------------------------------------------- emit

void emit_matrices(Context& ctx) {
  const Config& cfg = ctx.cfg();
  const std::string& inst = cfg.instance;
  ctx.step("emit", [&] {
    auto mtx = [&](const std::string& name, const Matrix& m) {
      ctx.write_text(inst + "_" + name + ".mtx", io::matrix_market(m));
    };
    auto system = [&](const BlockSystem& sys) {
      for (const auto& p : io::save_block_system(ctx.out_dir(), inst, sys)) ctx.add_output(p);
    };
    if (inst == "cenn2") {
      const Cenn2Setup s = cenn2_setup(cfg, cfg.cenn2.n);
      mtx("atil", s.cm.atil);
      mtx("amax", s.inst.triple.amax);
      mtx("l", s.inst.triple.l);
      mtx("b", s.inst.b);
      mtx("btil", s.inst.btil);
      mtx("dlam", s.cm.dlam);
    } else if (inst == "strom") {
      system(strom_assemble(cfg.strom));
    } else if (inst == "cs2") {
      system(cs2_assemble(cfg.cs2_n, cfg.cs2_eps));
    } else if (inst == "compl") {
      const CompleteProblem p = compl_instance(cfg.compl_dim, cfg.compl_n);
      mtx("a", p.a);
      mtx("c", p.c);
      mtx("reduction", p.reduction);
    } else {
      mtx("assembled", custom_generator(cfg));
    }
  });
}

// ---------------------------------------------------------------- dispatch

void dispatch(Context& ctx, Command cmd) {
  const Config& cfg = ctx.cfg();
  const std::string& inst = cfg.instance;
  switch (cmd) {
    case Command::emit:
      emit_matrices(ctx);
      return;
    case Command::sweep: {
      const auto meshes = sweep_meshes(cfg);
      if (inst == "cenn2") cenn2_sweep(ctx, meshes);
      else if (inst == "strom") system_sweep(ctx, inst, meshes, [&](Index n) { return strom_assemble(strom_at(cfg, n)); });
      else if (inst == "cs2") system_sweep(ctx, inst, meshes, [&](Index n) { return cs2_assemble(n, cfg.cs2_eps); });
      else if (inst == "compl") compl_sweep(ctx, meshes);
      else throw ParseError("sweep: the custom instance has no mesh family");
      return;
    }
    case Command::spectrum:
      if (inst == "cenn2") parabola_suite(ctx, inst, [&](Index n) { return cenn2_setup(cfg, n).cm.atil; });
      else if (inst == "strom") parabola_suite(ctx, inst, [&](Index n) { return strom_assemble(strom_at(cfg, n)).assembled; });
      else if (inst == "cs2") parabola_suite(ctx, inst, [&](Index n) { return cs2_assemble(n, cfg.cs2_eps).assembled; });
      else if (inst == "compl") compl_spectrum(ctx);
      else {
        const Matrix gen = custom_generator(cfg);
        parabola_suite(ctx, inst, [&](Index) { return gen; });
      }
      return;
    case Command::simulate:
      if (inst == "cenn2") cenn2_simulate(ctx);
      else if (inst == "strom") plain_simulate(ctx, inst, strom_assemble(cfg.strom).assembled);
      else if (inst == "cs2") cs2_simulate(ctx);
      else if (inst == "compl") compl_simulate(ctx);
      else plain_simulate(ctx, inst, custom_generator(cfg));
      return;
    case Command::verify:
      if (inst == "cenn2") cenn2_verify(ctx);
      else if (inst == "strom") strom_verify(ctx);
      else if (inst == "cs2") cs2_verify(ctx);
      else if (inst == "compl") {
        compl_simulate(ctx);
        compl_spectrum(ctx);
      } else {
        const Matrix gen = custom_generator(cfg);
        custom_verify(ctx, gen);
        parabola_suite(ctx, inst, [&](Index) { return gen; });
      }
      return;
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json number_or_text(double v) { return std::isfinite(v) ? json(v) : json(io::format_double(v)); }

fs::path write_manifest(const Context& ctx, const Options& opts, const std::string& status) {
  const Config& cfg = ctx.cfg();
  json m = json::object();
  m["command"] = to_string(opts.command);
  m["config_path"] = opts.config.string();
  m["instance"] = cfg.instance;
  m["meshes"] = cfg.meshes;
  m["seed"] = cfg.seed;
  m["T"] = cfg.t_end;
  m["samples"] = cfg.samples;
  json tol = json::object();
  for (const auto& [k, v] : cfg.tol) tol[k] = number_or_text(v);
  m["tolerances"] = tol;
  json outputs = json::array();
  std::vector<fs::path> files = ctx.outputs();
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string bytes = io::read_file(f);
    outputs.push_back({{"file", fs::relative(f, opts.out).generic_string()},
                       {"bytes", bytes.size()},
                       {"sha256", io::sha256_hex(bytes)}});
  }
  m["outputs"] = outputs;
  json verdicts = json::object();
  json details = json::object();
  for (const auto& [name, pass] : ctx.verdicts()) {
    verdicts[name] = pass ? "PASS" : "FAIL";
    details[name] = ctx.details().at(name);
  }
  m["verdicts"] = verdicts;
  m["details"] = details;
  m["errors"] = ctx.errors();
  m["status"] = status;
  m["timestamp"] = utc_timestamp();
  const fs::path path = opts.out / "manifest.json";
  io::write_file_atomic(path, m.dump(2) + "\n");
  return path;
}

}  // namespace

RunResult run(const Options& opts) {
  RunResult result;
  Config cfg;
  try {
    cfg = parse_config(opts.config);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.tol) {
      if (!(*opts.tol > 0.0) || !std::isfinite(*opts.tol)) throw ParseError("--tol must be positive");
      cfg.tol["coupling"] = *opts.tol;
    }
    if (opts.command == Command::sweep) (void)sweep_meshes(cfg);
    if (cfg.instance == "custom") (void)io::load_block_system(cfg.custom_system);
  } catch (const ParseError& e) {
    result.exit_code = kExitParse;
    result.message = e.what();
    return result;
  } catch (const std::exception& e) {
    result.exit_code = kExitParse;
    result.message = std::string("config: ") + e.what();
    return result;
  }

  Context ctx(cfg, opts);
  std::string status = "complete";
  try {
    fs::create_directories(opts.out);
    dispatch(ctx, opts.command);
  } catch (const ParseError& e) {
    result.exit_code = kExitParse;
    result.message = e.what();
    return result;
  } catch (const std::exception& e) {
    status = std::string("aborted: ") + e.what();
    result.message = e.what();
  }

  result.outputs = ctx.outputs();
  result.verdicts = ctx.verdicts();
  try {
    result.manifest = write_manifest(ctx, opts, status);
  } catch (const std::exception& e) {
    result.exit_code = kExitNumerical;
    result.message = std::string("manifest: ") + e.what();
    return result;
  }
  const bool all_pass = std::all_of(result.verdicts.begin(), result.verdicts.end(), [](const auto& kv) { return kv.second; });
  if (!ctx.errors().empty() && result.message.empty()) result.message = ctx.errors().front();
  if (!all_pass || status != "complete" || !ctx.errors().empty()) {
    result.exit_code = kExitNumerical;
    if (result.message.empty()) {
      for (const auto& [name, pass] : result.verdicts)
        if (!pass) {
          result.message = "check '" + name + "' failed: " + ctx.details().at(name);
          break;
        }
    }
  }
  return result;
}

int main(int argc, char** argv) {
  CLI::App app{"Cosine operator functions of operator matrices: instances, checks and simulations"};
  app.require_subcommand(1);
  Options opts;
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  const std::vector<std::pair<Command, std::string>> commands{
      {Command::verify, "run the invariant checks for the configured instance"},
      {Command::simulate, "write trajectories and their residual checks"},
      {Command::spectrum, "write eigenvalues and the enclosing parabola"},
      {Command::sweep, "mesh refinement probes of operator norms"},
      {Command::emit, "write the instance matrices as MatrixMarket files"},
  };
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(cmd), help);
    sub->add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "seed for generated initial data");
    sub->add_option("--tol", tol, "coupling-residual tolerance for dynamic boundary runs");
    sub->callback([&opts, c = cmd] { opts.command = c; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }
  opts.config = config;
  opts.out = out;
  opts.seed = seed;
  opts.tol = tol;

  const RunResult r = run(opts);
  for (const auto& [name, pass] : r.verdicts) std::cout << (pass ? "PASS " : "FAIL ") << name << "\n";
  if (!r.manifest.empty()) std::cout << "manifest " << r.manifest.string() << "\n";
  if (!r.message.empty()) std::cerr << "cofmat: " << r.message << "\n";
  return r.exit_code;
}

}  // namespace cofmat::cli
