#include <unistd.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcft/acceptance.hpp"
#include "lcft/errors.hpp"
#include "lcft/field.hpp"
#include "lcft/flow.hpp"
#include "lcft/fock.hpp"
#include "lcft/kernels.hpp"
#include "lcft/scatter.hpp"
#include "lcft/verma.hpp"

using namespace lcft;
using nlohmann::json;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Config {
  double gamma = 1.0, mu = 1.0, t = 1.0, s = -1, omega = 3.0, tol = 1e-8;
  double alpha_re = 1.0, alpha_im = 0.0, P = 1.0, c = 0.0, radius = 1.0;
  double re_min = -2, re_max = 2;
  int level = 2, cutoff = 4, n = 1, grid = 512, steps = 10, points = 21, n_r = 10, workers = 1;
  long samples = 1000;
  std::uint64_t seed = 7;
  std::string vfield = "2,0,1", format = "json", out, observable = "gaussian", poly = "1@1*-1";
  bool no_timestamp = false;
};

// Every input that can change a result, so a record can be replayed.
json params_json(const Config& c) {
  return {{"gamma", c.gamma},       {"mu", c.mu},           {"t", c.t},           {"s", c.s},
          {"omega", c.omega},       {"tol", c.tol},         {"alpha_re", c.alpha_re}, {"alpha_im", c.alpha_im},
          {"P", c.P},               {"c", c.c},             {"radius", c.radius}, {"re_min", c.re_min},
          {"re_max", c.re_max},     {"level", c.level},     {"cutoff", c.cutoff}, {"n", c.n},
          {"grid", c.grid},         {"steps", c.steps},     {"points", c.points}, {"n_r", c.n_r},
          {"workers", c.workers},   {"samples", c.samples}, {"seed", c.seed},     {"vfield", c.vfield},
          {"observable", c.observable}, {"poly", c.poly}};
}

cplx parse_complex(const std::string& s) {
  try {
    const auto k = s.find(':');
    if (k == std::string::npos) return std::stod(s);
    return {std::stod(s.substr(0, k)), std::stod(s.substr(k + 1))};
  } catch (const std::exception&) {
    throw UsageError("cannot parse complex number '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

// "v_0,v_1,..." with complex entries written re:im
VectorField parse_vfield(const std::string& s) {
  std::vector<cplx> c;
  for (const auto& item : split(s, ',')) c.push_back(parse_complex(item));
  if (c.empty()) throw UsageError("--vfield needs at least one coefficient");
  return VectorField(c);
}

// "coef@m^e*m^e;coef@..." ; coef may be re:im; "d" as a mode means one d/dc
CPoly parse_poly(const std::string& s) {
  CPoly p;
  for (const auto& term : split(s, ';')) {
    const auto at = term.find('@');
    const cplx coef = parse_complex(term.substr(0, at));
    Monomial m;
    int d = 0;
    if (at != std::string::npos)
      for (const auto& f : split(term.substr(at + 1), '*')) {
        const auto caret = f.find('^');
        const std::string base = f.substr(0, caret);
        int e = 1;
        try {
          if (caret != std::string::npos) e = std::stoi(f.substr(caret + 1));
          if (base == "d") d += e;
          else m[std::stoi(base)] += e;
        } catch (const std::exception&) {
          throw UsageError("cannot parse polynomial factor '" + f + "'");
        }
      }
    p.add(m, d, coef);
  }
  return p;
}

json cplx_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json est_json(const Estimate& e, const Config& c, json extra = json::object()) {
  json j = {{"estimate", e.mean}, {"std_error", e.se}, {"n_samples", e.n}, {"seed", c.seed}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

std::vector<FockLabel> labels_upto(int level) {
  std::vector<FockLabel> out;
  for (int l = 0; l <= level; ++l)
    for (int a = 0; a <= l; ++a)
      for (const auto& nu : enumerate(a))
        for (const auto& nut : enumerate(l - a)) out.push_back({nu, nut});
  return out;
}

json labels_json(const std::vector<FockLabel>& ls) {
  json a = json::array();
  for (const auto& [nu, nut] : ls) a.push_back({nu.parts(), nut.parts()});
  return a;
}

json cmatrix_json(const Eigen::MatrixXcd& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array(), q = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      q.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(q);
  }
  return {{"re", re}, {"im", im}};
}

std::vector<int> mode_range(int N) {
  std::vector<int> m;
  for (int k = -N; k <= N; ++k) m.push_back(k);
  return m;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Output of a leaf command: a JSON result and, where a table exists, CSV.
struct Output {
  Output(json r, std::optional<std::string> table = std::nullopt) : result(std::move(r)), csv(std::move(table)) {}
  json result;
  std::optional<std::string> csv;
  std::optional<std::string> text;  // printed instead of the record (check all)
};

void write_sink(const std::string& path, const std::string& data) {
  if (path.empty()) {
    std::cout << data;
    return;
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw ComputationError("io", "cannot open " + tmp);
    f << data;
    if (!f) throw ComputationError("io", "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ComputationError("io", "cannot rename onto " + path);
  }
}

void validate(const Config& c) {
  if (!(c.gamma > 0 && c.gamma < 2)) throw UsageError("--gamma must lie in (0, 2)");
  if (!(c.tol > 0)) throw UsageError("--tol must be positive");
  if (c.mu < 0) throw UsageError("--mu must be non-negative");
  if (c.workers < 1) throw UsageError("--workers must be at least 1");
  if (c.format != "json" && c.format != "csv") throw UsageError("--format must be json or csv");
  if (c.level < 0 || c.cutoff < 0) throw UsageError("--level and --cutoff must be non-negative");
  if (c.samples < 2) throw UsageError("--samples must be at least 2");
}

using Handler = std::function<Output(const Config&)>;

std::map<std::string, Handler> handlers() {
  std::map<std::string, Handler> h;

  h["verma shapovalov"] = [](const Config& c) { return Output{shapovalov_json(c.level)}; };
  h["verma ell"] = [](const Config& c) {
    if (c.n < 1 || c.n > c.level) throw UsageError("need 1 <= --n <= --level");
    json j = matrix_to_json(ell_matrix(c.n, c.level), enumerate(c.level), enumerate(c.level - c.n));
    j["n"] = c.n;
    j["level"] = c.level;
    return Output{j};
  };
  h["verma degeneracy"] = [](const Config& c) {
    json a = json::array();
    for (const auto& p : degeneracy_scan(c.level, c.gamma))
      a.push_back({{"r", p.r}, {"s", p.s}, {"sign", p.sign}, {"alpha", cplx_json(p.alpha)},
                   {"scaled_det", p.scaled_det}, {"vanishes", p.vanishes}});
    return Output{{{"level", c.level}, {"points", a}}};
  };
  h["verma adjoint"] = [](const Config& c) {
    return Output{{{"n", c.n}, {"level", c.level}, {"P", c.P}, {"residual", adjoint_residual(c.n, c.level, c.P, c.gamma)}}};
  };

  h["fock gram"] = [](const Config& c) {
    const Params p = Params::make(c.gamma);
    return Output{{{"level", c.level}, {"P", c.P}, {"note", "rows indexed by holomorphic descendants"},
                   {"matrix", cmatrix_json(gram(p, c.P, c.level))}}};
  };
  h["fock commutators"] = [](const Config& c) {
    const Params p = Params::make(c.gamma);
    const cplx alpha(p.Q, c.P);
    double worst = 0;
    for (const auto& lab : labels_upto(c.level)) {
      FockState s{alpha, p.Q, {}};
      s.terms[lab] = 1;
      for (int n = -3; n <= 3; ++n)
        for (int m = -3; m <= 3; ++m) {
          FockState r = L0_apply(n, L0_apply(m, s)) - L0_apply(m, L0_apply(n, s)) - L0_apply(n + m, s) * double(n - m);
          if (n == -m) r -= s * (p.cL / 12 * (double(n) * n * n - n));
          worst = std::max(worst, r.max_abs());
        }
    }
    return Output{{{"level", c.level}, {"max_residual", worst}, {"central_charge", p.cL}}};
  };
  h["fock assemble"] = [](const Config& c) {
    const Params p = Params::make(c.gamma);
    const cplx alpha(p.Q, c.P);
    double worst = 0;
    for (const auto& lab : labels_upto(c.level)) {
      FockState s{alpha, p.Q, {}};
      s.terms[lab] = 1;
      worst = std::max(worst, (assemble_Ln_from_semigroups(c.n, c.omega, s) - L0_apply(c.n, s)).max_abs());
    }
    return Output{{{"n", c.n}, {"omega", c.omega}, {"level", c.level}, {"max_deviation", worst}}};
  };

  h["flow simulate"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    if (c.steps < 1) throw UsageError("--steps must be positive");
    std::vector<double> times;
    for (int k = 0; k <= c.steps; ++k) times.push_back(c.t * k / c.steps);
    const auto rows = trajectory(v, times, circle_nodes(c.grid, c.radius));
    json a = json::array();
    for (const auto& r : rows) a.push_back({{"t", r.t}, {"z0", cplx_json(r.z0)}, {"f", cplx_json(r.f)}, {"df", cplx_json(r.df)}});
    return Output{{{"vfield", v.str()}, {"rows", a}}, trajectory_csv(rows)};
  };
  h["flow h"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    const auto hd = extract_h(v, circle_nodes(c.grid, c.radius));
    json taylor = json::array();
    for (const auto& a : hd.taylor) taylor.push_back(cplx_json(a));
    std::ostringstream csv;
    csv.precision(17);
    csv << "re_z,im_z,re_h,im_h,re_dh,im_dh\n";
    for (std::size_t i = 0; i < hd.grid.size(); ++i)
      csv << hd.grid[i].real() << ',' << hd.grid[i].imag() << ',' << hd.h[i].real() << ',' << hd.h[i].imag() << ','
          << hd.dh[i].real() << ',' << hd.dh[i].imag() << '\n';
    return Output{{{"vfield", v.str()}, {"taylor", taylor}, {"t_final", hd.t_final}, {"last_change", hd.last_change},
                   {"equation_residual", h_equation_residual(hd)}},
                  csv.str()};
  };
  h["flow check"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    return Output{{{"vfield", v.str()}, {"markov_margin", markov_check(v)}, {"markov_certificate", markov_certificate(v)},
                   {"omega_condition", omega_condition(v)}, {"identity_residual", flow_identity_residual(v, c.t, circle_nodes(16))},
                   {"df0", cplx_json(integrate(v, c.t, 0.0).df)}}};
  };

  h["kernels hpq"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    const int N = c.cutoff;
    Eigen::MatrixXcd m(2 * N + 1, 2 * N + 1);
    for (int p = -N; p <= N; ++p)
      for (int q = -N; q <= N; ++q) m(p + N, q + N) = hpq(v, p, q);
    return Output{matrix_json(m, mode_range(N)), matrix_csv(m, mode_range(N))};
  };
  h["kernels covariance"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    CovarianceOptions opt;
    opt.M = std::max(512, c.grid);
    opt.tol = c.tol;
    const auto mc = mode_covariance(v, c.s < 0 ? c.t : c.s, c.t, c.cutoff, opt);
    json j = matrix_json(mc.C, mode_range(c.cutoff));
    j["s"] = mc.s;
    j["t"] = mc.t;
    j["quad_error"] = mc.quad_error;
    return Output{j, matrix_csv(mc.C, mode_range(c.cutoff))};
  };
  h["kernels xh"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    if (c.cutoff < 1) throw UsageError("--cutoff must be positive");
    const auto k = xh_kernel(extract_h(v, circle_nodes(c.grid)), c.cutoff);
    json j = matrix_json(k.gram, k.modes());
    j["rho"] = k.rho;
    j["min_eigenvalue"] = k.min_eigenvalue;
    return Output{j, matrix_csv(k.gram, k.modes())};
  };
  h["kernels generator"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    const CPoly r = apply_generator(v, background_charge(c.gamma), parse_poly(c.poly));
    json a = json::array();
    for (const auto& [key, coef] : r.terms) {
      json m = json::object();
      for (const auto& [mode, e] : key.first) m[std::to_string(mode)] = e;
      a.push_back({{"monomial", m}, {"c_derivative", key.second}, {"coeff", cplx_json(coef)}});
    }
    return Output{{{"vfield", v.str()}, {"terms", a}}};
  };

  h["field process"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    const ProcessSampler ps(v, c.t, c.cutoff, background_charge(c.gamma));
    auto rng = RngStreams(c.seed).stream("field.process");
    std::ostringstream csv;
    csv.precision(17);
    csv << "sample,b";
    for (int n = 1; n <= c.cutoff; ++n) csv << ",re_phi" << n << ",im_phi" << n;
    csv << '\n';
    json rows = json::array();
    const CircleField start(c.cutoff);
    for (long i = 0; i < c.samples; ++i) {
      const auto [b, f] = ps.sample(start, rng);
      csv << i << ',' << b;
      json modes = json::array();
      for (int n = 1; n <= c.cutoff; ++n) {
        csv << ',' << f.phi[n].real() << ',' << f.phi[n].imag();
        modes.push_back(cplx_json(f.phi[n]));
      }
      csv << '\n';
      rows.push_back({{"b", b}, {"phi", modes}});
    }
    return Output{{{"samples", rows}, {"seed", c.seed}}, csv.str()};
  };
  h["field gmc"] = [](const Config& c) {
    const auto r = gmc_mean_mass(c.gamma, c.alpha_re, c.samples, 32, RngStreams(c.seed), c.n_r, 2 * c.n_r, c.workers);
    json hist = json::array();
    for (const auto& [n_r, e] : r.history) hist.push_back({{"n_r", n_r}, {"estimate", e.mean}, {"std_error", e.se}});
    return Output{est_json(r.estimate, c, {{"exact", r.exact}, {"n_r", r.n_r}, {"history", hist}})};
  };
  h["field pt"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    const CFactor chi = CFactor::bump(2.0, 4);
    Observable F;
    if (c.observable == "one") F = [](double, const CircleField&) { return 1.0; };
    else if (c.observable == "gaussian")
      F = [chi](double x, const CircleField& f) { return chi.deriv(0, x) * std::exp(-std::norm(f.phi[1])); };
    else if (c.observable == "mode1")
      F = [chi](double x, const CircleField& f) { return chi.deriv(0, x) * f.phi[1].real(); };
    else throw UsageError("--observable must be one, gaussian or mode1");
    PtOptions po;
    po.N = std::max(1, c.cutoff);
    po.n_r = c.n_r;
    po.mc.n_samples = c.samples;
    po.mc.workers = c.workers;
    const auto e = estimate_Pt(F, v, c.t, c.mu, c.gamma, c.c, CircleField(po.N), RngStreams(c.seed), po);
    return Output{est_json(e, c, {{"observable", c.observable}, {"c", c.c}})};
  };
  h["field invariant"] = [](const Config& c) {
    const VectorField v = parse_vfield(c.vfield);
    if (c.cutoff < 1) throw UsageError("--cutoff must be positive");
    const InvariantSampler inv(v, c.cutoff, background_charge(c.gamma));
    auto rng = RngStreams(c.seed).stream("field.invariant");
    std::ostringstream csv;
    csv.precision(17);
    csv << "sample";
    for (int n = 1; n <= c.cutoff; ++n) csv << ",re_phi" << n << ",im_phi" << n;
    csv << '\n';
    json rows = json::array();
    for (long i = 0; i < c.samples; ++i) {
      const auto f = inv.sample(rng);
      csv << i;
      json modes = json::array();
      for (int n = 1; n <= c.cutoff; ++n) {
        csv << ',' << f.phi[n].real() << ',' << f.phi[n].imag();
        modes.push_back(cplx_json(f.phi[n]));
      }
      csv << '\n';
      rows.push_back(modes);
    }
    return Output{{{"samples", rows}, {"seed", c.seed}}, csv.str()};
  };
  h["field psi"] = [](const Config& c) {
    PsiOptions po;
    po.n_r = c.n_r;
    po.mc.n_samples = c.samples;
    po.mc.workers = c.workers;
    const auto r = psi_alpha_estimate(c.c, CircleField(0), c.alpha_re, c.gamma, c.mu, RngStreams(c.seed), po);
    return Output{est_json(r.psi, c, {{"scaled", r.scaled.mean}, {"scaled_std_error", r.scaled.se}, {"alpha", c.alpha_re}, {"c", c.c}})};
  };

  h["scatter reflection"] = [](const Config& c) {
    const cplx a(c.alpha_re, c.alpha_im);
    const cplx r = reflection(a, c.gamma, c.mu);
    return Output{{{"alpha", cplx_json(a)}, {"R", cplx_json(r)}, {"abs_R", std::abs(r)},
                   {"functional_equation_residual", functional_equation_residual(a, c.gamma, c.mu)}}};
  };
  h["scatter table"] = [](const Config& c) {
    if (c.points < 2) throw UsageError("--points must be at least 2");
    std::vector<cplx> as;
    for (int k = 0; k < c.points; ++k) as.emplace_back(c.re_min + (c.re_max - c.re_min) * k / (c.points - 1), c.alpha_im);
    json rows = json::array();
    for (const auto& a : as) {
      try {
        const cplx r = reflection(a, c.gamma, c.mu);
        rows.push_back({{"alpha", cplx_json(a)}, {"R", cplx_json(r)}, {"abs_R", std::abs(r)}});
      } catch (const ComputationError& e) {
        if (e.kind() != "pole") throw;
        rows.push_back({{"alpha", cplx_json(a)}, {"pole", e.what()}});
      }
    }
    return Output{{{"rows", rows}}, reflection_table_csv(as, c.gamma, c.mu)};
  };
  h["scatter block"] = [](const Config& c) {
    const auto b = scattering_block(c.P, c.level, c.gamma, c.mu);
    json inv = json::array();
    for (int i = 0; i < b.involution.rows(); ++i) {
      json r = json::array();
      for (int j = 0; j < b.involution.cols(); ++j) r.push_back(b.involution(i, j));
      inv.push_back(r);
    }
    return Output{{{"level", b.level}, {"scalar", cplx_json(b.scalar)}, {"weight_in", cplx_json(b.weight_in)},
                   {"weight_out", cplx_json(b.weight_out)}, {"labels", labels_json(b.labels)}, {"involution", inv}}};
  };

  h["check all"] = [](const Config& c) {
    AcceptanceOptions opt{c.seed, c.workers};
    const auto results = run_acceptance(opt);
    std::ostringstream table;
    int passed = 0;
    for (const auto& r : results) {
      table << format_line(r) << '\n';
      passed += r.pass;
    }
    table << passed << "/" << results.size() << " criteria passed\n";
    Output o{acceptance_report(results, opt)};
    o.text = table.str();
    return o;
  };
  return h;
}

void error_record(const std::string& kind, const std::string& msg) {
  std::cerr << json{{"schema", 1}, {"error", {{"kind", kind}, {"message", msg}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liouville CFT numerics: Verma modules, free-field realization, flows, kernels and Monte Carlo"};
  app.set_config("--config", "", "flat key = value file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Config c;
  app.add_option("--gamma", c.gamma, "coupling in (0, 2)");
  app.add_option("--mu", c.mu, "cosmological constant");
  app.add_option("--level", c.level, "descendant level");
  app.add_option("--cutoff", c.cutoff, "Fourier mode cutoff N");
  app.add_option("--t", c.t, "time");
  app.add_option("--s", c.s, "second time for cross covariances (defaults to --t)");
  app.add_option("--omega", c.omega, "rotation speed for assembled generators");
  app.add_option("--vfield", c.vfield, "v_0,v_1,... of v(z) = -sum v_n z^{n+1}; complex entries as re:im");
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--workers", c.workers, "worker threads");
  app.add_option("--format", c.format, "json or csv");
  app.add_option("--out", c.out, "output path (stdout if empty)");
  app.add_option("--tol", c.tol, "quadrature tolerance");
  app.add_option("--alpha-re", c.alpha_re, "Re alpha");
  app.add_option("--alpha-im", c.alpha_im, "Im alpha");
  app.add_option("--P", c.P, "momentum, alpha = Q + iP");
  app.add_option("--n", c.n, "operator index");
  app.add_option("--c", c.c, "zero mode c");
  app.add_option("--grid", c.grid, "circle nodes");
  app.add_option("--radius", c.radius, "radius of the circle grid");
  app.add_option("--steps", c.steps, "trajectory steps");
  app.add_option("--points", c.points, "table points");
  app.add_option("--re-min", c.re_min, "table: smallest Re alpha");
  app.add_option("--re-max", c.re_max, "table: largest Re alpha");
  app.add_option("--n-r", c.n_r, "radial rings of the disk grid");
  app.add_option("--samples", c.samples, "Monte Carlo samples");
  app.add_option("--observable", c.observable, "field pt: one, gaussian or mode1");
  app.add_option("--poly", c.poly, "kernels generator: coef@mode^exp*...;... ('d' = d/dc)");
  app.add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp field");

  const std::map<std::string, std::vector<std::string>> tree = {
      {"verma", {"shapovalov", "ell", "degeneracy", "adjoint"}},
      {"fock", {"gram", "commutators", "assemble"}},
      {"flow", {"simulate", "h", "check"}},
      {"kernels", {"hpq", "covariance", "xh", "generator"}},
      {"field", {"process", "gmc", "pt", "invariant", "psi"}},
      {"scatter", {"reflection", "table", "block"}},
      {"check", {"all"}}};
  std::map<std::string, CLI::App*> leaves;
  for (const auto& [group, subs] : tree) {
    auto* g = app.add_subcommand(group);
    g->require_subcommand(1);
    for (const auto& s : subs) leaves[group + " " + s] = g->add_subcommand(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record("usage", e.what());
    return 2;
  }

  std::string cmd;
  for (const auto& [name, sub] : leaves)
    if (sub->parsed()) cmd = name;
  try {
    validate(c);
    const auto table = handlers();
    Output o = table.at(cmd)(c);
    if (o.text) {
      std::cout << *o.text;
      if (!c.out.empty()) {
        json rec = {{"schema", 1}, {"command", cmd}, {"params", params_json(c)}, {"result", o.result}};
        if (!c.no_timestamp) rec["timestamp"] = timestamp();
        write_sink(c.out, rec.dump(2) + "\n");
      }
      return 0;
    }
    if (c.format == "csv") {
      if (!o.csv) throw UsageError("csv output is not available for '" + cmd + "'");
      write_sink(c.out, *o.csv);
      return 0;
    }
    json rec = {{"schema", 1}, {"command", cmd}, {"params", params_json(c)}, {"result", o.result}};
    if (!c.no_timestamp) rec["timestamp"] = timestamp();
    write_sink(c.out, rec.dump(2) + "\n");
    return 0;
  } catch (const UsageError& e) {
    error_record("usage", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    error_record("precondition", e.what());
    return 2;
  } catch (const ComputationError& e) {
    error_record(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_record("internal", e.what());
    return 1;
  }
}
