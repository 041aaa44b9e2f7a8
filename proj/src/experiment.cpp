#include "hunfold/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "hunfold/control.hpp"
#include "hunfold/parallel.hpp"

namespace hunfold {

using json = nlohmann::ordered_json;
using std::numbers::pi;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ',' || s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ',' && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double d = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d))
    bad(fmt("%.*s: expected a finite number, got '%.*s'", int(key.size()), key.data(), int(v.size()), v.data()));
  return d;
}

template <class Int>
Int to_int(std::string_view key, std::string_view v) {
  v = trim(v);
  Int d{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size())
    bad(fmt("%.*s: expected an integer, got '%.*s'", int(key.size()), key.data(), int(v.size()), v.data()));
  return d;
}

std::vector<double> to_doubles(std::string_view key, std::string_view v, std::size_t want = 0) {
  std::vector<double> out;
  for (auto item : split_list(v)) out.push_back(to_double(key, item));
  if (want && out.size() != want) bad(fmt("%.*s: expected %zu numbers", int(key.size()), key.data(), want));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ commands

namespace {
constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::verify, "verify"},   {Command::unfold_demo, "unfold-demo"}, {Command::cell, "cell"},
    {Command::homogenize, "homogenize"}, {Command::converge, "converge"}, {Command::control, "control"},
};
}

std::string_view command_name(Command c) noexcept {
  for (const auto& [k, n] : kCommands)
    if (k == c) return n;
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (const auto& [k, n] : kCommands)
    if (n == name) return k;
  bad("unknown command '" + std::string(name) + "'");
}

// ------------------------------------------------------------ specs

PeriodicCoefficient CoefficientSpec::build() const {
  try {
    if (preset == "identity") return PeriodicCoefficient::identity();
    if (preset == "constant") return PeriodicCoefficient::constant(matrix);
    if (preset == "laminate") return PeriodicCoefficient::laminate(a0, a1, freq);
    if (preset == "checkerboard") return PeriodicCoefficient::checkerboard(low, high);
  } catch (const std::invalid_argument& e) {
    bad(std::string("coefficient: ") + e.what());
  }
  bad("coefficient.preset: unknown preset '" + preset + "'");
}

ScalarFn SourceSpec::build() const {
  const double c = value;
  if (preset == "zero") return [](const Point&) { return 0.0; };
  if (preset == "constant") return [c](const Point&) { return c; };
  if (preset == "x1") return [c](const Point& x) { return c * x.x1; };
  if (preset == "sin") return [c](const Point& x) { return c * std::sin(x.x1 + x.x2); };
  bad("source.preset: unknown preset '" + preset + "'");
}

void ExperimentConfig::validate() const {
  try {
    omega.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("domain: ") + e.what());
  }
  if (eps.empty()) bad("eps.values: empty list");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) bad("eps.values: values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) bad("eps.values: list must be strictly decreasing");
  }
  if (grid.n1 < 2 || grid.n2 < 2 || grid.n3 < 2) bad("grid.n: need at least 2 elements per axis");
  const double nodes = double(grid.n1 + 1) * (grid.n2 + 1) * (grid.n3 + 1);
  if (nodes > 2.0e7) bad("grid.n: more than 2e7 nodes");
  if (cell_n < 2 || cell_n > 160) bad("grid.cell_n: must be in 2..160");
  if (control_n < 1 || control_n > 64) bad("grid.control_n: must be in 1..64");
  coefficient.build().validate(5);
  source.build();
  if (!std::isfinite(source.value)) bad("source.value: must be finite");
  if (!(rho > 0.0) || !std::isfinite(rho)) bad("control.rho: must be positive");
  for (auto [key, v] : {std::pair{"solver.tol", solver_tol}, {"solver.cell_tol", cell_tol}, {"control.tol", control_tol}})
    if (!(v > 0.0 && v < 1.0)) bad(std::string(key) + ": must be in (0, 1)");
  if (solver_maxit < 1) bad("solver.maxit: must be positive");
  if (control_maxit < 1) bad("control.maxit: must be positive");
  if (samples < 10) bad("verify.samples: need at least 10");
  if (output.empty()) bad("output.dir: empty");

  switch (command) {
    case Command::control:
      if (eps.size() != 1) bad("eps.values: control takes a single eps");
      break;
    case Command::converge:
      if (eps.size() < 2) bad("eps.values: converge needs at least two values");
      if (!resolves(omega, grid, eps.back()))
        bad(fmt("grid.n: %d x %d x %d under-resolves eps = %g (need 4 elements per cell per axis)", grid.n1, grid.n2,
                grid.n3, eps.back()));
      break;
    case Command::unfold_demo:
      if (eps.size() < 2) bad("eps.values: unfold-demo needs at least two values");
      break;
    default:
      break;
  }
}

ExperimentConfig default_config(Command c) {
  ExperimentConfig cfg;
  cfg.command = c;
  switch (c) {
    case Command::unfold_demo:
      cfg.source.preset = "sin";
      cfg.eps = {0.5, 0.25, 0.125, 0.0625};
      break;
    case Command::homogenize:
      cfg.grid = {32, 32, 32};
      break;
    case Command::converge:
      cfg.cell_n = 64;
      break;
    case Command::control:
      cfg.eps = {0.5};
      cfg.grid = {16, 16, 16};
      cfg.solver_tol = 1e-13;
      break;
    default:
      break;
  }
  return cfg;
}

// ------------------------------------------------------------ settings

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  auto point = [&] {
    const auto d = to_doubles(key, v, 3);
    return Point{d[0], d[1], d[2]};
  };
  auto word = [&] { return std::string(v); };

  if (key == "command") {
    const Command c = parse_command(v);
    if (c != cfg.command) bad("command: '" + word() + "' conflicts with '" + std::string(command_name(cfg.command)) + "'");
  } else if (key == "domain.lo") {
    cfg.omega.lo = point();
  } else if (key == "domain.hi") {
    cfg.omega.hi = point();
  } else if (key == "eps.values") {
    cfg.eps = to_doubles(key, v);
  } else if (key == "grid.n") {
    std::vector<int> n;
    for (auto item : split_list(v)) n.push_back(to_int<int>(key, item));
    if (n.size() != 3) bad("grid.n: expected 3 integers");
    cfg.grid = {n[0], n[1], n[2]};
  } else if (key == "grid.cell_n") {
    cfg.cell_n = to_int<int>(key, v);
  } else if (key == "grid.control_n") {
    cfg.control_n = to_int<int>(key, v);
  } else if (key == "coefficient.preset") {
    cfg.coefficient.preset = word();
  } else if (key == "coefficient.a0") {
    cfg.coefficient.a0 = to_double(key, v);
  } else if (key == "coefficient.a1") {
    cfg.coefficient.a1 = to_double(key, v);
  } else if (key == "coefficient.freq") {
    cfg.coefficient.freq = to_int<int>(key, v);
  } else if (key == "coefficient.matrix") {
    const auto m = to_doubles(key, v, 4);
    cfg.coefficient.matrix = {m[0], m[1], m[2], m[3]};
  } else if (key == "coefficient.low") {
    cfg.coefficient.low = to_double(key, v);
  } else if (key == "coefficient.high") {
    cfg.coefficient.high = to_double(key, v);
  } else if (key == "source.preset") {
    cfg.source.preset = word();
  } else if (key == "source.value") {
    cfg.source.value = to_double(key, v);
  } else if (key == "control.rho") {
    cfg.rho = to_double(key, v);
  } else if (key == "control.tol") {
    cfg.control_tol = to_double(key, v);
  } else if (key == "control.maxit") {
    cfg.control_maxit = to_int<int>(key, v);
  } else if (key == "solver.tol") {
    cfg.solver_tol = to_double(key, v);
  } else if (key == "solver.maxit") {
    cfg.solver_maxit = to_int<int>(key, v);
  } else if (key == "solver.cell_tol") {
    cfg.cell_tol = to_double(key, v);
  } else if (key == "verify.samples") {
    cfg.samples = to_int<int>(key, v);
  } else if (key == "verify.seed") {
    cfg.seed = to_int<std::uint64_t>(key, v);
  } else if (key == "output.dir") {
    cfg.output = word();
  } else {
    bad("unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, std::optional<Command> command) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    bad(fmt("line %lu: %s", e.line(), e.message().c_str()));
  }
  if (auto c = tree.get_child_optional("command"); c && c->empty()) {
    const Command file_cmd = parse_command(trim(c->data()));
    if (command && *command != file_cmd)
      bad("command: file says '" + std::string(command_name(file_cmd)) + "', requested '" +
          std::string(command_name(*command)) + "'");
    command = file_cmd;
  }
  if (!command) bad("no command given");
  ExperimentConfig cfg = default_config(*command);
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply_setting(cfg, name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) apply_setting(cfg, name + "." + key, leaf.data());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(std::string_view text, std::optional<Command> command) {
  std::istringstream in{std::string(text)};
  return parse_config(in, command);
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Command> command) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file " + path.string());
  return parse_config(in, command);
}

std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "command = " << command_name(c.command) << "\n\n";
  o << "[domain]\nlo = " << join({c.omega.lo.x1, c.omega.lo.x2, c.omega.lo.x3})
    << "\nhi = " << join({c.omega.hi.x1, c.omega.hi.x2, c.omega.hi.x3}) << "\n\n";
  o << "[eps]\nvalues = " << join(c.eps) << "\n\n";
  o << "[grid]\nn = " << c.grid.n1 << ' ' << c.grid.n2 << ' ' << c.grid.n3 << "\ncell_n = " << c.cell_n
    << "\ncontrol_n = " << c.control_n << "\n\n";
  const auto& k = c.coefficient;
  o << "[coefficient]\npreset = " << k.preset << "\na0 = " << format_double(k.a0) << "\na1 = " << format_double(k.a1)
    << "\nfreq = " << k.freq << "\nmatrix = " << join({k.matrix.begin(), k.matrix.end()})
    << "\nlow = " << format_double(k.low) << "\nhigh = " << format_double(k.high) << "\n\n";
  o << "[source]\npreset = " << c.source.preset << "\nvalue = " << format_double(c.source.value) << "\n\n";
  o << "[control]\nrho = " << format_double(c.rho) << "\ntol = " << format_double(c.control_tol)
    << "\nmaxit = " << c.control_maxit << "\n\n";
  o << "[solver]\ntol = " << format_double(c.solver_tol) << "\nmaxit = " << c.solver_maxit
    << "\ncell_tol = " << format_double(c.cell_tol) << "\n\n";
  o << "[verify]\nsamples = " << c.samples << "\nseed = " << c.seed << "\n\n";
  o << "[output]\ndir = " << c.output << "\n";
  return o.str();
}

namespace {

json config_json(const ExperimentConfig& c) {
  const auto& k = c.coefficient;
  return {
      {"command", command_name(c.command)},
      {"domain", {{"lo", {c.omega.lo.x1, c.omega.lo.x2, c.omega.lo.x3}}, {"hi", {c.omega.hi.x1, c.omega.hi.x2, c.omega.hi.x3}}}},
      {"eps", {{"values", c.eps}}},
      {"grid", {{"n", {c.grid.n1, c.grid.n2, c.grid.n3}}, {"cell_n", c.cell_n}, {"control_n", c.control_n}}},
      {"coefficient",
       {{"preset", k.preset}, {"a0", k.a0}, {"a1", k.a1}, {"freq", k.freq}, {"matrix", k.matrix}, {"low", k.low}, {"high", k.high}}},
      {"source", {{"preset", c.source.preset}, {"value", c.source.value}}},
      {"control", {{"rho", c.rho}, {"tol", c.control_tol}, {"maxit", c.control_maxit}}},
      {"solver", {{"tol", c.solver_tol}, {"maxit", c.solver_maxit}, {"cell_tol", c.cell_tol}}},
      {"verify", {{"samples", c.samples}, {"seed", c.seed}}},
      {"output", {{"dir", c.output}}},
  };
}

std::string scalar_text(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  bad(key + ": expected a number or string");
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("json: ") + e.what());
  }
  if (!j.is_object()) bad("json: expected an object");
  if (!j.contains("command") || !j["command"].is_string()) bad("json: missing command");
  ExperimentConfig cfg = default_config(parse_command(j["command"].get<std::string>()));
  for (const auto& [section, body] : j.items()) {
    if (section == "command") continue;
    if (!body.is_object()) bad("json: section '" + section + "' must be an object");
    for (const auto& [key, v] : body.items()) {
      const std::string full = section + "." + key;
      if (v.is_array()) {
        std::string s;
        for (const auto& item : v) s += scalar_text(full, item) + " ";
        apply_setting(cfg, full, s);
      } else {
        apply_setting(cfg, full, scalar_text(full, v));
      }
    }
  }
  cfg.validate();
  return cfg;
}

// ------------------------------------------------------------ verification battery

namespace {

struct Battery {
  const ExperimentConfig& cfg;
  std::mt19937_64 rng;
  std::vector<Check> out;

  std::vector<Point> points(int n, double r) {
    std::uniform_real_distribution<double> U(-r, r);
    std::vector<Point> p(static_cast<std::size_t>(n));
    for (auto& x : p) x = {U(rng), U(rng), U(rng)};
    return p;
  }
  void add(std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, true, std::move(detail)});
  }
};

double dist_inf(const Point& a, const Point& b) {
  return std::max({std::abs(a.x1 - b.x1), std::abs(a.x2 - b.x2), std::abs(a.x3 - b.x3)});
}
double size_inf(const Point& a) { return std::max({std::abs(a.x1), std::abs(a.x2), std::abs(a.x3)}); }

void group_checks(Battery& B) {
  const int n = B.cfg.samples;
  // integer-valued coordinates make every product exact
  std::uniform_int_distribution<int> I(-50, 50);
  std::size_t law_bad = 0;
  for (int s = 0; s < n; ++s) {
    const Point p{double(I(B.rng)), double(I(B.rng)), double(I(B.rng))};
    const Point q{double(I(B.rng)), double(I(B.rng)), double(I(B.rng))};
    const Point want{p.x1 + q.x1, p.x2 + q.x2, p.x3 + q.x3 + 2.0 * (p.x2 * q.x1 - p.x1 * q.x2)};
    if (!(group_mul(p, q) == want)) ++law_bad;
  }
  B.add("group_law", law_bad == 0, fmt("%zu of %d integer products differ from the closed form", law_bad, n));

  double assoc = 0.0, inv = 0.0;
  const auto pts = B.points(3 * n, 10.0);
  for (int s = 0; s < n; ++s) {
    const Point &p = pts[3 * s], &q = pts[3 * s + 1], &r = pts[3 * s + 2];
    const Point a = group_mul(group_mul(p, q), r), b = group_mul(p, group_mul(q, r));
    assoc = std::max(assoc, dist_inf(a, b) / (1.0 + size_inf(a)));
    inv = std::max({inv, size_inf(group_mul(p, group_inv(p))), size_inf(group_mul(group_inv(p), p)),
                    dist_inf(group_mul(p, Point{}), p)});
  }
  B.add("group_axioms", assoc <= 1e-14 && inv == 0.0,
        fmt("associativity %.2e, inverse/identity %.2e", assoc, inv));

  double hom = 0.0, comp = 0.0;
  std::uniform_real_distribution<double> L(0.05, 20.0);
  for (int s = 0; s < n; ++s) {
    const Point &p = pts[3 * s], &q = pts[3 * s + 1];
    const double l = L(B.rng), m = L(B.rng);
    const Point a = dilate(l, group_mul(p, q)), b = group_mul(dilate(l, p), dilate(l, q));
    hom = std::max(hom, dist_inf(a, b) / (1.0 + size_inf(a)));
    const Point c = dilate(l, dilate(m, p)), d = dilate(l * m, p);
    comp = std::max(comp, dist_inf(c, d) / (1.0 + size_inf(c)));
  }
  B.add("dilations", hom <= 1e-13 && comp <= 1e-13, fmt("automorphism %.2e, composition %.2e", hom, comp));

  double nh = 0.0, sym = 0.0, inv_d = 0.0;
  for (int s = 0; s < n; ++s) {
    const Point &p = pts[3 * s], &q = pts[3 * s + 1], &r = pts[3 * s + 2];
    const double l = L(B.rng);
    nh = std::max(nh, std::abs(hnorm(dilate(l, p)) - l * hnorm(p)) / (1.0 + l * hnorm(p)));
    sym = std::max(sym, std::abs(hnorm(group_inv(p)) - hnorm(p)));
    inv_d = std::max(inv_d, std::abs(hdist(group_mul(r, p), group_mul(r, q)) - hdist(p, q)) / (1.0 + hdist(p, q)));
  }
  B.add("homogeneous_norm", nh <= 1e-13 && sym <= 1e-13 && inv_d <= 1e-6,
        fmt("homogeneity %.2e, symmetry %.2e, left invariance of the distance %.2e", nh, sym, inv_d));
}

void lattice_checks(Battery& B) {
  const int n = B.cfg.samples;
  std::uniform_real_distribution<double> R(-1000.0, 1000.0);
  std::size_t even_bad = 0;
  for (int s = 0; s < n; ++s) {
    const double r = R(B.rng);
    const auto k = even_floor(r);
    const double f = even_frac(r);
    if (k % 2 != 0 || !(f >= 0.0 && f < 2.0) || std::abs(double(k) + f - r) > 1e-12 * (1.0 + std::abs(r))) ++even_bad;
  }
  const bool edges = even_floor(2.0) == 2 && even_frac(2.0) == 0.0 && even_floor(-0.5) == -2 &&
                     even_frac(-0.5) == 1.5 && even_floor(-2.0) == -2 && even_floor(1.999) == 0;
  B.add("even_parts", even_bad == 0 && edges,
        fmt("%zu of %d samples off, edge values %s", even_bad, n, edges ? "exact" : "wrong"));

  const auto pts = B.points(n, 10.0);
  double rec = 0.0;
  bool in_y = true;
  for (double eps : {1.0, 0.5, 0.1})
    for (const auto& p : pts) {
      in_y = in_y && ReferenceCell::contains(eps_decompose(eps, p).frac);
      rec = std::max(rec, reconstruction_error(eps, p));
    }
  B.add("decomposition", rec <= 1e-9 && in_y,
        fmt("reconstruction %.2e, fractions in Y: %s", rec, in_y ? "yes" : "no"));

  std::size_t tile_bad = 0;
  const int m = std::min(n, 2000);
  for (double eps : {1.0, 0.5, 0.1})
    for (int s = 0; s < m; ++s) {
      const Point& x = pts[static_cast<std::size_t>(s)];
      const auto d = eps_decompose(eps, x);
      int owners = 0;
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          for (int c = -16; c <= 16; ++c)
            if (ReferenceCell::contains(CellMap{eps, {d.index.k1 + a, d.index.k2 + b, d.index.k3 + c}}.inverse(x)))
              ++owners;
      if (owners != 1 || !ReferenceCell::contains(CellMap{eps, d.index}.inverse(x))) ++tile_bad;
    }
  B.add("tiling", tile_bad == 0, fmt("%zu of %d points without a unique owning cell", tile_bad, 3 * m));

  std::size_t lat_bad = 0;
  for (int i = 0; i < 343; ++i)
    for (int j = 0; j < 343; ++j) {
      const CellIndex k{i % 7 - 3, (i / 7) % 7 - 3, i / 49 - 3}, q{j % 7 - 3, (j / 7) % 7 - 3, j / 49 - 3};
      if (!(group_mul(scale_int(2, k), scale_int(2, q)) == scale_int(2, lattice_mul(k, q)))) ++lat_bad;
    }
  B.add("lattice", lat_bad == 0, fmt("%zu of 117649 products off the lattice", lat_bad));

  const ScalarFn h = [](const Point& y) { return std::cos(pi * y.x1) + y.x2 * y.x3 + y.x3 * y.x3; };
  const auto ph = periodize(h);
  std::uniform_real_distribution<double> Y(0.01, 1.99);
  std::uniform_int_distribution<int> K(-5, 5);
  double per = 0.0;
  for (int s = 0; s < m; ++s) {
    const Point y{Y(B.rng), Y(B.rng), Y(B.rng)};
    const CellIndex k{K(B.rng), K(B.rng), K(B.rng)};
    per = std::max(per, std::abs(ph(group_mul(scale_int(2, k), y)) - h(y)));
  }
  B.add("periodization", per <= 1e-9, fmt("max |h({2k.y}) - h(y)| = %.2e", per));
}

void calculus_checks(Battery& B) {
  const std::vector<SmoothField> fields = {
      {[](const Point& x) { return x.x1 * x.x2 + x.x3; }, [](const Point& x) { return EuclideanGradient{x.x2, x.x1, 1}; }},
      {[](const Point& x) { return std::sin(x.x1) * std::exp(0.3 * x.x3); },
       [](const Point& x) {
         return EuclideanGradient{std::cos(x.x1) * std::exp(0.3 * x.x3), 0, 0.3 * std::sin(x.x1) * std::exp(0.3 * x.x3)};
       }},
      {[](const Point& x) { return x.x2 * x.x2 * x.x3; },
       [](const Point& x) { return EuclideanGradient{0, 2 * x.x2 * x.x3, x.x2 * x.x2}; }},
  };
  const auto pts = B.points(std::min(B.cfg.samples, 500), 2.0);
  double fd = 0.0;
  bool rank = true;
  for (const auto& p : pts) {
    rank = rank && frame_at(p).rank() == 2;
    for (const auto& f : fields) {
      const auto a = grad_H(f, p, Differentiation::analytic()), b = grad_H(f, p, Differentiation::fd());
      fd = std::max({fd, std::abs(a.v1 - b.v1), std::abs(a.v2 - b.v2)});
    }
  }
  const ScalarFn g = [](const Point& x) { return std::sin(x.x1 + 0.5 * x.x3) * std::cos(x.x2) + x.x1 * x.x3 * x.x3; };
  const Point p0{0.3, -0.7, 0.4};
  std::vector<double> err;
  for (double h : {2e-2, 1e-2, 5e-3}) {
    const auto X1 = vector_field_fd(1, g, h), X2 = vector_field_fd(2, g, h), X3 = vector_field_fd(3, g, h);
    err.push_back(std::abs(vector_field_fd(1, X2, h)(p0) - vector_field_fd(2, X1, h)(p0) + 4.0 * X3(p0)));
  }
  const double order = std::log2(err[1] / err[2]);
  B.add("horizontal_frame", rank && fd <= 1e-6 && std::abs(order - 2.0) < 0.2,
        fmt("frame rank 2: %s, analytic vs difference gradient %.2e, commutator [X1,X2] = -4 X3 order %.3f",
            rank ? "yes" : "no", fd, order));

  const HorizontalField phi{
      [](const Point& x) { return HorizontalVector{x.x1 * x.x3, std::sin(x.x2) + x.x1 * x.x1}; },
      [](const Point& x) {
        return std::array<EuclideanGradient, 2>{EuclideanGradient{x.x3, 0, x.x1},
                                                EuclideanGradient{2 * x.x1, std::cos(x.x2), 0}};
      }};
  double dv = 0.0;
  for (const auto& p : pts)
    dv = std::max(dv, std::abs(div_H(phi, p, Differentiation::analytic()) - div_H_euclidean_form(phi, p)));
  B.add("divergence", dv <= 1e-6, fmt("X1 phi1 + X2 phi2 vs div(C^t phi): %.2e", dv));
}

void unfolding_checks(Battery& B) {
  const BoxDomain box{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}};
  const ScalarFn f = [](const Point& x) { return std::exp(0.3 * x.x1) * std::cos(x.x2 + 0.5 * x.x3) + x.x3 * x.x3; };
  double matched = 0.0, order = 1e9;
  for (double eps : {0.5, 0.25}) {
    const auto dec = interior_cells(eps, box);
    const auto ic = integral_identity_residual(dec, f, QuadratureRule::gauss(6));
    matched = std::max(matched, ic.residual);
    double prev = 0.0;
    for (int sub : {1, 2, 4}) {
      const double gap = std::abs(integrate_covered_fubini(f, dec, sub, 1, 8) - ic.lhs);
      if (prev > 0.0) order = std::min(order, std::log2(prev / gap));
      prev = gap;
    }
  }
  B.add("integral_identity", matched <= 1e-12 && order >= 1.95,
        fmt("matched residual %.2e, independent Fubini rule order %.3f", matched, order));

  const auto dec = interior_cells(0.5, box);
  bool bound = true;
  std::string nb;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = norm_bound_check(dec, f, p, QuadratureRule::gauss(4), {8, 8, 8});
    bound = bound && r.lhs <= r.rhs * (1.0 + 1e-9);
    nb += fmt("%sp=%g %.4g <= %.4g", nb.empty() ? "" : ", ", p, r.lhs, r.rhs);
  }
  B.add("norm_bound", bound, nb);

  const BoxDomain sym{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
  const std::vector<std::pair<TwoScaleFn, ScalarFn>> pairs = {
      {[](const Point& x, const Point&) { return x.x1; }, [](const Point& x) { return x.x2 + 1.0; }},
      {[](const Point& x, const Point& y) { return std::sin(pi * y.x1) * x.x2; }, [](const Point& x) { return std::cos(x.x1); }},
      {[](const Point& x, const Point& y) { return std::exp(x.x1 - y.x2); }, [](const Point& x) { return 1.0 + x.x1 * x.x2 * x.x3; }},
  };
  double dual = 0.0;
  for (double eps : {0.5, 0.25}) {
    auto d = std::make_shared<const EpsDecomposition>(interior_cells(eps, sym));
    for (const auto& [Phi, psi] : pairs)
      dual = std::max(dual, adjoint_duality_residual(d, Phi, psi, QuadratureRule::gauss(4)).residual);
  }
  B.add("adjoint_duality", dual <= 1e-10, fmt("max residual %.2e", dual));

  const SmoothField g{[](const Point& x) { return x.x1 * x.x1 * x.x3 - x.x2 * x.x3 * x.x3; },
                      [](const Point& x) {
                        return EuclideanGradient{2 * x.x1 * x.x3, -x.x3 * x.x3, x.x1 * x.x1 - 2 * x.x2 * x.x3};
                      }};
  const std::vector<Point> ys = {{0.1, 0.3, 0.2}, {0.9, 1.1, 1.3}, {1.7, 1.9, 0.6}, {1.2, 0.4, 1.9}};
  double an = 0.0, fdr = 0.0;
  for (double eps : {0.5, 0.25}) {
    const auto d = interior_cells(eps, sym);
    an = std::max(an, gradient_relation_residual(d, g, ys, Differentiation::analytic()));
    fdr = std::max(fdr, gradient_relation_residual(d, g, ys, Differentiation::fd()));
  }
  B.add("gradient_relation", an <= 1e-9 && fdr <= 1e-5, fmt("analytic %.2e, finite difference %.2e", an, fdr));
}

void asymptotic_checks(Battery& B) {
  const BoxDomain sym{{-2.0, -2.0, -2.0}, {2.0, 2.0, 2.0}};
  const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> slopes;
  for (const ScalarFn& phi : {ScalarFn([](const Point& x) { return x.x1; }),
                              ScalarFn([](const Point& x) { return std::sin(x.x1 + x.x2); })}) {
    std::vector<double> sup;
    for (const auto& r : fixed_function_convergence(phi, sym, eps, 5)) sup.push_back(r.sup_error);
    slopes.push_back(loglog_slope(eps, sup));
  }
  B.add("fixed_function_convergence",
        std::all_of(slopes.begin(), slopes.end(), [](double s) { return s >= 0.9 && s <= 1.1; }),
        fmt("sup-error slopes %.4f (x1), %.4f (sin(x1+x2))", slopes[0], slopes[1]));

  const BoxDomain box{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}};
  const std::vector<double> e3{0.5, 0.25, 0.125};
  const auto g = [](const Point& y) { return 1.5 + std::sin(pi * y.x1) * std::cos(pi * y.x2); };
  const auto rows = boundary_layer_residual(
      e3, [g](double e) { return oscillate(g, e); }, [](const Point& x) { return 1.0 + 0.25 * x.x1; }, box);
  std::vector<double> lam, lay;
  for (const auto& r : rows) {
    lam.push_back(r.lambda_measure);
    lay.push_back(r.layer_integral);
  }
  B.add("boundary_layer", strictly_decreasing(lam) && strictly_decreasing(lay),
        fmt("|Lambda| %.4g %.4g %.4g, layer integral %.4g %.4g %.4g", lam[0], lam[1], lam[2], lay[0], lay[1], lay[2]));

  const auto prow = two_scale_pairing(
      e3, [](double e) { return oscillate([](const Point& y) { return 2.0 + std::cos(pi * y.x1); }, e); },
      [](const Point& x, const Point& y) { return x.x1 * (1.0 + std::sin(pi * y.x2)); }, box, QuadratureRule::gauss(3));
  std::vector<double> gaps;
  for (const auto& r : prow) gaps.push_back(r.gap);
  B.add("two_scale_pairing", strictly_decreasing(gaps),
        fmt("direct vs unfolded gap %.3e %.3e %.3e", gaps[0], gaps[1], gaps[2]));
}

}  // namespace

std::vector<Check> verify_battery(const ExperimentConfig& cfg) {
  Battery B{cfg, std::mt19937_64(cfg.seed), {}};
  group_checks(B);
  lattice_checks(B);
  calculus_checks(B);
  unfolding_checks(B);
  asymptotic_checks(B);
  return std::move(B.out);
}

// ------------------------------------------------------------ runs

namespace {

class Csv {
 public:
  Csv(const std::filesystem::path& p, const std::vector<std::string>& header) : f_(p) {
    if (!f_) throw std::runtime_error("cannot write " + p.string());
    for (std::size_t i = 0; i < header.size(); ++i) f_ << (i ? "," : "") << header[i];
    f_ << '\n';
  }
  Csv& cell(double v) {
    sep();
    f_ << format_double(v);
    return *this;
  }
  Csv& cell(const std::string& s) {
    sep();
    f_ << s;
    return *this;
  }
  void end() {
    f_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) f_ << ',';
    first_ = false;
  }
  std::ofstream f_;
  bool first_ = true;
};

struct Run {
  const ExperimentConfig& cfg;
  std::filesystem::path dir;
  RunReport report;
  json data = json::object();

  void check(std::string name, bool ok, std::string detail, bool gating = true) {
    report.checks.push_back({std::move(name), ok, gating, std::move(detail)});
  }
  std::filesystem::path file(const std::string& name) {
    report.files.push_back(name);
    return dir / name;
  }
  CgOptions solver() const { return {cfg.solver_tol, cfg.solver_maxit, false}; }
};

void write_nodal(Run& r, const std::string& name, const StructuredGrid& g, const std::vector<std::string>& cols,
                 const std::vector<const GridFunction*>& fns) {
  std::vector<std::string> header{"x1", "x2", "x3"};
  header.insert(header.end(), cols.begin(), cols.end());
  Csv csv(r.file(name), header);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point p = g.node(i);
    csv.cell(p.x1).cell(p.x2).cell(p.x3);
    for (const auto* f : fns) csv.cell(f->values[i]);
    csv.end();
  }
}

json matrix_json(const Matrix2& m) { return {{m[0], m[1]}, {m[2], m[3]}}; }

void run_verify(Run& r) {
  auto checks = verify_battery(r.cfg);
  for (auto& c : checks) r.report.checks.push_back(std::move(c));
  r.data["groups"] = r.report.checks.size();
}

void run_unfold_demo(Run& r) {
  const auto& c = r.cfg;
  const ScalarFn phi = c.source.build();
  const auto conv = fixed_function_convergence(phi, c.omega, c.eps, 5);
  Csv csv(r.file("unfold.csv"), {"eps", "cells", "lambda_measure", "covered_integral", "unfolded_integral",
                                 "identity_residual", "norm_lhs", "norm_rhs", "sup_error", "l2_error"});
  double worst_id = 0.0;
  bool bound = true;
  std::vector<double> sup;
  json rows = json::array();
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const double eps = c.eps[i];
    const auto dec = interior_cells(eps, c.omega);
    const auto ic = integral_identity_residual(dec, phi, QuadratureRule::gauss(4));
    const auto nb = norm_bound_check(dec, phi, 2.0, QuadratureRule::gauss(4), cell_resolved(c.omega, eps, 2));
    worst_id = std::max(worst_id, ic.residual);
    bound = bound && nb.lhs <= nb.rhs * (1.0 + 1e-9);
    sup.push_back(conv[i].sup_error);
    csv.cell(eps).cell(double(dec.interior.size())).cell(dec.lambda_measure).cell(ic.lhs).cell(ic.rhs);
    csv.cell(ic.residual).cell(nb.lhs).cell(nb.rhs).cell(conv[i].sup_error).cell(conv[i].l2_error);
    csv.end();
    rows.push_back({{"eps", eps},
                    {"cells", dec.interior.size()},
                    {"lambda_measure", dec.lambda_measure},
                    {"identity_residual", ic.residual},
                    {"sup_error", conv[i].sup_error},
                    {"l2_error", conv[i].l2_error}});
  }
  r.data["rows"] = rows;
  r.check("integral_identity", worst_id <= 1e-12, fmt("max residual %.2e", worst_id));
  r.check("norm_bound", bound, "p = 2 on every scale");
  const bool nonzero = std::all_of(sup.begin(), sup.end(), [](double s) { return s > 0.0; });
  const double slope = nonzero ? loglog_slope(c.eps, sup) : 0.0;
  r.data["sup_slope"] = slope;
  r.check("sup_error_slope", true, nonzero ? fmt("slope %.4f", slope) : std::string("source is constant on cells"),
          false);
}

void run_cell(Run& r) {
  const auto& c = r.cfg;
  const auto A = c.coefficient.build();
  const auto cell = solve_cell(A, c.cell_n, {c.cell_tol, c.solver_maxit, true});
  const auto A0 = homogenized_matrix(A, cell);
  const double asym = std::abs(A0[1] - A0[2]);
  const double tr = 0.5 * (A0[0] + A0[3]), d = std::hypot(0.5 * (A0[0] - A0[3]), 0.5 * (A0[1] + A0[2]));
  const double lo = tr - d, hi = tr + d;
  const double res = std::max(cell.residual[0], cell.residual[1]);
  r.check("residual", res <= 1e-8, fmt("discrete residual %.2e, %.2e", cell.residual[0], cell.residual[1]));
  r.check("symmetry", asym <= 1e-8 * std::abs(tr), fmt("|a12 - a21| = %.2e", asym));
  const double Y = ReferenceCell::measure;
  r.check("bounds", lo >= A.alpha * Y * (1.0 - 1e-6) && hi <= A.beta * Y * (1.0 + 1e-6),
          fmt("eigenvalues %.10g, %.10g within [%.6g, %.6g]", lo, hi, A.alpha * Y, A.beta * Y));
  r.data["A0"] = matrix_json(A0);
  r.data["eigenvalues"] = {lo, hi};
  r.data["iterations"] = {cell.reports[0].iterations, cell.reports[1].iterations};
  r.data["residual"] = {cell.residual[0], cell.residual[1]};
  r.data["dofs"] = cell.dofs;
  write_nodal(r, "cell.csv", cell.grid, {"Z1", "Z2"}, {&cell.Z1, &cell.Z2});
}

void run_homogenize(Run& r) {
  const auto& c = r.cfg;
  const auto A = c.coefficient.build();
  const auto cell = solve_cell(A, c.cell_n, {c.cell_tol, c.solver_maxit, true});
  const auto A0 = homogenized_matrix(A, cell);
  const auto sol = solve_homogenized(A0, c.source.build(), c.omega, c.grid, r.solver());
  r.data["A0"] = matrix_json(A0);
  r.data["iterations"] = sol.report.iterations;
  r.data["residual"] = sol.report.residual;
  r.data["l2_norm"] = l2_norm(sol.u);
  r.check("solver", sol.report.residual <= c.solver_tol,
          fmt("%d iterations, relative residual %.2e", sol.report.iterations, sol.report.residual));
  if (c.source.preset == "constant" || c.source.preset == "zero") {
    const double level = c.source.preset == "zero" ? 0.0 : c.source.value;
    double dev = 0.0;
    for (double v : sol.u.values) dev = std::max(dev, std::abs(v - level));
    const double tol = 10.0 * c.solver_tol * std::max(1.0, std::abs(level));
    r.check("constant_solution", dev <= tol, fmt("max |u - %g| = %.2e", level, dev));
  }
  write_nodal(r, "homogenized.csv", sol.u.grid, {"u"}, {&sol.u});
}

void run_converge(Run& r) {
  const auto& c = r.cfg;
  const auto study = convergence_study(c.coefficient.build(), c.source.build(), c.omega, c.eps, c.grid, c.cell_n, r.solver());
  {
    Csv csv(r.file("converge.csv"),
            {"eps", "lambda_measure", "l2_gap", "energy_eps", "energy_hom", "energy_gap", "iterations"});
    for (const auto& row : study.rows) {
      csv.cell(row.eps).cell(row.lambda_measure).cell(row.l2_gap).cell(row.energy_eps).cell(row.energy_hom);
      csv.cell(row.energy_gap).cell(double(row.iterations));
      csv.end();
    }
  }
  {
    Csv csv(r.file("pairing.csv"), {"eps", "member", "interior_gap", "full_gap"});
    for (const auto& row : study.rows)
      for (std::size_t b = 0; b < study.battery.size(); ++b) {
        csv.cell(row.eps).cell(study.battery[b].name).cell(row.pairing_gaps[b]).cell(row.full_pairing_gaps[b]);
        csv.end();
      }
  }
  std::vector<double> l2;
  json rows = json::array();
  for (const auto& row : study.rows) {
    l2.push_back(row.l2_gap);
    rows.push_back({{"eps", row.eps}, {"lambda_measure", row.lambda_measure}, {"l2_gap", row.l2_gap},
                    {"energy_gap", row.energy_gap}, {"iterations", row.iterations}});
  }
  r.data["A0"] = matrix_json(study.A0);
  r.data["rows"] = rows;
  r.check("l2_decreasing", strictly_decreasing(l2),
          fmt("L2 gaps %s, final/initial %.3f", join(l2).c_str(), l2.back() / l2.front()));

  std::vector<std::string> failing;
  for (std::size_t b = 0; b < study.battery.size(); ++b) {
    std::vector<double> g;
    for (const auto& row : study.rows) g.push_back(row.pairing_gaps[b]);
    if (!strictly_decreasing(g)) failing.push_back(study.battery[b].name);
  }
  std::string detail = fmt("%zu of %zu members decreasing", study.battery.size() - failing.size(), study.battery.size());
  for (std::size_t i = 0; i < failing.size(); ++i) detail += (i ? ", " : "; not: ") + failing[i];
  r.data["pairing_not_decreasing"] = failing;
  r.check("pairing_decreasing", failing.empty(), detail, false);
}

void run_control(Run& r) {
  const auto& c = r.cfg;
  ControlProblem p;
  p.A = c.coefficient.build();
  p.f = c.source.build();
  p.rho = c.rho;
  p.eps = c.eps.front();
  p.omega = c.omega;
  p.grid = c.grid;
  p.control_n = c.control_n;
  p.solver = r.solver();
  const ControlDiscretization d(p);
  const auto sol = optimize(d, c.control_tol, c.control_maxit);
  const double optres = optimality_residual(sol, d, control_battery());
  const auto image = d.characterize(d.solve_adjoint(d.solve_state(sol.theta_bar)), ControlNormalization::CoveredMeasure);
  double scale = 0.0;
  for (double v : image.values) scale = std::max(scale, std::abs(v));
  const double diff = max_abs_diff(image, sol.theta_bar);
  const double consistency = scale > 0.0 ? diff / scale : diff;

  r.data["J"] = sol.J;
  r.data["iterations"] = sol.iterations;
  r.data["relaxation"] = sol.relaxation;
  r.data["optimality_residual"] = optres;
  r.data["consistency"] = consistency;
  r.data["cells"] = d.decomposition().interior.size();
  r.check("optimality", optres <= 1e-6, fmt("battery residual %.2e", optres));
  r.check("consistency", consistency <= 1e-8, fmt("|theta - characterize(v)| / |theta| = %.2e", consistency));

  {
    Csv csv(r.file("theta.csv"), {"y1", "y2", "y3", "theta"});
    const auto& g = sol.theta_bar.grid;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const Point y = g.node(i);
      csv.cell(y.x1).cell(y.x2).cell(y.x3).cell(sol.theta_bar.values[i]);
      csv.end();
    }
  }
  Csv csv(r.file("history.csv"), {"iteration", "residual"});
  for (std::size_t i = 0; i < sol.residual_history.size(); ++i) {
    csv.cell(double(i)).cell(sol.residual_history[i]);
    csv.end();
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s << '\n';
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  Run r{cfg, out_dir, {}, json::object()};
  r.report.command = cfg.command;
  json error;
  try {
    switch (cfg.command) {
      case Command::verify: run_verify(r); break;
      case Command::unfold_demo: run_unfold_demo(r); break;
      case Command::cell: run_cell(r); break;
      case Command::homogenize: run_homogenize(r); break;
      case Command::converge: run_converge(r); break;
      case Command::control: run_control(r); break;
    }
  } catch (const NotConverged& e) {
    r.report.numerical_failure = true;
    error = {{"type", "solver_not_converged"}, {"message", e.what()}, {"residual", e.residual},
             {"iterations", e.iterations}};
  } catch (const ControlNotConverged& e) {
    r.report.numerical_failure = true;
    error = {{"type", "control_not_converged"}, {"message", e.what()}, {"history", e.history}};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  r.report.passed = !r.report.numerical_failure &&
                    std::all_of(r.report.checks.begin(), r.report.checks.end(),
                                [](const Check& c) { return c.passed || !c.gating; });
  json checks = json::array();
  for (const auto& c : r.report.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"gating", c.gating}, {"detail", c.detail}});
  json result = {{"command", command_name(cfg.command)}, {"passed", r.report.passed}, {"config", config_json(cfg)},
                 {"checks", checks},  {"data", r.data}};
  if (!error.is_null()) result["error"] = error;
  r.report.result_json = result.dump(2);
  write_text(r.file("result.json"), r.report.result_json);

  r.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.report.files.push_back("run_info.json");
  const json info = {{"version", kVersion},      {"command", command_name(cfg.command)},
                     {"started_utc", started},   {"wall_seconds", r.report.wall_seconds},
                     {"threads", thread_count()}, {"files", r.report.files}};
  write_text(out_dir / "run_info.json", info.dump(2));
  return r.report;
}

}  // namespace hunfold
