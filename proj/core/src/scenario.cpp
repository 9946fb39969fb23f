#include "phinv/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "phinv/error.hpp"

namespace phinv {

namespace {

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// CoefficientFunction

CoefficientFunction CoefficientFunction::constant(double c) {
  CoefficientFunction f;
  f.kind = Kind::constant;
  f.p0 = c;
  return f;
}

CoefficientFunction CoefficientFunction::linear(double a) {
  CoefficientFunction f;
  f.kind = Kind::linear;
  f.p0 = a;
  return f;
}

CoefficientFunction CoefficientFunction::sin_mod(double w0, double eps, double nu) {
  CoefficientFunction f;
  f.kind = Kind::sin_mod;
  f.p0 = w0;
  f.p1 = eps;
  f.p2 = nu;
  return f;
}

CoefficientFunction CoefficientFunction::table(std::string path, std::vector<double> t,
                                               std::vector<double> v) {
  if (t.size() != v.size() || t.size() < 2) {
    throw ValidationError("table function needs at least two (t, value) rows");
  }
  for (size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw ValidationError("table times must be strictly increasing");
    }
  }
  CoefficientFunction f;
  f.kind = Kind::table;
  f.table_path = std::move(path);
  f.table_t = std::move(t);
  f.table_v = std::move(v);
  return f;
}

namespace {

size_t table_segment(const CoefficientFunction& f, double t) {
  const auto& ts = f.table_t;
  if (t < ts.front() || t > ts.back()) {
    throw ValidationError("table function '" + f.table_path + "' evaluated at t=" +
                          format_real(t) + " outside [" + format_real(ts.front()) + ", " +
                          format_real(ts.back()) + "]");
  }
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t i = static_cast<size_t>(it - ts.begin());
  if (i == 0) i = 1;
  if (i >= ts.size()) i = ts.size() - 1;
  return i - 1;
}

}  // namespace

double CoefficientFunction::value(double t) const {
  switch (kind) {
    case Kind::constant:
      return p0;
    case Kind::linear:
      return p0 * t;
    case Kind::sin_mod:
      return p0 * (1.0 + p1 * std::sin(p2 * t));
    case Kind::table: {
      size_t i = table_segment(*this, t);
      double w = (t - table_t[i]) / (table_t[i + 1] - table_t[i]);
      return (1.0 - w) * table_v[i] + w * table_v[i + 1];
    }
  }
  return 0.0;
}

double CoefficientFunction::derivative(double t) const {
  switch (kind) {
    case Kind::constant:
      return 0.0;
    case Kind::linear:
      return p0;
    case Kind::sin_mod:
      return p0 * p1 * p2 * std::cos(p2 * t);
    case Kind::table: {
      size_t i = table_segment(*this, t);
      auto slope = [&](size_t k) {
        return (table_v[k + 1] - table_v[k]) / (table_t[k + 1] - table_t[k]);
      };
      // At an interior node the one-sided slopes are averaged.
      if (t == table_t[i] && i > 0) return 0.5 * (slope(i - 1) + slope(i));
      if (t == table_t[i + 1] && i + 2 < table_t.size()) return 0.5 * (slope(i) + slope(i + 1));
      return slope(i);
    }
  }
  return 0.0;
}

std::string CoefficientFunction::literal() const {
  switch (kind) {
    case Kind::constant:
      return "const(" + format_real(p0) + ")";
    case Kind::linear:
      return "linear(" + format_real(p0) + ")";
    case Kind::sin_mod:
      return "sin_mod(" + format_real(p0) + ", " + format_real(p1) + ", " + format_real(p2) + ")";
    case Kind::table:
      return "table(" + table_path + ")";
  }
  return {};
}

CoefficientFunction CoefficientFunction::negated() const {
  CoefficientFunction f = *this;
  switch (kind) {
    case Kind::constant:
    case Kind::linear:
    case Kind::sin_mod:
      f.p0 = -p0;
      break;
    case Kind::table:
      for (double& v : f.table_v) v = -v;
      break;
  }
  return f;
}

Hamiltonian Hamiltonian::from(const Scenario& s, bool flip_lambda) {
  return Hamiltonian{s.mass, s.hbar, s.omega, flip_lambda ? s.lambda.negated() : s.lambda};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Pos {
  int line;
  int column;
};

struct Record {
  std::string text;
  std::vector<Pos> pos;  // one entry per character of text
};

[[noreturn]] void syntax_error(const std::string& msg, Pos p) {
  throw ConfigSyntaxError(msg, p.line, p.column);
}

std::vector<Record> split_records(std::string_view text) {
  std::vector<Record> records;
  Record cur;
  int line = 1;
  int col = 1;
  int depth = 0;
  Pos open_pos{1, 1};
  bool in_comment = false;

  auto flush = [&]() {
    records.push_back(std::move(cur));
    cur = Record{};
  };

  for (char c : text) {
    Pos here{line, col};
    if (c == '\n') {
      in_comment = false;
      if (depth == 0) {
        flush();
      } else {
        cur.text.push_back(' ');
        cur.pos.push_back(here);
      }
      ++line;
      col = 1;
      continue;
    }
    ++col;
    if (in_comment) continue;
    if (c == '#') {
      in_comment = true;
      continue;
    }
    if (c == '(' || c == '[') {
      if (depth == 0) open_pos = here;
      ++depth;
    } else if (c == ')' || c == ']') {
      if (depth == 0) syntax_error(std::string("unbalanced '") + c + "'", here);
      --depth;
    } else if (c == ',' && depth == 0) {
      flush();
      continue;
    }
    cur.text.push_back(c);
    cur.pos.push_back(here);
  }
  if (depth != 0) syntax_error("unclosed bracket", open_pos);
  flush();
  return records;
}

class Cursor {
 public:
  Cursor(const Record& rec, size_t begin, size_t end) : rec_(rec), i_(begin), end_(end) {}

  void skip_ws() {
    while (i_ < end_ && std::isspace(static_cast<unsigned char>(rec_.text[i_]))) ++i_;
  }

  bool at_end() {
    skip_ws();
    return i_ >= end_;
  }

  Pos pos() const {
    if (i_ < rec_.pos.size()) return rec_.pos[i_];
    if (!rec_.pos.empty()) {
      Pos p = rec_.pos.back();
      p.column += 1;
      return p;
    }
    return {1, 1};
  }

  [[noreturn]] void fail(const std::string& msg) const { syntax_error(msg, pos()); }

  void expect(char c) {
    skip_ws();
    if (i_ >= end_ || rec_.text[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  bool accept(char c) {
    skip_ws();
    if (i_ < end_ && rec_.text[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  double number() {
    skip_ws();
    const char* first = rec_.text.data() + i_;
    const char* last = rec_.text.data() + end_;
    double v = 0.0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr == first) fail("expected a number");
    i_ += static_cast<size_t>(res.ptr - first);
    return v;
  }

  long integer() {
    skip_ws();
    const char* first = rec_.text.data() + i_;
    const char* last = rec_.text.data() + end_;
    long v = 0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr == first) fail("expected an integer");
    i_ += static_cast<size_t>(res.ptr - first);
    return v;
  }

  std::string identifier() {
    skip_ws();
    size_t start = i_;
    while (i_ < end_ && (std::isalnum(static_cast<unsigned char>(rec_.text[i_])) ||
                         rec_.text[i_] == '_')) {
      ++i_;
    }
    if (start == i_) fail("expected an identifier");
    return rec_.text.substr(start, i_ - start);
  }

  std::string raw_until(char c) {
    skip_ws();
    size_t start = i_;
    while (i_ < end_ && rec_.text[i_] != c) ++i_;
    std::string s = rec_.text.substr(start, i_ - start);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
  }

  void finish() {
    if (!at_end()) fail("unexpected trailing characters");
  }

 private:
  const Record& rec_;
  size_t i_;
  size_t end_;
};

std::pair<std::vector<double>, std::vector<double>> read_table_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open table file '" + path.string() + "'");
  std::vector<double> ts;
  std::vector<double> vs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double t = 0.0;
    double v = 0.0;
    if (!(ls >> t >> v)) {
      if (ts.empty()) continue;  // header row
      throw ValidationError("table file '" + path.string() + "' line " + std::to_string(lineno) +
                            ": expected two numeric columns");
    }
    ts.push_back(t);
    vs.push_back(v);
  }
  return {std::move(ts), std::move(vs)};
}

CoefficientFunction parse_function(Cursor& c, const std::filesystem::path& base_dir) {
  Pos at = c.pos();
  std::string name = c.identifier();
  c.expect('(');
  CoefficientFunction f;
  if (name == "const") {
    f = CoefficientFunction::constant(c.number());
  } else if (name == "linear") {
    f = CoefficientFunction::linear(c.number());
  } else if (name == "sin_mod") {
    double w0 = c.number();
    c.expect(',');
    double eps = c.number();
    c.expect(',');
    double nu = c.number();
    f = CoefficientFunction::sin_mod(w0, eps, nu);
  } else if (name == "table") {
    std::string path = c.raw_until(')');
    if (path.empty()) c.fail("expected a table path");
    std::filesystem::path full = path;
    if (full.is_relative() && !base_dir.empty()) full = base_dir / full;
    auto [ts, vs] = read_table_csv(full);
    f = CoefficientFunction::table(path, std::move(ts), std::move(vs));
  } else {
    syntax_error("unknown function literal '" + name + "'", at);
  }
  c.expect(')');
  return f;
}

std::vector<double> parse_real_list(Cursor& c) {
  std::vector<double> out;
  if (!c.accept('[')) {
    out.push_back(c.number());
    return out;
  }
  if (c.accept(']')) return out;
  do {
    out.push_back(c.number());
  } while (c.accept(','));
  c.expect(']');
  return out;
}

std::vector<int> parse_int_list(Cursor& c) {
  std::vector<int> out;
  if (!c.accept('[')) {
    out.push_back(static_cast<int>(c.integer()));
    return out;
  }
  do {
    out.push_back(static_cast<int>(c.integer()));
  } while (c.accept(','));
  c.expect(']');
  return out;
}

using TolField = double Tolerances::*;
const std::map<std::string, TolField>& tolerance_keys() {
  static const std::map<std::string, TolField> keys = {
      {"tol.ph_relation", &Tolerances::ph_relation},
      {"tol.liouville", &Tolerances::liouville},
      {"tol.similarity", &Tolerances::similarity},
      {"tol.rho_h_rho_inv", &Tolerances::rho_h_rho_inv},
      {"tol.spectrum", &Tolerances::spectrum},
      {"tol.tdse", &Tolerances::tdse},
      {"tol.propagator", &Tolerances::propagator},
      {"tol.eta_norm", &Tolerances::eta_norm},
      {"tol.orthonormality", &Tolerances::orthonormality},
      {"tol.phase_imag", &Tolerances::phase_imag},
      {"tol.phase_overlap", &Tolerances::phase_overlap},
  };
  return keys;
}

void parse_value(Scenario& s, const std::string& key, Cursor& c, Pos key_pos,
                 const std::filesystem::path& base_dir) {
  if (key == "m") {
    s.mass = c.number();
  } else if (key == "hbar") {
    s.hbar = c.number();
  } else if (key == "omega") {
    s.omega = parse_function(c, base_dir);
  } else if (key == "lambda") {
    s.lambda = parse_function(c, base_dir);
  } else if (key == "t") {
    c.expect('[');
    s.t0 = c.number();
    c.expect(',');
    s.t1 = c.number();
    c.expect(']');
  } else if (key == "steps") {
    s.n_steps = static_cast<int>(c.integer());
  } else if (key == "n") {
    s.quantum_n = parse_int_list(c);
  } else if (key == "grid_L") {
    s.grid_L = c.number();
  } else if (key == "grid_N") {
    s.grid_N = static_cast<int>(c.integer());
  } else if (key == "fock_dim") {
    s.fock_dim = static_cast<int>(c.integer());
  } else if (key == "sigma0") {
    s.sigma0 = c.number();
  } else if (key == "sigma_dot0") {
    s.sigma_dot0 = c.number();
  } else if (key == "alpha0") {
    s.alpha0 = c.number();
  } else if (key == "alpha_dot0") {
    c.skip_ws();
    Cursor probe = c;
    bool is_word = false;
    try {
      is_word = probe.identifier() == "particular";
    } catch (const ConfigSyntaxError&) {
    }
    if (is_word) {
      c.identifier();
      s.alpha_dot0_particular = true;
      s.alpha_dot0.reset();
    } else {
      s.alpha_dot0 = c.number();
      s.alpha_dot0_particular = false;
    }
  } else if (key == "omega_ref") {
    s.omega_ref = c.number();
  } else if (key == "edge_band") {
    s.edge_band = static_cast<int>(c.integer());
  } else if (key == "dt_prop") {
    s.dt_prop = c.number();
  } else if (key == "dt_fd") {
    s.dt_fd = c.number();
  } else if (key == "save_t") {
    s.save_t = parse_real_list(c);
  } else if (key == "workers") {
    s.workers = static_cast<int>(c.integer());
  } else if (auto it = tolerance_keys().find(key); it != tolerance_keys().end()) {
    s.tol.*(it->second) = c.number();
  } else {
    syntax_error("unknown key '" + key + "'", key_pos);
  }
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  Scenario s;
  std::vector<std::string> seen;
  for (const Record& rec : split_records(text)) {
    size_t first = rec.text.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    size_t eq = rec.text.find('=');
    if (eq == std::string::npos) syntax_error("expected 'key = value'", rec.pos[first]);
    std::string key = rec.text.substr(first, eq - first);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    if (key.empty()) syntax_error("missing key before '='", rec.pos[eq]);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      syntax_error("duplicate key '" + key + "'", rec.pos[first]);
    }
    seen.push_back(key);
    Cursor c(rec, eq + 1, rec.text.size());
    if (c.at_end()) c.fail("missing value for '" + key + "'");
    parse_value(s, key, c, rec.pos[first], base_dir);
    c.finish();
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto real_list = [](const std::vector<double>& v) {
    std::string r = "[";
    for (size_t i = 0; i < v.size(); ++i) r += (i ? ", " : "") + format_real(v[i]);
    return r + "]";
  };
  out << "m = " << format_real(s.mass) << "\n";
  out << "hbar = " << format_real(s.hbar) << "\n";
  out << "omega = " << s.omega.literal() << "\n";
  out << "lambda = " << s.lambda.literal() << "\n";
  out << "t = [" << format_real(s.t0) << ", " << format_real(s.t1) << "]\n";
  out << "steps = " << s.n_steps << "\n";
  out << "n = [";
  for (size_t i = 0; i < s.quantum_n.size(); ++i) out << (i ? ", " : "") << s.quantum_n[i];
  out << "]\n";
  out << "grid_L = " << format_real(s.grid_L) << "\n";
  out << "grid_N = " << s.grid_N << "\n";
  out << "fock_dim = " << s.fock_dim << "\n";
  if (s.sigma0) out << "sigma0 = " << format_real(*s.sigma0) << "\n";
  if (s.sigma_dot0) out << "sigma_dot0 = " << format_real(*s.sigma_dot0) << "\n";
  if (s.alpha0) out << "alpha0 = " << format_real(*s.alpha0) << "\n";
  if (s.alpha_dot0_particular) {
    out << "alpha_dot0 = particular\n";
  } else if (s.alpha_dot0) {
    out << "alpha_dot0 = " << format_real(*s.alpha_dot0) << "\n";
  }
  if (s.omega_ref) out << "omega_ref = " << format_real(*s.omega_ref) << "\n";
  out << "edge_band = " << s.edge_band << "\n";
  out << "dt_prop = " << format_real(s.dt_prop) << "\n";
  out << "dt_fd = " << format_real(s.dt_fd) << "\n";
  out << "save_t = " << real_list(s.save_t) << "\n";
  out << "workers = " << s.workers << "\n";
  for (const auto& [key, field] : tolerance_keys()) {
    out << key << " = " << format_real(s.tol.*field) << "\n";
  }
  return out.str();
}

void validate(const Scenario& s) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  require(std::isfinite(s.mass) && s.mass > 0.0, "mass m must be positive");
  require(std::isfinite(s.hbar) && s.hbar > 0.0, "hbar must be positive");
  require(std::isfinite(s.t0) && std::isfinite(s.t1) && s.t1 > s.t0, "t1 must exceed t0");
  require(s.n_steps >= 2, "steps must be at least 2");
  require(!s.quantum_n.empty(), "n must list at least one mode index");
  for (int n : s.quantum_n) require(n >= 0 && n <= 200, "mode indices n must lie in [0, 200]");
  require(std::isfinite(s.grid_L) && s.grid_L > 0.0, "grid_L must be positive");
  require(s.grid_N >= 128, "grid_N must be at least 128");
  require(s.fock_dim >= 16, "fock_dim must be at least 16");
  require(s.edge_band >= 0 && s.edge_band < s.fock_dim, "edge_band must lie in [0, fock_dim)");
  require(s.dt_prop > 0.0 && s.dt_fd > 0.0, "dt_prop and dt_fd must be positive");
  require(s.workers >= 1, "workers must be at least 1");
  if (s.sigma0) require(*s.sigma0 > 0.0, "sigma0 must be positive");
  if (s.omega_ref) require(*s.omega_ref > 0.0, "omega_ref must be positive");
  if (s.alpha_dot0_particular) {
    require(s.omega.kind == CoefficientFunction::Kind::constant &&
                s.lambda.kind == CoefficientFunction::Kind::linear,
            "alpha_dot0 = particular needs omega = const(w0) and lambda = linear(a)");
  }
  for (int k = 0; k <= s.n_steps; ++k) {
    double t = s.mesh_time(k);
    double w = 0.0;
    double l = 0.0;
    try {
      w = s.omega.value(t);
      l = s.lambda.value(t);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("coefficient table does not cover the time mesh: ") +
                            e.what());
    }
    require(std::isfinite(w) && w > 0.0, "omega must be positive");
    require(std::isfinite(l), "lambda must be a finite real value");
  }
}

double eval_omega(const Scenario& s, double t) { return s.omega.value(t); }
double eval_lambda(const Scenario& s, double t) { return s.lambda.value(t); }
double eval_lambda_dot(const Scenario& s, double t) { return s.lambda.derivative(t); }

}  // namespace phinv
