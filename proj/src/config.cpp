#include "monocert/config.hpp"

#include "monocert/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace monocert {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

// Recursive-descent reader for one value; `pos` walks through `text`.
class ValueReader {
 public:
  ValueReader(const std::string& text, std::size_t line, const std::function<void(const std::string&)>& fail)
      : text_(text), line_(line), fail_(fail) {}

  ConfigValue read_all() {
    ConfigValue v = read();
    skip_space();
    if (pos_ != text_.size()) fail_("unexpected '" + text_.substr(pos_, 1) + "' after value");
    return v;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  ConfigValue read() {
    skip_space();
    ConfigValue v;
    v.line = line_;
    if (pos_ < text_.size() && text_[pos_] == '[') {
      ++pos_;
      v.is_list = true;
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        v.items.push_back(read());
        skip_space();
        if (pos_ >= text_.size()) fail_("unterminated list");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail_("expected ',' or ']' in list");
      }
    }
    // a scalar runs to the next ',' or ']' outside parentheses
    const std::size_t start = pos_;
    int depth = 0;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == '[') fail_("'[' inside a scalar value");
      if (depth == 0 && (c == ',' || c == ']')) break;
      ++pos_;
    }
    v.text = trim(std::string_view(text_).substr(start, pos_ - start));
    if (v.text.empty()) fail_("empty value");
    return v;
  }

  const std::string& text_;
  std::size_t line_;
  const std::function<void(const std::string&)>& fail_;
  std::size_t pos_ = 0;
};

int bracket_balance(const std::string& s) {
  int b = 0;
  for (char c : s) {
    if (c == '[') ++b;
    if (c == ']') --b;
  }
  return b;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "dimension", "f",          "g",           "h",           "d",        "degree",     "A",
      "B",         "box",        "x0",          "w",           "path.rho", "path.sbar",  "path.alpha",
      "path.eps",  "path.grid",  "psi",         "delay.kind",  "delay.params", "delay.expr", "history",
      "history.expr", "history.domain", "history.samples"};
  return keys;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, std::string name) {
  ConfigFile cfg;
  cfg.name_ = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const std::size_t start_line = lineno;
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorCode::ConfigParseError, cfg.name_ + ":" + std::to_string(start_line) + ": " + msg);
    };
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (!known_keys().contains(key)) fail("unknown key '" + key + "'");
    if (cfg.entries_.contains(key)) fail("duplicate key '" + key + "'");
    // lists may continue over several lines until the brackets balance
    while (bracket_balance(value) > 0) {
      if (!std::getline(in, line)) fail("unterminated list for '" + key + "'");
      ++lineno;
      value += ' ' + trim(strip_comment(line));
    }
    if (value.empty()) fail("missing value for '" + key + "'");
    const std::function<void(const std::string&)> fail_fn = fail;
    ConfigValue v = ValueReader(value, start_line, fail_fn).read_all();
    cfg.entries_.emplace(key, std::move(v));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  return parse(in, path.string());
}

const ConfigValue& ConfigFile::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorCode::ConfigParseError, name_ + ": missing key '" + key + "'");
  return it->second;
}

void ConfigFile::fail(const ConfigValue& v, const std::string& message) const {
  throw Error(ErrorCode::ConfigParseError, name_ + ":" + std::to_string(v.line) + ": " + message);
}

namespace {

class Reader {
 public:
  explicit Reader(const ConfigFile& file) : file_(file) {}

  template <typename Fn>
  auto located(const ConfigValue& v, Fn&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigParseError) throw;
      throw Error(e.code(), file_.name() + ":" + std::to_string(v.line) + ": " + e.detail());
    }
  }

  double number(const ConfigValue& v) const {
    if (v.is_list) file_.fail(v, "expected a number, got a list");
    return located(v, [&] {
      const double x = parse_expr(v.text).eval({});
      if (!std::isfinite(x)) file_.fail(v, "value is not finite");
      return x;
    });
  }

  std::vector<std::string> strings(const ConfigValue& v, std::size_t n) const {
    if (!v.is_list) file_.fail(v, "expected a list");
    if (v.items.size() != n) {
      file_.fail(v, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.items.size()));
    }
    std::vector<std::string> out;
    for (const auto& item : v.items) {
      if (item.is_list) file_.fail(item, "nested list where an expression was expected");
      out.push_back(item.text);
    }
    return out;
  }

  Point point(const ConfigValue& v, std::size_t n) const {
    if (!v.is_list) file_.fail(v, "expected a list");
    if (v.items.size() != n) {
      file_.fail(v, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.items.size()));
    }
    Point p;
    for (const auto& item : v.items) p.push_back(number(item));
    return p;
  }

  Eigen::MatrixXd matrix(const ConfigValue& v, std::size_t n) const {
    if (!v.is_list || v.items.size() != n) file_.fail(v, "expected " + std::to_string(n) + " rows");
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point row = point(v.items[i], n);
      for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
    }
    return m;
  }

  ExprSystem system(const ConfigValue& v, std::size_t n, VariableRoles roles) const {
    const auto src = strings(v, n);
    return located(v, [&] { return ExprSystem::parse(n, src, roles); });
  }

 private:
  const ConfigFile& file_;
};

}  // namespace

SystemConfig SystemConfig::from_file(const ConfigFile& file) {
  const Reader rd(file);
  SystemConfig c;
  c.name = file.name();
  const ConfigValue& dim = file.at("dimension");
  const double nd = rd.number(dim);
  if (!(nd >= 1) || nd != std::floor(nd) || nd > 64) file.fail(dim, "dimension must be an integer in [1, 64]");
  const auto n = static_cast<std::size_t>(nd);
  c.dimension = n;

  auto opt = [&](const char* key) -> const ConfigValue* { return file.has(key) ? &file.at(key) : nullptr; };

  if (auto* v = opt("f")) c.f = rd.system(*v, n, VariableRoles::StateOnly);
  if (auto* v = opt("g")) c.g = rd.system(*v, n, VariableRoles::StateAndDelayed);
  if (auto* v = opt("h")) c.h = rd.system(*v, n, VariableRoles::StateOnly);
  if (auto* v = opt("d")) c.d = rd.system(*v, n, VariableRoles::StateOnly);
  if (auto* v = opt("degree")) c.degree = rd.number(*v);
  if (auto* v = opt("A")) c.a = rd.matrix(*v, n);
  if (auto* v = opt("B")) c.b = rd.matrix(*v, n);
  if (auto* v = opt("box")) c.box = rd.point(*v, n);
  if (auto* v = opt("x0")) c.x0 = rd.point(*v, n);
  if (auto* v = opt("w")) c.w = rd.point(*v, n);
  if (c.b && !c.a) file.fail(file.at("B"), "B requires A");
  if (c.h.has_value() != c.d.has_value()) file.fail(file.at(c.h ? "h" : "d"), "h and d must be given together");

  if (auto* v = opt("path.rho")) {
    const auto rho = rd.strings(*v, n);
    const double sbar = rd.number(file.at("path.sbar"));
    std::vector<std::string> alpha;
    if (auto* a = opt("path.alpha")) alpha = rd.strings(*a, n);
    const double eps = opt("path.eps") ? rd.number(file.at("path.eps")) : PathCandidate::kDefaultEps;
    const double grid = opt("path.grid") ? rd.number(file.at("path.grid")) : 1024;
    if (!(grid >= 2)) file.fail(file.at("path.grid"), "path.grid must be >= 2");
    c.path = rd.located(*v, [&] {
      return PathCandidate::parse(rho, sbar, alpha, eps, static_cast<std::size_t>(grid));
    });
  } else {
    for (const char* k : {"path.sbar", "path.alpha", "path.eps", "path.grid"}) {
      if (auto* v = opt(k)) file.fail(*v, std::string(k) + " requires path.rho");
    }
  }
  if (auto* v = opt("psi")) {
    const auto src = rd.strings(*v, n);
    c.psi = rd.located(*v, [&] { return ScalingPsi::parse(src); });
  }

  if (auto* v = opt("delay.kind")) {
    if (v->is_list) file.fail(*v, "delay.kind must be a name");
    std::string spec = v->text;
    if (spec == "expr") {
      const ConfigValue& e = file.at("delay.expr");
      if (e.is_list) file.fail(e, "delay.expr must be an expression in t");
      spec += ":" + e.text;
    } else if (spec != "zero") {
      const ConfigValue& p = file.at("delay.params");
      if (!p.is_list) file.fail(p, "delay.params must be a list");
      std::string params;
      for (const auto& item : p.items) params += (params.empty() ? "" : ",") + format_number(rd.number(item), 17);
      spec += ":" + params;
    }
    c.delay = rd.located(*v, [&] { return DelayLaw::parse(spec); });
  } else {
    for (const char* k : {"delay.params", "delay.expr"}) {
      if (auto* v = opt(k)) file.fail(*v, std::string(k) + " requires delay.kind");
    }
  }

  const int histories = (opt("history") ? 1 : 0) + (opt("history.expr") ? 1 : 0) + (opt("history.samples") ? 1 : 0);
  if (histories > 1) file.fail(*opt(opt("history") ? "history" : "history.expr"), "only one history form allowed");
  if (auto* v = opt("history")) {
    const Point p = rd.point(*v, n);
    c.history = rd.located(*v, [&] { return InitialHistory::constant(p); });
  }
  if (auto* v = opt("history.expr")) {
    const auto src = rd.strings(*v, n);
    const double domain = rd.number(file.at("history.domain"));
    c.history = rd.located(*v, [&] {
      std::vector<Expr> comps;
      for (const auto& s : src) comps.push_back(parse_expr(s));
      return InitialHistory::expression(std::move(comps), domain);
    });
  }
  if (auto* v = opt("history.samples")) {
    if (!v->is_list || v->items.empty()) file.fail(*v, "history.samples must be a list of [t, x1..xn] rows");
    std::vector<double> times;
    std::vector<Point> values;
    for (const auto& row : v->items) {
      Point r = rd.point(row, n + 1);
      times.push_back(r.front());
      values.emplace_back(r.begin() + 1, r.end());
    }
    c.history = rd.located(*v, [&] { return InitialHistory::samples(std::move(times), std::move(values)); });
  }
  return c;
}

SystemConfig SystemConfig::load(const std::filesystem::path& path) { return from_file(ConfigFile::load(path)); }

VectorField SystemConfig::field() const {
  if (f) return VectorField::from_system(*f);
  if (g || (h && d)) return delay_field(DelayLaw::zero()).induced();
  if (a) return VectorField::linear(b ? Eigen::MatrixXd(*a + *b) : *a);
  throw Error(ErrorCode::InvalidConfig, name + ": no vector field (f, g, h/d or A)");
}

DelayField SystemConfig::delay_field(DelaySchedule delays) const {
  if (g) return DelayField::from_system(*g, std::move(delays));
  if (a && b) return DelayField::linear(*a, *b, std::move(delays));
  if (h && d) {
    const auto hf = VectorField::from_system(*h);
    const auto df = VectorField::from_system(*d);
    return DelayField::from_function(
        dimension,
        [hf, df](std::size_t i, std::span<const double> x, std::span<const double> y) {
          return hf.component(i, x) + df.component(i, y);
        },
        std::move(delays));
  }
  throw Error(ErrorCode::InvalidConfig, name + ": no delayed field (g, A with B, or h with d)");
}

BoxSet SystemConfig::region() const {
  if (box) return BoxSet(*box);
  if (w) return BoxSet(*w);
  throw Error(ErrorCode::InvalidConfig, name + ": no box (set box or w)");
}

InitialHistory SystemConfig::initial_history() const {
  if (history) return *history;
  if (x0) return InitialHistory::constant(*x0);
  return InitialHistory::constant(region().upper);
}

std::vector<DelayLaw> load_delay_laws(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open law file '" + path.string() + "'");
  std::vector<DelayLaw> laws;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string spec = trim(strip_comment(line));
    if (spec.empty()) continue;
    try {
      laws.push_back(DelayLaw::parse(spec));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return laws;
}

}  // namespace monocert
