#include "monocert/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace monocert {

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Certified: return "CERTIFIED";
    case Verdict::Rejected: return "REJECTED";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

bool is_success(Verdict v) noexcept { return v == Verdict::Pass || v == Verdict::Certified; }

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string format_point(const Point& p, int digits) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ' ';
    out += format_number(p[i], digits);
  }
  return out;
}

namespace {

std::string render(const Report::Value& v, int digits) {
  return std::visit(
      [digits](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(x, digits);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return format_point(x, digits);
        }
      },
      v);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

Report::Report(std::string check, Verdict verdict) : check_(std::move(check)), verdict_(verdict) {}

Report& Report::set(const std::string& key, Value value) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
  if (it != entries_.end()) {
    it->second = std::move(value);
  } else {
    entries_.emplace_back(key, std::move(value));
  }
  return *this;
}

bool Report::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const Report::Value& Report::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::PreconditionViolated, "report '" + check_ + "' has no key '" + key + "'");
}

double Report::number(const std::string& key) const {
  const Value& v = get(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw Error(ErrorCode::PreconditionViolated, "report key '" + key + "' is not numeric");
}

const Point& Report::point(const std::string& key) const {
  const Value& v = get(key);
  if (const auto* p = std::get_if<Point>(&v)) return *p;
  throw Error(ErrorCode::PreconditionViolated, "report key '" + key + "' is not a point");
}

void Report::write_text(std::ostream& os) const {
  os << "check: " << check_ << '\n' << "status: " << to_string(verdict_) << '\n';
  for (const auto& [k, v] : entries_) os << k << ": " << render(v, 6) << '\n';
}

void Report::write_csv(std::ostream& os) const {
  os << "key,value\n" << "check," << csv_cell(check_) << '\n' << "status," << to_string(verdict_) << '\n';
  for (const auto& [k, v] : entries_) os << csv_cell(k) << ',' << csv_cell(render(v, 17)) << '\n';
}

std::string Report::text() const {
  std::ostringstream os;
  write_text(os);
  return os.str();
}

}  // namespace monocert
