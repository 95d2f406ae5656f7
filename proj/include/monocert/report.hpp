#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "monocert/model.hpp"

namespace monocert {

enum class Verdict { Pass, Fail, Certified, Rejected, Inconclusive };

[[nodiscard]] const char* to_string(Verdict v) noexcept;
/// Pass and Certified.
[[nodiscard]] bool is_success(Verdict v) noexcept;

/// Ordered key/value record shared by every check. Text output rounds
/// numbers to 6 significant digits, CSV keeps 17.
class Report {
 public:
  using Value = std::variant<bool, std::int64_t, double, std::string, Point>;

  Report(std::string check, Verdict verdict);

  [[nodiscard]] const std::string& check() const noexcept { return check_; }
  [[nodiscard]] Verdict verdict() const noexcept { return verdict_; }
  void set_verdict(Verdict v) noexcept { verdict_ = v; }

  /// Replaces an existing key in place, else appends.
  Report& set(const std::string& key, Value value);
  Report& set(const std::string& key, const char* value) { return set(key, Value(std::string(value))); }
  template <class T>
    requires(std::is_integral_v<T> && !std::is_same_v<T, bool>)
  Report& set(const std::string& key, T value) {
    return set(key, Value(static_cast<std::int64_t>(value)));
  }

  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] const Value& get(const std::string& key) const;
  /// Numeric entry as double; throws PreconditionViolated for other types.
  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] const Point& point(const std::string& key) const;
  [[nodiscard]] const std::vector<std::pair<std::string, Value>>& entries() const noexcept {
    return entries_;
  }

  void write_text(std::ostream& os) const;
  /// Two columns `key,value`; points are space separated inside the cell.
  void write_csv(std::ostream& os) const;
  [[nodiscard]] std::string text() const;

 private:
  std::string check_;
  Verdict verdict_;
  std::vector<std::pair<std::string, Value>> entries_;
};

/// Shortest round-trip formatting at the given significant digits.
[[nodiscard]] std::string format_number(double v, int digits);
[[nodiscard]] std::string format_point(const Point& p, int digits);

}  // namespace monocert
