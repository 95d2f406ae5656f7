#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "monocert/model.hpp"

namespace monocert {

/// A scalar (raw text) or a bracketed list of values.
struct ConfigValue {
  std::string text;
  std::vector<ConfigValue> items;
  bool is_list = false;
  std::size_t line = 0;
};

/// Raw `key = value` entries in file order of first appearance.
class ConfigFile {
 public:
  /// Throws ConfigParseError with `name:line`.
  [[nodiscard]] static ConfigFile parse(std::istream& in, std::string name);
  [[nodiscard]] static ConfigFile load(const std::filesystem::path& path);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] bool has(const std::string& key) const { return entries_.contains(key); }
  [[nodiscard]] const ConfigValue& at(const std::string& key) const;
  [[nodiscard]] const std::map<std::string, ConfigValue>& entries() const noexcept { return entries_; }

  /// ConfigParseError located at `v`.
  [[noreturn]] void fail(const ConfigValue& v, const std::string& message) const;

 private:
  std::string name_;
  std::map<std::string, ConfigValue> entries_;
};

/// Typed view of a system config. The schema is documented in docs/config.md.
struct SystemConfig {
  std::string name;
  std::size_t dimension = 0;
  std::optional<ExprSystem> f;
  std::optional<ExprSystem> g;
  std::optional<ExprSystem> h;
  std::optional<ExprSystem> d;
  std::optional<double> degree;
  std::optional<Eigen::MatrixXd> a;
  std::optional<Eigen::MatrixXd> b;
  std::optional<Point> box;
  std::optional<Point> x0;
  std::optional<Point> w;
  std::optional<PathCandidate> path;
  std::optional<ScalingPsi> psi;
  std::optional<DelayLaw> delay;
  std::optional<InitialHistory> history;

  /// Throws ConfigParseError for unknown keys, bad values and dimension
  /// mismatches; semantic errors keep their own code with the location added.
  [[nodiscard]] static SystemConfig from_file(const ConfigFile& file);
  [[nodiscard]] static SystemConfig load(const std::filesystem::path& path);

  [[nodiscard]] bool has_delay_field() const { return g.has_value() || (a && b) || (h && d); }
  /// f, else g(x, x), else A x (+ B x), else h + d. Throws InvalidConfig.
  [[nodiscard]] VectorField field() const;
  /// g, else A x + B y, else h(x) + d(y). Throws InvalidConfig.
  [[nodiscard]] DelayField delay_field(DelaySchedule delays) const;
  /// `box`, else `w`. Throws InvalidConfig.
  [[nodiscard]] BoxSet region() const;
  /// `history`, else φ ≡ x0, else φ ≡ box corner. Throws InvalidConfig.
  [[nodiscard]] InitialHistory initial_history() const;
};

/// One law spec per line (`zero`, `const:c`, ...). Blank lines and `#`
/// comments are skipped. Throws ConfigParseError, InvalidDelayLaw,
/// Assumption1Violated.
[[nodiscard]] std::vector<DelayLaw> load_delay_laws(const std::filesystem::path& path);

}  // namespace monocert
