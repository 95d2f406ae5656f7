#include "monocert/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace monocert {

namespace {

Env state_env(std::span<const double> x) {
  Env env;
  env.x = x;
  return env;
}

double eval_scalar(const Expr& e, VarKind kind, double value) {
  Env env;
  switch (kind) {
    case VarKind::S: env.s = value; break;
    case VarKind::T: env.t = value; break;
    case VarKind::Lambda: env.lambda = value; break;
    default: break;
  }
  return e.eval(env);
}

void require_only(const Expr& e, VarKind kind, ErrorCode code, const std::string& what) {
  for (const Variable& v : e.variables()) {
    if (v.kind != kind) throw Error(code, what + " may not reference '" + v.name() + "'");
  }
}

std::string format_param(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double finite_difference(const std::function<double(std::span<const double>)>& fn,
                         std::span<const double> x, std::size_t j, double h) {
  Point p(x.begin(), x.end());
  const double xj = p[j];
  if (xj - h < 0.0) {
    const double f0 = fn(p);
    p[j] = xj + h;
    return (fn(p) - f0) / h;
  }
  p[j] = xj + h;
  const double fp = fn(p);
  p[j] = xj - h;
  const double fm = fn(p);
  return (fp - fm) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(std::size_t n, ComponentFn f, std::optional<JacobianFn> jac, bool smooth,
                         std::optional<ExprSystem> source)
    : n_(n), f_(std::move(f)), jac_(std::move(jac)), smooth_(smooth), source_(std::move(source)) {
  if (n_ == 0) throw Error(ErrorCode::DimensionMismatch, "vector field needs dimension >= 1");
  check_origin();
}

void VectorField::check_origin() const {
  const Point zero(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double v = f_(i, zero);
    if (!(std::abs(v) <= kOriginTol)) {
      throw Error(ErrorCode::OriginNotEquilibrium,
                  "f_" + std::to_string(i + 1) + "(0) = " + format_param(v));
    }
  }
}

VectorField VectorField::from_system(const ExprSystem& sys) {
  const std::size_t n = sys.dimension();
  for (std::size_t i = 0; i < n; ++i) {
    require_only(sys.component(i), VarKind::X, ErrorCode::InvalidVariableUse,
                 "component " + std::to_string(i + 1) + " of an autonomous field");
  }
  auto comps = std::make_shared<const std::vector<Expr>>(sys.components());
  ComponentFn f = [comps](std::size_t i, std::span<const double> x) {
    return (*comps)[i].eval(state_env(x));
  };
  std::optional<JacobianFn> jac;
  if (sys.is_differentiable()) {
    auto table = std::make_shared<std::vector<std::vector<Expr>>>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        (*table)[i].push_back(sys.component(i).differentiate(Variable::x(j)));
      }
    }
    jac = [table = std::shared_ptr<const std::vector<std::vector<Expr>>>(table)](
              std::size_t i, std::size_t j, std::span<const double> x) {
      return (*table)[i][j].eval(state_env(x));
    };
  }
  const bool smooth = sys.is_differentiable();
  return VectorField(n, std::move(f), std::move(jac), smooth, sys);
}

VectorField VectorField::linear(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "linear field needs a nonempty square matrix");
  }
  auto m = std::make_shared<const Eigen::MatrixXd>(a);
  const auto n = static_cast<std::size_t>(a.rows());
  ComponentFn f = [m, n](std::size_t i, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += (*m)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
    }
    return acc;
  };
  JacobianFn jac = [m](std::size_t i, std::size_t j, std::span<const double>) {
    return (*m)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  return VectorField(n, std::move(f), std::move(jac), true, std::nullopt);
}

VectorField VectorField::from_function(std::size_t n, ComponentFn f, std::optional<JacobianFn> jacobian,
                                       bool smooth) {
  return VectorField(n, std::move(f), std::move(jacobian), smooth, std::nullopt);
}

void VectorField::eval(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) out[i] = f_(i, x);
}

Point VectorField::operator()(std::span<const double> x) const {
  Point out(n_);
  eval(x, out);
  return out;
}

double VectorField::jacobian(std::size_t i, std::size_t j, std::span<const double> x) const {
  if (jac_) return (*jac_)(i, j, x);
  return finite_difference([&](std::span<const double> p) { return f_(i, p); }, x, j);
}

Eigen::MatrixXd VectorField::jacobian_matrix(std::span<const double> x) const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd jm(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      jm(i, j) = jacobian(static_cast<std::size_t>(i), static_cast<std::size_t>(j), x);
    }
  }
  return jm;
}

// ---------------------------------------------------------------------------
// DelayLaw

DelayLaw::DelayLaw(DelayKind kind, std::vector<double> params, std::optional<Expr> tau)
    : kind_(kind), params_(std::move(params)), expr_(std::move(tau)) {}

DelayLaw DelayLaw::zero() { return constant(0.0); }

DelayLaw DelayLaw::constant(double c) {
  if (!std::isfinite(c) || c < 0.0) {
    throw Error(ErrorCode::InvalidDelayLaw, "constant delay must be finite and >= 0");
  }
  DelayLaw law(DelayKind::Constant, {c}, std::nullopt);
  law.tau_max_ = c;
  return law;
}

DelayLaw DelayLaw::sinusoid(double a, double b, double omega) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(omega) || b < 0.0 || a < b) {
    throw Error(ErrorCode::InvalidDelayLaw, "sinusoidal delay a + b*sin(omega*t) needs a >= b >= 0");
  }
  DelayLaw law(DelayKind::Sinusoid, {a, b, omega}, std::nullopt);
  law.check_assumption1({});
  return law;
}

DelayLaw DelayLaw::proportional(double gamma) {
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    throw Error(ErrorCode::InvalidDelayLaw, "proportional delay needs gamma in (0, 1)");
  }
  if (gamma >= 1.0) {
    throw Error(ErrorCode::Assumption1Violated,
                "gamma*t with gamma = " + format_param(gamma) + " keeps t - tau(t) bounded");
  }
  // t - γt = (1-γ)t >= 0, so the history is only read at t = 0.
  return DelayLaw(DelayKind::Proportional, {gamma}, std::nullopt);
}

DelayLaw DelayLaw::expression(const Expr& tau, CheckOptions opts) {
  require_only(tau, VarKind::T, ErrorCode::InvalidDelayLaw, "delay expression");
  DelayLaw law(DelayKind::Expression, {}, tau);
  law.check_assumption1(opts);
  return law;
}

double DelayLaw::operator()(double t) const {
  switch (kind_) {
    case DelayKind::Constant: return params_[0];
    case DelayKind::Sinusoid: return params_[0] + params_[1] * std::sin(params_[2] * t);
    case DelayKind::Proportional: return params_[0] * t;
    case DelayKind::Expression: return eval_scalar(*expr_, VarKind::T, t);
  }
  return 0.0;
}

bool DelayLaw::is_zero() const noexcept { return kind_ == DelayKind::Constant && params_[0] == 0.0; }

void DelayLaw::check_assumption1(CheckOptions opts) {
  constexpr std::size_t kBlocks = 8;
  const std::size_t n = std::max<std::size_t>(opts.samples, kBlocks * 2);
  std::vector<double> block_min(kBlocks, std::numeric_limits<double>::infinity());
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = opts.horizon * static_cast<double>(k) / static_cast<double>(n);
    double tau = 0.0;
    try {
      tau = (*this)(t);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidDelayLaw, "tau(" + format_param(t) + ") fails: " + e.what());
    }
    if (!std::isfinite(tau) || tau < 0.0) {
      throw Error(ErrorCode::InvalidDelayLaw,
                  "tau(" + format_param(t) + ") = " + format_param(tau) + " is not a valid delay");
    }
    const double u = t - tau;
    lowest = std::min(lowest, u);
    const std::size_t b = std::min(kBlocks - 1, k * kBlocks / (n + 1));
    block_min[b] = std::min(block_min[b], u);
  }
  for (std::size_t b = 1; b < kBlocks; ++b) {
    if (!(block_min[b] > block_min[b - 1])) {
      throw Error(ErrorCode::Assumption1Violated,
                  describe() + ": lower envelope of t - tau(t) stops increasing near t = " +
                      format_param(opts.horizon * static_cast<double>(b) / kBlocks));
    }
  }
  tau_max_ = std::max(0.0, -lowest);
}

std::string DelayLaw::describe() const {
  switch (kind_) {
    case DelayKind::Constant: return is_zero() ? "zero" : "const:" + format_param(params_[0]);
    case DelayKind::Sinusoid:
      return "sin:" + format_param(params_[0]) + "," + format_param(params_[1]) + "," +
             format_param(params_[2]);
    case DelayKind::Proportional: return "prop:" + format_param(params_[0]);
    case DelayKind::Expression: return "expr:" + expr_->to_string();
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_params(std::string_view text, std::string_view spec) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw Error(ErrorCode::InvalidDelayLaw, "bad number '" + std::string(item) + "' in delay law '" +
                                                  std::string(spec) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

DelayLaw DelayLaw::parse(std::string_view spec) {
  const std::string_view s = trim(spec);
  if (s == "zero") return zero();
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidDelayLaw, "delay law '" + std::string(s) + "' needs the form kind:params");
  }
  const std::string_view kind = trim(s.substr(0, colon));
  const std::string_view rest = s.substr(colon + 1);
  auto expect = [&](std::size_t count) {
    auto p = parse_params(rest, s);
    if (p.size() != count) {
      throw Error(ErrorCode::InvalidDelayLaw, "delay law '" + std::string(s) + "' expects " +
                                                  std::to_string(count) + " parameter(s)");
    }
    return p;
  };
  if (kind == "const") return constant(expect(1)[0]);
  if (kind == "prop") return proportional(expect(1)[0]);
  if (kind == "sin") {
    const auto p = expect(3);
    return sinusoid(p[0], p[1], p[2]);
  }
  if (kind == "expr") {
    try {
      return expression(parse_expr(rest));
    } catch (const ParseError& e) {
      throw Error(ErrorCode::InvalidDelayLaw, std::string("delay expression: ") + e.what());
    }
  }
  throw Error(ErrorCode::InvalidDelayLaw, "unknown delay kind '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------
// DelaySchedule

DelaySchedule::DelaySchedule(DelayLaw shared) : shared_(std::move(shared)) {}

DelaySchedule::DelaySchedule(std::vector<std::vector<DelayLaw>> per_pair) : table_(std::move(per_pair)) {
  if (table_.empty()) throw Error(ErrorCode::DimensionMismatch, "delay table is empty");
  for (const auto& row : table_) {
    if (row.size() != table_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "delay table must be square");
    }
  }
}

const DelayLaw& DelaySchedule::law(std::size_t i, std::size_t j) const {
  if (shared_) return *shared_;
  return table_.at(i).at(j);
}

double DelaySchedule::tau_max() const noexcept {
  if (shared_) return shared_->tau_max();
  double m = 0.0;
  for (const auto& row : table_) {
    for (const auto& law : row) m = std::max(m, law.tau_max());
  }
  return m;
}

double DelaySchedule::max_delay(double t) const {
  if (shared_) return (*shared_)(t);
  double m = 0.0;
  for (const auto& row : table_) {
    for (const auto& law : row) m = std::max(m, law(t));
  }
  return m;
}

// ---------------------------------------------------------------------------
// DelayField

DelayField::DelayField(std::size_t n, ComponentFn g, DelaySchedule delays, std::optional<JacobianFn> jac_x,
                       std::optional<JacobianFn> jac_y)
    : n_(n), g_(std::move(g)), delays_(std::move(delays)), jac_x_(std::move(jac_x)), jac_y_(std::move(jac_y)) {
  if (n_ == 0) throw Error(ErrorCode::DimensionMismatch, "delay field needs dimension >= 1");
  if (delays_.heterogeneous() && delays_.size() != n_) {
    throw Error(ErrorCode::DimensionMismatch, "delay table size does not match the field dimension");
  }
  const Point zero(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double v = g_(i, zero, zero);
    if (!(std::abs(v) <= kOriginTol)) {
      throw Error(ErrorCode::OriginNotEquilibrium,
                  "g_" + std::to_string(i + 1) + "(0, 0) = " + format_param(v));
    }
  }
}

DelayField DelayField::from_system(const ExprSystem& sys, DelaySchedule delays) {
  const std::size_t n = sys.dimension();
  for (std::size_t i = 0; i < n; ++i) {
    for (const Variable& v : sys.component(i).variables()) {
      if (v.kind != VarKind::X && v.kind != VarKind::Y) {
        throw Error(ErrorCode::InvalidVariableUse,
                    "component " + std::to_string(i + 1) + " may not reference '" + v.name() + "'");
      }
    }
  }
  auto comps = std::make_shared<const std::vector<Expr>>(sys.components());
  ComponentFn g = [comps](std::size_t i, std::span<const double> x, std::span<const double> y) {
    Env env;
    env.x = x;
    env.y = y;
    return (*comps)[i].eval(env);
  };
  std::optional<JacobianFn> jx, jy;
  if (sys.is_differentiable()) {
    using Table = std::vector<std::vector<Expr>>;
    auto tx = std::make_shared<Table>(n);
    auto ty = std::make_shared<Table>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        (*tx)[i].push_back(sys.component(i).differentiate(Variable::x(j)));
        (*ty)[i].push_back(sys.component(i).differentiate(Variable::y(j)));
      }
    }
    auto make = [](std::shared_ptr<const Table> t) -> JacobianFn {
      return [t](std::size_t i, std::size_t j, std::span<const double> x, std::span<const double> y) {
        Env env;
        env.x = x;
        env.y = y;
        return (*t)[i][j].eval(env);
      };
    };
    jx = make(tx);
    jy = make(ty);
  }
  return DelayField(n, std::move(g), std::move(delays), std::move(jx), std::move(jy));
}

DelayField DelayField::linear(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, DelaySchedule delays) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "A and B must be square matrices of equal size");
  }
  auto am = std::make_shared<const Eigen::MatrixXd>(a);
  auto bm = std::make_shared<const Eigen::MatrixXd>(b);
  const auto n = static_cast<std::size_t>(a.rows());
  ComponentFn g = [am, bm, n](std::size_t i, std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      acc += (*am)(r, c) * x[j] + (*bm)(r, c) * y[j];
    }
    return acc;
  };
  JacobianFn jx = [am](std::size_t i, std::size_t j, std::span<const double>, std::span<const double>) {
    return (*am)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  JacobianFn jy = [bm](std::size_t i, std::size_t j, std::span<const double>, std::span<const double>) {
    return (*bm)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  return DelayField(n, std::move(g), std::move(delays), std::move(jx), std::move(jy));
}

DelayField DelayField::from_function(std::size_t n, ComponentFn g, DelaySchedule delays,
                                     std::optional<JacobianFn> jac_x, std::optional<JacobianFn> jac_y) {
  if (jac_x.has_value() != jac_y.has_value()) {
    throw Error(ErrorCode::InvalidConfig, "supply both Jacobians of g or neither");
  }
  return DelayField(n, std::move(g), std::move(delays), std::move(jac_x), std::move(jac_y));
}

void DelayField::eval(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) out[i] = g_(i, x, y);
}

Point DelayField::operator()(std::span<const double> x, std::span<const double> y) const {
  Point out(n_);
  eval(x, y, out);
  return out;
}

double DelayField::jacobian_x(std::size_t i, std::size_t j, std::span<const double> x,
                              std::span<const double> y) const {
  if (jac_x_) return (*jac_x_)(i, j, x, y);
  return finite_difference([&](std::span<const double> p) { return g_(i, p, y); }, x, j);
}

double DelayField::jacobian_y(std::size_t i, std::size_t j, std::span<const double> x,
                              std::span<const double> y) const {
  if (jac_y_) return (*jac_y_)(i, j, x, y);
  return finite_difference([&](std::span<const double> p) { return g_(i, x, p); }, y, j);
}

VectorField DelayField::induced() const {
  auto g = g_;
  VectorField::ComponentFn f = [g](std::size_t i, std::span<const double> x) { return g(i, x, x); };
  std::optional<VectorField::JacobianFn> jac;
  if (jac_x_) {
    jac = [jx = *jac_x_, jy = *jac_y_](std::size_t i, std::size_t j, std::span<const double> x) {
      return jx(i, j, x, x) + jy(i, j, x, x);
    };
  }
  return VectorField::from_function(n_, std::move(f), std::move(jac), jac_x_.has_value());
}

DelayField DelayField::with_delays(DelaySchedule delays) const {
  return DelayField(n_, g_, std::move(delays), jac_x_, jac_y_);
}

// ---------------------------------------------------------------------------
// BoxSet

BoxSet::BoxSet(Point corner) : upper(std::move(corner)) {
  if (upper.empty()) throw Error(ErrorCode::DimensionMismatch, "box needs at least one coordinate");
  for (double v : upper) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::PreconditionViolated, "box corner entries must be finite and >= 0");
    }
  }
}

bool BoxSet::contains(std::span<const double> x, double tol) const {
  if (x.size() != upper.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < -tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

void BoxSet::require_positive() const {
  for (double v : upper) {
    if (!(v > 0.0)) throw Error(ErrorCode::PreconditionViolated, "box corner must be > 0 componentwise");
  }
}

// ---------------------------------------------------------------------------
// PathCandidate

PathCandidate::PathCandidate(std::vector<Expr> rho, double sbar, std::vector<Expr> alpha, std::size_t grid)
    : rho_(std::move(rho)), alpha_(std::move(alpha)), sbar_(sbar) {
  const std::size_t n = rho_.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "path needs at least one component");
  if (alpha_.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "path has " + std::to_string(n) + " components but " +
                                                  std::to_string(alpha_.size()) + " margins");
  }
  if (!std::isfinite(sbar_) || !(sbar_ > 0.0)) {
    throw Error(ErrorCode::PathValidationFailure, "s_bar must be finite and > 0");
  }
  if (grid < 2) throw Error(ErrorCode::InvalidConfig, "path validation grid needs >= 2 points");
  for (std::size_t i = 0; i < n; ++i) {
    require_only(rho_[i], VarKind::S, ErrorCode::InvalidVariableUse, "rho_" + std::to_string(i + 1));
    require_only(alpha_[i], VarKind::S, ErrorCode::InvalidVariableUse, "alpha_" + std::to_string(i + 1));
    if (rho_[i].is_differentiable()) {
      drho_.push_back(rho_[i].differentiate(Variable::s()));
      has_drho_.push_back(true);
    } else {
      drho_.emplace_back();
      has_drho_.push_back(false);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = "rho_" + std::to_string(i + 1);
    const double r0 = this->rho(i, 0.0);
    if (!(std::abs(r0) <= kOriginTol)) {
      throw Error(ErrorCode::PathValidationFailure, name + "(0) = " + format_param(r0) + " is not 0");
    }
    double prev = r0;
    for (std::size_t k = 1; k < grid; ++k) {
      const double s = sbar_ * static_cast<double>(k) / static_cast<double>(grid - 1);
      const double r = this->rho(i, s);
      if (!(r > prev + 1e-12)) {
        throw Error(ErrorCode::PathValidationFailure,
                    name + " is not strictly increasing near s = " + format_param(s));
      }
      const double d = rho_derivative(i, s);
      if (!std::isfinite(d) || !(d > 0.0)) {
        throw Error(ErrorCode::PathValidationFailure,
                    "d" + name + "/ds = " + format_param(d) + " at s = " + format_param(s));
      }
      prev = r;
    }
  }
}

PathCandidate PathCandidate::parse(const std::vector<std::string>& rho, double sbar,
                                   const std::vector<std::string>& alpha, double eps, std::size_t grid) {
  std::vector<Expr> r, a;
  for (const auto& src : rho) r.push_back(parse_expr(src));
  if (alpha.empty()) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      a.push_back(Expr::binary(BinaryOp::Mul, Expr::number(eps), Expr::variable(Variable::s())));
    }
  } else {
    for (const auto& src : alpha) a.push_back(parse_expr(src));
  }
  return PathCandidate(std::move(r), sbar, std::move(a), grid);
}

double PathCandidate::rho(std::size_t i, double s) const {
  try {
    return eval_scalar(rho_.at(i), VarKind::S, s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DomainError) throw;
    throw Error(ErrorCode::PathDomainError,
                "rho_" + std::to_string(i + 1) + "(" + format_param(s) + "): " + e.what());
  }
}

double PathCandidate::rho_derivative(std::size_t i, double s) const {
  try {
    if (has_drho_.at(i)) return eval_scalar(drho_[i], VarKind::S, s);
    return finite_difference([&](std::span<const double> p) { return rho(i, p[0]); },
                             std::span<const double>(&s, 1), 0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DomainError) throw;
    throw Error(ErrorCode::PathDomainError,
                "drho_" + std::to_string(i + 1) + "/ds(" + format_param(s) + "): " + e.what());
  }
}

double PathCandidate::alpha(std::size_t i, double s) const {
  try {
    return eval_scalar(alpha_.at(i), VarKind::S, s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DomainError) throw;
    throw Error(ErrorCode::PathDomainError,
                "alpha_" + std::to_string(i + 1) + "(" + format_param(s) + "): " + e.what());
  }
}

Point PathCandidate::point(double s) const {
  Point p(rho_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = rho(i, s);
  return p;
}

// ---------------------------------------------------------------------------
// ScalingPsi

ScalingPsi::ScalingPsi(std::vector<Expr> components) : psi_(std::move(components)) {
  if (psi_.empty()) throw Error(ErrorCode::PsiValidationFailure, "psi needs at least one component");
  for (std::size_t i = 0; i < psi_.size(); ++i) {
    for (const Variable& v : psi_[i].variables()) {
      const bool own = (v.kind == VarKind::X || v.kind == VarKind::Y) && v.index == i;
      if (!own) {
        throw Error(ErrorCode::PsiValidationFailure, "psi_" + std::to_string(i + 1) +
                                                         " may only use x" + std::to_string(i + 1) +
                                                         " and y" + std::to_string(i + 1) + ", found '" +
                                                         v.name() + "'");
      }
    }
  }
}

ScalingPsi ScalingPsi::parse(const std::vector<std::string>& sources) {
  std::vector<Expr> comps;
  ParseOptions opts;
  opts.dimension = sources.size();
  for (const auto& src : sources) comps.push_back(parse_expr(src, opts));
  return ScalingPsi(std::move(comps));
}

double ScalingPsi::apply(std::size_t i, double x_i, double y_i) const {
  Point x(psi_.size(), 0.0), y(psi_.size(), 0.0);
  x[i] = x_i;
  y[i] = y_i;
  Env env;
  env.x = x;
  env.y = y;
  return psi_.at(i).eval(env);
}

void ScalingPsi::validate(std::span<const double> x_max, std::span<const double> y_max,
                          std::size_t grid) const {
  constexpr std::size_t kXSamples = 33;
  if (x_max.size() != psi_.size() || y_max.size() != psi_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "psi validation ranges do not match its dimension");
  }
  grid = std::max<std::size_t>(grid, 2);
  for (std::size_t i = 0; i < psi_.size(); ++i) {
    const std::string name = "psi_" + std::to_string(i + 1);
    try {
      for (std::size_t a = 0; a < kXSamples; ++a) {
        const double x = x_max[i] * static_cast<double>(a) / (kXSamples - 1);
        const double at_zero = apply(i, x, 0.0);
        if (!(std::abs(at_zero) <= kOriginTol)) {
          throw Error(ErrorCode::PsiValidationFailure,
                      name + "(" + format_param(x) + ", 0) = " + format_param(at_zero));
        }
        if (!(x > 0.0)) continue;
        double prev = apply(i, x, -y_max[i]);
        for (std::size_t k = 1; k < grid; ++k) {
          const double y = -y_max[i] + 2.0 * y_max[i] * static_cast<double>(k) / static_cast<double>(grid - 1);
          const double v = apply(i, x, y);
          if (!(v > prev + 1e-12)) {
            throw Error(ErrorCode::PsiValidationFailure,
                        name + " is not strictly increasing in y at x = " + format_param(x) +
                            ", y = " + format_param(y));
          }
          prev = v;
        }
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PsiValidationFailure) throw;
      throw Error(ErrorCode::PsiValidationFailure, name + ": " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// InitialHistory

InitialHistory::InitialHistory(Kind kind, std::size_t n, double domain) : kind_(kind), n_(n), domain_(domain) {
  if (n_ == 0) throw Error(ErrorCode::InvalidHistory, "history needs at least one component");
}

InitialHistory InitialHistory::constant(Point value) {
  InitialHistory h(Kind::Constant, value.size(), std::numeric_limits<double>::infinity());
  h.constant_ = std::move(value);
  h.check_nonnegative();
  return h;
}

InitialHistory InitialHistory::expression(std::vector<Expr> components, double domain) {
  if (!(domain >= 0.0)) throw Error(ErrorCode::InvalidHistory, "history domain length must be >= 0");
  for (const Expr& e : components) require_only(e, VarKind::T, ErrorCode::InvalidHistory, "history");
  InitialHistory h(Kind::Expression, components.size(), domain);
  h.exprs_ = std::move(components);
  h.check_nonnegative();
  return h;
}

InitialHistory InitialHistory::samples(std::vector<double> times, std::vector<Point> values) {
  if (times.empty() || times.size() != values.size()) {
    throw Error(ErrorCode::InvalidHistory, "history samples need matching, nonempty times and values");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw Error(ErrorCode::InvalidHistory, "history times must increase");
  }
  if (times.back() != 0.0) throw Error(ErrorCode::InvalidHistory, "history samples must end at t = 0");
  const std::size_t n = values.front().size();
  for (const Point& v : values) {
    if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "history samples differ in size");
  }
  InitialHistory h(Kind::Samples, n, -times.front());
  h.times_ = std::move(times);
  h.values_ = std::move(values);
  h.check_nonnegative();
  return h;
}

double InitialHistory::value(std::size_t i, double t) const {
  switch (kind_) {
    case Kind::Constant: return constant_.at(i);
    case Kind::Expression: return eval_scalar(exprs_.at(i), VarKind::T, t);
    case Kind::Samples: {
      if (t <= times_.front()) return values_.front().at(i);
      if (t >= times_.back()) return values_.back().at(i);
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const auto k = static_cast<std::size_t>(it - times_.begin());
      const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
      return (1.0 - w) * values_[k - 1].at(i) + w * values_[k].at(i);
    }
  }
  return 0.0;
}

Point InitialHistory::at(double t) const {
  Point p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = value(i, t);
  return p;
}

Point InitialHistory::upper_bound() const {
  switch (kind_) {
    case Kind::Constant: return constant_;
    case Kind::Samples: {
      Point m(n_, 0.0);
      for (const Point& v : values_) {
        for (std::size_t i = 0; i < n_; ++i) m[i] = std::max(m[i], v[i]);
      }
      return m;
    }
    case Kind::Expression: {
      constexpr std::size_t kSamples = 1025;
      Point m(n_, 0.0);
      for (std::size_t k = 0; k < kSamples; ++k) {
        const double t = -domain_ * static_cast<double>(k) / (kSamples - 1);
        for (std::size_t i = 0; i < n_; ++i) m[i] = std::max(m[i], value(i, t));
      }
      return m;
    }
  }
  return {};
}

void InitialHistory::check_nonnegative() const {
  auto check = [](double v, double t, std::size_t i) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidHistory, "phi_" + std::to_string(i + 1) + "(" + format_param(t) +
                                                 ") = " + format_param(v) + " is not >= 0");
    }
  };
  switch (kind_) {
    case Kind::Constant:
      for (std::size_t i = 0; i < n_; ++i) check(constant_[i], 0.0, i);
      return;
    case Kind::Samples:
      for (std::size_t k = 0; k < values_.size(); ++k) {
        for (std::size_t i = 0; i < n_; ++i) check(values_[k][i], times_[k], i);
      }
      return;
    case Kind::Expression: {
      constexpr std::size_t kSamples = 1025;
      for (std::size_t k = 0; k < kSamples; ++k) {
        const double t = -domain_ * static_cast<double>(k) / (kSamples - 1);
        for (std::size_t i = 0; i < n_; ++i) {
          double v = 0.0;
          try {
            v = value(i, t);
          } catch (const Error& e) {
            throw Error(ErrorCode::InvalidHistory, std::string("history evaluation: ") + e.what());
          }
          check(v, t, i);
        }
      }
      return;
    }
  }
}

}  // namespace monocert
