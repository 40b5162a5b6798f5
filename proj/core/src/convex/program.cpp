#include "risuav/convex/program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace risuav::convex {

Affine& Affine::operator+=(const Affine& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

Affine& Affine::operator-=(const Affine& o) {
  for (const auto& [i, a] : o.terms_) terms_.emplace_back(i, -a);
  constant_ -= o.constant_;
  return *this;
}

Affine& Affine::operator*=(double k) {
  for (auto& t : terms_) t.second *= k;
  constant_ *= k;
  return *this;
}

double Affine::evaluate(std::span<const double> x) const {
  double v = constant_;
  for (const auto& [i, a] : terms_) v += a * x[static_cast<std::size_t>(i)];
  return v;
}

namespace {

double magnitude(const Affine& e, std::span<const double> x) {
  double m = std::abs(e.constant());
  for (const auto& [i, a] : e.terms()) m += std::abs(a * x[static_cast<std::size_t>(i)]);
  return m;
}

double norm_of(const std::vector<Affine>& vec, std::span<const double> x) {
  double s = 0.0;
  for (const auto& e : vec) {
    const double v = e.evaluate(x);
    s += v * v;
  }
  return std::sqrt(s);
}

double rel(double excess, double lhs, double rhs) {
  return std::max(0.0, excess) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

struct Violation {
  std::span<const double> x;

  double operator()(const EqualityConstraint& c) const {
    return std::abs(c.expr.evaluate(x)) / (1.0 + magnitude(c.expr, x));
  }
  double operator()(const InequalityConstraint& c) const {
    return std::max(0.0, c.expr.evaluate(x)) / (1.0 + magnitude(c.expr, x));
  }
  double operator()(const NormConstraint& c) const {
    const double n = norm_of(c.vec, x);
    const double t = c.bound.evaluate(x);
    return rel(n - t, n, t);
  }
  double operator()(const SquaredNormConstraint& c) const {
    const double n = norm_of(c.vec, x);
    const double t = c.bound.evaluate(x);
    return rel(n * n - t, n * n, t);
  }
  double operator()(const RatioConstraint& c) const {
    const double d = x[static_cast<std::size_t>(c.denominator.index)];
    const double e = x[static_cast<std::size_t>(c.epigraph.index)];
    if (d <= 0.0) return 1.0;
    const double floor_gap = rel(c.floor - d, c.floor, d);
    const double r = c.numerator / d;
    return std::max(floor_gap, rel(r - e, r, e));
  }
  double operator()(const CubicNormConstraint& c) const {
    const double n = norm_of(c.vec, x);
    const double t = c.bound.evaluate(x);
    return rel(n * n * n - t, n * n * n, t);
  }
};

}  // namespace

Var ConvexProgram::add_variable(std::string name, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("variable " + name + ": lower > upper");
  variables_.push_back({std::move(name), lower, upper});
  return Var{static_cast<int>(variables_.size()) - 1};
}

void ConvexProgram::check(const Affine& e) const {
  for (const auto& t : e.terms()) {
    if (t.first < 0 || static_cast<std::size_t>(t.first) >= variables_.size())
      throw std::invalid_argument("constraint references an undeclared variable");
  }
}

void ConvexProgram::check(Var v) const {
  if (v.index < 0 || static_cast<std::size_t>(v.index) >= variables_.size())
    throw std::invalid_argument("constraint references an undeclared variable");
}

void ConvexProgram::add_equal(const Affine& lhs, const Affine& rhs, std::string family) {
  Affine e = lhs - rhs;
  check(e);
  constraints_.push_back({EqualityConstraint{std::move(e)}, std::move(family)});
}

void ConvexProgram::add_less_equal(const Affine& lhs, const Affine& rhs, std::string family) {
  Affine e = lhs - rhs;
  check(e);
  constraints_.push_back({InequalityConstraint{std::move(e)}, std::move(family)});
}

void ConvexProgram::add_norm_le(std::vector<Affine> vec, Affine bound, std::string family) {
  for (const auto& e : vec) check(e);
  check(bound);
  constraints_.push_back({NormConstraint{std::move(vec), std::move(bound)}, std::move(family)});
}

void ConvexProgram::add_squared_norm_le(std::vector<Affine> vec, Affine bound, std::string family,
                                        double scale) {
  for (const auto& e : vec) check(e);
  check(bound);
  if (!(scale > 0.0)) throw std::invalid_argument("squared-norm scale must be positive");
  constraints_.push_back(
      {SquaredNormConstraint{std::move(vec), std::move(bound), scale}, std::move(family)});
}

void ConvexProgram::add_ratio_le(double numerator, Var denominator, Var epigraph, double floor,
                                 std::string family) {
  check(denominator);
  check(epigraph);
  if (!(numerator > 0.0)) throw std::invalid_argument("ratio numerator must be positive");
  if (!(floor >= 0.0)) throw std::invalid_argument("ratio floor must be non-negative");
  constraints_.push_back(
      {RatioConstraint{numerator, denominator, epigraph, floor}, std::move(family)});
}

void ConvexProgram::add_cubic_norm_le(std::vector<Affine> vec, Affine bound, std::string family,
                                      double scale) {
  for (const auto& e : vec) check(e);
  check(bound);
  if (!(scale > 0.0)) throw std::invalid_argument("cubic scale must be positive");
  constraints_.push_back(
      {CubicNormConstraint{std::move(vec), std::move(bound), scale}, std::move(family)});
}

std::pair<std::string, double> ConvexProgram::worst_violation(std::span<const double> x) const {
  if (x.size() < variables_.size()) throw std::invalid_argument("solution vector too short");
  std::pair<std::string, double> worst{"", 0.0};
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& v = variables_[i];
    const double lo = std::isfinite(v.lower) ? rel(v.lower - x[i], v.lower, x[i]) : 0.0;
    const double hi = std::isfinite(v.upper) ? rel(x[i] - v.upper, v.upper, x[i]) : 0.0;
    if (std::max(lo, hi) > worst.second) worst = {"bound:" + v.name, std::max(lo, hi)};
  }
  for (const auto& c : constraints_) {
    const double viol = std::visit(Violation{x}, c.body);
    if (viol > worst.second) worst = {c.family, viol};
  }
  return worst;
}

double ConvexProgram::max_violation(std::span<const double> x) const {
  return worst_violation(x).second;
}

}  // namespace risuav::convex
