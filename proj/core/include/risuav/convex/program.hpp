#pragma once

// Modeling layer for the convex subproblems. A ConvexProgram is written in
// terms of a small vocabulary of constraint families; conic_form() lowers
// every family to a linear + second-order-cone program that the interior
// point solver consumes.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace risuav::convex {

struct Var {
  int index = -1;
  friend bool operator==(Var, Var) = default;
};

/// Sparse affine expression  sum_i coeff_i * x_i + constant.
class Affine {
 public:
  Affine() = default;
  Affine(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  Affine(Var v, double coeff = 1.0) { terms_.emplace_back(v.index, coeff); }  // NOLINT

  Affine& add(Var v, double coeff) {
    if (coeff != 0.0) terms_.emplace_back(v.index, coeff);
    return *this;
  }
  Affine& operator+=(const Affine& o);
  Affine& operator-=(const Affine& o);
  Affine& operator*=(double k);

  friend Affine operator+(Affine a, const Affine& b) { return a += b; }
  friend Affine operator-(Affine a, const Affine& b) { return a -= b; }
  friend Affine operator*(Affine a, double k) { return a *= k; }
  friend Affine operator*(double k, Affine a) { return a *= k; }
  friend Affine operator-(Affine a) { return a *= -1.0; }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double evaluate(std::span<const double> x) const;

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

/// Constraint families. Each carries a `family` tag used in diagnostics.
struct EqualityConstraint {  // expr == 0
  Affine expr;
};
struct InequalityConstraint {  // expr <= 0
  Affine expr;
};
struct NormConstraint {  // ||vec|| <= bound
  std::vector<Affine> vec;
  Affine bound;
};
struct SquaredNormConstraint {  // ||vec||^2 <= bound
  std::vector<Affine> vec;
  Affine bound;
  double scale = 1.0;  // typical magnitude of ||vec||, only affects conditioning
};
struct RatioConstraint {  // numerator / denominator <= epigraph, denominator >= floor
  double numerator = 1.0;
  Var denominator;
  Var epigraph;
  double floor = 0.0;
};
struct CubicNormConstraint {  // ||vec||^3 <= bound
  std::vector<Affine> vec;
  Affine bound;
  double scale = 1.0;  // typical magnitude of ||vec||
};

using ConstraintBody = std::variant<EqualityConstraint, InequalityConstraint, NormConstraint,
                                    SquaredNormConstraint, RatioConstraint, CubicNormConstraint>;

struct Constraint {
  ConstraintBody body;
  std::string family;
};

struct Variable {
  std::string name;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

class ConvexProgram {
 public:
  Var add_variable(std::string name, double lower = -std::numeric_limits<double>::infinity(),
                   double upper = std::numeric_limits<double>::infinity());

  void minimize(Affine objective) { objective_ = std::move(objective); }

  void add_equal(const Affine& lhs, const Affine& rhs, std::string family);
  void add_less_equal(const Affine& lhs, const Affine& rhs, std::string family);
  void add_norm_le(std::vector<Affine> vec, Affine bound, std::string family);
  void add_squared_norm_le(std::vector<Affine> vec, Affine bound, std::string family,
                           double scale = 1.0);
  void add_ratio_le(double numerator, Var denominator, Var epigraph, double floor,
                    std::string family);
  void add_cubic_norm_le(std::vector<Affine> vec, Affine bound, std::string family,
                         double scale = 1.0);

  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Affine& objective() const { return objective_; }

  /// Largest normalized violation over all constraints and bounds, evaluated
  /// directly on the original families (no conic lifting). A violation v of a
  /// constraint `lhs <= rhs` is reported as v / (1 + |lhs| + |rhs|).
  double max_violation(std::span<const double> x) const;

  /// Family tag and normalized violation of the worst constraint.
  std::pair<std::string, double> worst_violation(std::span<const double> x) const;

 private:
  void check(const Affine& e) const;
  void check(Var v) const;

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Affine objective_;
};

}  // namespace risuav::convex
