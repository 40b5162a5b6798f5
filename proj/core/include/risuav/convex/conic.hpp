#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "risuav/controls.hpp"
#include "risuav/convex/program.hpp"

namespace risuav::convex {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Standard-form cone program
///
///   minimize    c'x
///   subject to  A x = b
///               G x + s = h,   s in R^l_+ x Q^{q_1} x ... x Q^{q_k}
///
/// Rows of G/h are ordered: the `num_linear` orthant rows first, then each
/// second-order cone block in `soc_dims` order (first row of a block is the
/// cone "height").
struct ConicData {
  Eigen::VectorXd c;
  SparseMatrix A;
  Eigen::VectorXd b;
  SparseMatrix G;
  Eigen::VectorXd h;
  int num_linear = 0;
  std::vector<int> soc_dims;

  int num_variables() const { return static_cast<int>(c.size()); }
  int num_cone_rows() const { return static_cast<int>(h.size()); }
};

/// Lowered program: conic data plus the bookkeeping needed to map a conic
/// solution back onto the modeling variables and to name constraint families.
struct ConicForm {
  ConicData data;
  int num_user_variables = 0;
  std::vector<std::string> variable_names;   // user variables then auxiliaries
  std::vector<std::string> eq_row_family;    // one per row of A
  std::vector<std::string> cone_row_family;  // one per row of G
};

ConicForm conic_form(const ConvexProgram& program);

/// Plain-text dump of the lowered program (format documented in docs/conic_dump.md).
void write_conic_dump(std::ostream& os, const ConicForm& form);

enum class SolveStatus { optimal, infeasible, numerical_failure };

const char* to_string(SolveStatus status);

struct SolverSettings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iterations = 100;
  int equilibration_passes = 15;
  double residual_tol = 1e-6;  // max normalized violation accepted for `optimal`

  static SolverSettings from(const SimControls& controls);
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x, y, z, s;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string diagnostics;
};

/// Homogeneous self-dual primal-dual interior point method with
/// Nesterov-Todd scaling and Mehrotra correction.
ConicSolution solve_conic(const ConicData& data, const SolverSettings& settings);

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<double> values;  // one per user variable
  double objective = 0.0;
  double max_residual = 0.0;   // ConvexProgram::max_violation(values)
  int iterations = 0;
  std::string violated_family;  // dominant family of an infeasibility certificate
  std::string diagnostics;

  double operator[](Var v) const { return values[static_cast<std::size_t>(v.index)]; }
};

SolveResult solve(const ConvexProgram& program, const SolverSettings& settings);
SolveResult solve(const ConvexProgram& program, const SimControls& controls);

}  // namespace risuav::convex
