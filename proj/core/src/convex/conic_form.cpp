#include <cmath>
#include <iomanip>
#include <ostream>
#include <variant>

#include "risuav/convex/conic.hpp"

namespace risuav::convex {

namespace {

// One row of  s = h - G x.
struct ConeRow {
  std::vector<std::pair<int, double>> g;
  double h = 0.0;
};

// Row whose slack equals the value of `e`.
ConeRow value_row(const Affine& e) {
  ConeRow r;
  r.h = e.constant();
  r.g.reserve(e.terms().size());
  for (const auto& [i, a] : e.terms()) r.g.emplace_back(i, -a);
  return r;
}

class Lowering {
 public:
  explicit Lowering(const ConvexProgram& p) : program_(p) {
    for (const auto& v : p.variables()) names_.push_back(v.name);
  }

  ConicForm run() {
    const auto& vars = program_.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const Var v{static_cast<int>(i)};
      if (std::isfinite(vars[i].lower)) add_linear(value_row(Affine(v) - vars[i].lower), "bound:" + vars[i].name);
      if (std::isfinite(vars[i].upper)) add_linear(value_row(vars[i].upper - Affine(v)), "bound:" + vars[i].name);
    }
    for (const auto& c : program_.constraints()) {
      std::visit([&](const auto& body) { lower(body, c.family); }, c.body);
    }
    return assemble();
  }

 private:
  void lower(const EqualityConstraint& c, const std::string& family) {
    const int row = static_cast<int>(b_.size());
    for (const auto& [i, a] : c.expr.terms()) a_trip_.emplace_back(row, i, a);
    b_.push_back(-c.expr.constant());
    eq_family_.push_back(family);
  }

  void lower(const InequalityConstraint& c, const std::string& family) {
    add_linear(value_row(-c.expr), family);
  }

  void lower(const NormConstraint& c, const std::string& family) {
    std::vector<ConeRow> block{value_row(c.bound)};
    for (const auto& e : c.vec) block.push_back(value_row(e));
    add_soc(std::move(block), family);
  }

  // ||v||^2 <= t  <=>  ||(2v, t/k - k)|| <= t/k + k   with k = scale
  void lower(const SquaredNormConstraint& c, const std::string& family) {
    add_rotated(c.bound * (1.0 / c.scale), Affine(c.scale), c.vec, family);
  }

  // c/d <= e  <=>  e*d >= c,  d >= floor
  void lower(const RatioConstraint& c, const std::string& family) {
    add_rotated(Affine(c.epigraph), Affine(c.denominator), {Affine(std::sqrt(c.numerator))}, family);
    add_linear(value_row(Affine(c.denominator) - c.floor), family);
  }

  // ||v||^3 <= w  <=>  exists s, y:  ||v|| <= s,  s^2 <= k*y,  y^2 <= (w/k^2) * s
  void lower(const CubicNormConstraint& c, const std::string& family) {
    const double k = c.scale;
    const Var s = aux(family + ":norm");
    const Var y = aux(family + ":square");
    std::vector<ConeRow> block{value_row(Affine(s))};
    for (const auto& e : c.vec) block.push_back(value_row(e));
    add_soc(std::move(block), family);
    add_rotated(Affine(y), Affine(k), {Affine(s)}, family);
    add_rotated(c.bound * (1.0 / (k * k)), Affine(s), {Affine(y)}, family);
  }

  // ||u||^2 <= x1 * x2,  x1, x2 >= 0
  void add_rotated(const Affine& x1, const Affine& x2, const std::vector<Affine>& u,
                   const std::string& family) {
    std::vector<ConeRow> block{value_row(x1 + x2)};
    for (const auto& e : u) block.push_back(value_row(2.0 * e));
    block.push_back(value_row(x1 - x2));
    add_soc(std::move(block), family);
  }

  Var aux(const std::string& name) {
    names_.push_back(name);
    return Var{static_cast<int>(names_.size()) - 1};
  }

  void add_linear(ConeRow row, const std::string& family) {
    linear_.push_back(std::move(row));
    linear_family_.push_back(family);
  }

  void add_soc(std::vector<ConeRow> block, const std::string& family) {
    socs_.push_back(std::move(block));
    soc_family_.push_back(family);
  }

  ConicForm assemble() {
    ConicForm f;
    const int n = static_cast<int>(names_.size());
    f.num_user_variables = static_cast<int>(program_.num_variables());
    f.variable_names = names_;
    f.eq_row_family = eq_family_;

    auto& d = f.data;
    d.c = Eigen::VectorXd::Zero(n);
    for (const auto& [i, a] : program_.objective().terms()) d.c(i) += a;

    d.A.resize(static_cast<int>(b_.size()), n);
    d.A.setFromTriplets(a_trip_.begin(), a_trip_.end());
    d.b = Eigen::Map<const Eigen::VectorXd>(b_.data(), static_cast<Eigen::Index>(b_.size()));

    std::vector<Eigen::Triplet<double>> g_trip;
    std::vector<double> h;
    auto push = [&](const ConeRow& r, const std::string& family) {
      const int row = static_cast<int>(h.size());
      for (const auto& [i, a] : r.g) g_trip.emplace_back(row, i, a);
      h.push_back(r.h);
      f.cone_row_family.push_back(family);
    };
    for (std::size_t i = 0; i < linear_.size(); ++i) push(linear_[i], linear_family_[i]);
    d.num_linear = static_cast<int>(linear_.size());
    for (std::size_t k = 0; k < socs_.size(); ++k) {
      for (const auto& r : socs_[k]) push(r, soc_family_[k]);
      d.soc_dims.push_back(static_cast<int>(socs_[k].size()));
    }
    d.G.resize(static_cast<int>(h.size()), n);
    d.G.setFromTriplets(g_trip.begin(), g_trip.end());
    d.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    return f;
  }

  const ConvexProgram& program_;
  std::vector<std::string> names_;
  std::vector<Eigen::Triplet<double>> a_trip_;
  std::vector<double> b_;
  std::vector<std::string> eq_family_;
  std::vector<ConeRow> linear_;
  std::vector<std::string> linear_family_;
  std::vector<std::vector<ConeRow>> socs_;
  std::vector<std::string> soc_family_;
};

void dump_matrix(std::ostream& os, const char* tag, const SparseMatrix& m) {
  os << tag << ' ' << m.nonZeros() << '\n';
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void dump_vector(std::ostream& os, const char* tag, const Eigen::VectorXd& v) {
  os << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v(i);
  os << '\n';
}

}  // namespace

ConicForm conic_form(const ConvexProgram& program) { return Lowering(program).run(); }

void write_conic_dump(std::ostream& os, const ConicForm& form) {
  const auto& d = form.data;
  const auto old_precision = os.precision(17);
  os << "# risuav conic program v1\n";
  os << "dims n=" << d.num_variables() << " p=" << d.b.size() << " m=" << d.h.size()
     << " l=" << d.num_linear << " q=";
  for (std::size_t i = 0; i < d.soc_dims.size(); ++i) os << (i ? "," : "") << d.soc_dims[i];
  os << '\n';
  for (int j = 0; j < d.num_variables(); ++j) os << "var " << j << ' ' << form.variable_names[static_cast<std::size_t>(j)] << '\n';
  dump_vector(os, "c", d.c);
  dump_vector(os, "b", d.b);
  dump_vector(os, "h", d.h);
  dump_matrix(os, "A", d.A);
  dump_matrix(os, "G", d.G);
  os.precision(old_precision);
}

}  // namespace risuav::convex
