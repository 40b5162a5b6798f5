// Primal-dual interior point method for linear + second-order cone programs,
// run on the homogeneous self-dual embedding so that infeasibility yields a
// certificate instead of a stalled iteration. Search directions use
// Nesterov-Todd scaling and the Mehrotra predictor-corrector.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "risuav/convex/conic.hpp"

namespace risuav::convex {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

SolverSettings SolverSettings::from(const SimControls& controls) {
  SolverSettings s;
  const double tol = std::min(1e-8, 1e-2 * controls.solver_tol);
  s.feastol = tol;
  s.abstol = tol;
  s.reltol = tol;
  s.residual_tol = controls.solver_tol;
  return s;
}

namespace {

using Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeLayout {
  int linear = 0;
  std::vector<int> dims;
  std::vector<int> offsets;
  int rows = 0;
  int degree = 0;

  ConeLayout(int l, const std::vector<int>& q) : linear(l), dims(q) {
    int off = l;
    for (int d : q) {
      offsets.push_back(off);
      off += d;
    }
    rows = off;
    degree = l + static_cast<int>(q.size());
  }
};

// x0^2 - ||x1||^2 without cancellation near the boundary
template <typename Seg>
double cone_det(const Seg& x) {
  const double n1 = x.tail(x.size() - 1).norm();
  return (x(0) - n1) * (x(0) + n1);
}

// x + e*alpha, with e the cone identity
void add_identity(VectorXd& x, const ConeLayout& k, double alpha) {
  for (int i = 0; i < k.linear; ++i) x(i) += alpha;
  for (int off : k.offsets) x(off) += alpha;
}

// max over cones of -(smallest eigenvalue); negative means strictly interior
double interior_margin(const VectorXd& x, const ConeLayout& k) {
  double worst = -kInf;
  for (int i = 0; i < k.linear; ++i) worst = std::max(worst, -x(i));
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offsets[c];
    const int dim = k.dims[c];
    worst = std::max(worst, x.segment(off + 1, dim - 1).norm() - x(off));
  }
  return worst;
}

// Largest alpha >= 0 with x + alpha*dx in the cone (x strictly interior).
double max_step(const VectorXd& x, const VectorXd& dx, const ConeLayout& k) {
  double alpha = kInf;
  for (int i = 0; i < k.linear; ++i)
    if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offsets[c];
    const int dim = k.dims[c];
    const double x0 = x(off), d0 = dx(off);
    const auto x1 = x.segment(off + 1, dim - 1);
    const auto d1 = dx.segment(off + 1, dim - 1);
    // f(a) = (x0 + a d0)^2 - ||x1 + a d1||^2 = qa a^2 + 2 qb a + qc
    const double qa = d0 * d0 - d1.squaredNorm();
    const double qb = x0 * d0 - x1.dot(d1);
    const double qc = cone_det(x.segment(off, dim));
    double root = kInf;
    if (qc <= 0.0) {
      root = 0.0;
    } else if (std::abs(qa) < 1e-300) {
      if (qb < 0.0) root = -qc / (2.0 * qb);
    } else {
      const double disc = qb * qb - qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // stable roots of qa a^2 + 2 qb a + qc
        const double t = -(qb + std::copysign(sq, qb));
        const double r1 = t / qa;
        const double r2 = (t != 0.0) ? qc / t : kInf;
        for (double r : {r1, r2})
          if (r > 0.0) root = std::min(root, r);
      }
    }
    alpha = std::min(alpha, root);
  }
  return alpha;
}

// u o v
VectorXd jordan_product(const VectorXd& u, const VectorXd& v, const ConeLayout& k) {
  VectorXd out(u.size());
  for (int i = 0; i < k.linear; ++i) out(i) = u(i) * v(i);
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offsets[c];
    const int dim = k.dims[c];
    out(off) = u.segment(off, dim).dot(v.segment(off, dim));
    out.segment(off + 1, dim - 1) =
        u(off) * v.segment(off + 1, dim - 1) + v(off) * u.segment(off + 1, dim - 1);
  }
  return out;
}

// x solving lambda o x = r
VectorXd jordan_divide(const VectorXd& lambda, const VectorXd& r, const ConeLayout& k) {
  VectorXd x(r.size());
  for (int i = 0; i < k.linear; ++i) x(i) = r(i) / lambda(i);
  for (std::size_t c = 0; c < k.dims.size(); ++c) {
    const int off = k.offsets[c];
    const int dim = k.dims[c];
    const double l0 = lambda(off);
    const auto l1 = lambda.segment(off + 1, dim - 1);
    const double det = cone_det(lambda.segment(off, dim));
    const double x0 = (l0 * r(off) - l1.dot(r.segment(off + 1, dim - 1))) / det;
    x(off) = x0;
    x.segment(off + 1, dim - 1) = (r.segment(off + 1, dim - 1) - x0 * l1) / l0;
  }
  return x;
}

double cone_dot(const VectorXd& u, const VectorXd& v) { return u.dot(v); }

// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
class NtScaling {
 public:
  explicit NtScaling(const ConeLayout& k) : k_(k) {
    d_ = VectorXd::Ones(k.linear);
    eta_.assign(k.dims.size(), 1.0);
    for (int dim : k.dims) {
      VectorXd w = VectorXd::Zero(dim);
      w(0) = 1.0;
      wbar_.push_back(w);
    }
  }

  bool update(const VectorXd& s, const VectorXd& z) {
    for (int i = 0; i < k_.linear; ++i) {
      if (!(s(i) > 0.0 && z(i) > 0.0)) return false;
      d_(i) = std::sqrt(s(i) / z(i));
    }
    for (std::size_t c = 0; c < k_.dims.size(); ++c) {
      const int off = k_.offsets[c];
      const int dim = k_.dims[c];
      const VectorXd sc = s.segment(off, dim);
      const VectorXd zc = z.segment(off, dim);
      const double sj = cone_det(sc);
      const double zj = cone_det(zc);
      if (!(sj > 0.0 && zj > 0.0 && sc(0) > 0.0 && zc(0) > 0.0)) return false;
      const VectorXd sb = sc / std::sqrt(sj);
      const VectorXd zb = zc / std::sqrt(zj);
      const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
      VectorXd w(dim);
      w(0) = (sb(0) + zb(0)) / (2.0 * gamma);
      w.tail(dim - 1) = (sb.tail(dim - 1) - zb.tail(dim - 1)) / (2.0 * gamma);
      wbar_[c] = w;
      eta_[c] = std::pow(sj / zj, 0.25);
    }
    return true;
  }

  // out = W v  (inverse = false)  or  W^{-1} v  (inverse = true)
  VectorXd apply(const VectorXd& v, bool inverse) const {
    VectorXd out(v.size());
    for (int i = 0; i < k_.linear; ++i) out(i) = inverse ? v(i) / d_(i) : v(i) * d_(i);
    for (std::size_t c = 0; c < k_.dims.size(); ++c) {
      const int off = k_.offsets[c];
      const int dim = k_.dims[c];
      apply_block(c, v.segment(off, dim), out.segment(off, dim), inverse);
    }
    return out;
  }

  template <typename In, typename Out>
  void apply_block(std::size_t c, const In& v, Out out, bool inverse) const {
    const VectorXd& w = wbar_[c];
    const int dim = static_cast<int>(w.size());
    const double sign = inverse ? -1.0 : 1.0;
    const double scale = inverse ? 1.0 / eta_[c] : eta_[c];
    const double w1v1 = w.tail(dim - 1).dot(v.tail(dim - 1));
    const double v0 = v(0);
    out(0) = scale * (w(0) * v0 + sign * w1v1);
    out.tail(dim - 1) =
        scale * (sign * v0 * w.tail(dim - 1) + v.tail(dim - 1) + (w1v1 / (1.0 + w(0))) * w.tail(dim - 1));
  }

  const VectorXd& diag() const { return d_; }

 private:
  const ConeLayout& k_;
  VectorXd d_;
  std::vector<double> eta_;
  std::vector<VectorXd> wbar_;
};

// Cone rows of G grouped per cone block as small dense matrices over the
// columns the block touches; used to assemble G' W^{-2} G cheaply.
struct BlockRows {
  std::vector<int> cols;
  Eigen::MatrixXd dense;  // rows x cols.size()
};

std::vector<BlockRows> split_blocks(const SparseMatrix& G, const ConeLayout& k) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> Gr(G);
  auto block_of = [&](int first, int count) {
    BlockRows b;
    std::map<int, int> pos;
    for (int r = first; r < first + count; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Gr, r); it; ++it)
        pos.emplace(it.col(), 0);
    for (auto& [col, p] : pos) {
      p = static_cast<int>(b.cols.size());
      b.cols.push_back(col);
    }
    b.dense = Eigen::MatrixXd::Zero(count, static_cast<Eigen::Index>(b.cols.size()));
    for (int r = first; r < first + count; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Gr, r); it; ++it)
        b.dense(r - first, pos[it.col()]) = it.value();
    return b;
  };
  std::vector<BlockRows> blocks;
  for (int i = 0; i < k.linear; ++i) blocks.push_back(block_of(i, 1));
  for (std::size_t c = 0; c < k.dims.size(); ++c) blocks.push_back(block_of(k.offsets[c], k.dims[c]));
  return blocks;
}

struct Equilibration {
  VectorXd col;  // x = col .* x_scaled
  VectorXd eq;   // y = eq .* y_scaled
  VectorXd cone; // z = cone .* z_scaled,  s = s_scaled ./ cone
};

Equilibration equilibrate(ConicData& d, const ConeLayout& k, int passes) {
  const int n = d.num_variables();
  const int p = static_cast<int>(d.b.size());
  const int m = d.num_cone_rows();
  Equilibration e{VectorXd::Ones(n), VectorXd::Ones(p), VectorXd::Ones(m)};
  auto clamp = [](double v) { return (v < 1e-10) ? 1.0 : std::clamp(v, 1e-4, 1e4); };
  for (int pass = 0; pass < passes; ++pass) {
    VectorXd cn = VectorXd::Zero(n), rn = VectorXd::Zero(p), gn = VectorXd::Zero(m);
    for (int j = 0; j < d.A.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(d.A, j); it; ++it) {
        cn(j) = std::max(cn(j), std::abs(it.value()));
        rn(it.row()) = std::max(rn(it.row()), std::abs(it.value()));
      }
    for (int j = 0; j < d.G.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(d.G, j); it; ++it) {
        cn(j) = std::max(cn(j), std::abs(it.value()));
        gn(it.row()) = std::max(gn(it.row()), std::abs(it.value()));
      }
    for (std::size_t c = 0; c < k.dims.size(); ++c) {
      const double mx = gn.segment(k.offsets[c], k.dims[c]).maxCoeff();
      gn.segment(k.offsets[c], k.dims[c]).setConstant(mx);
    }
    VectorXd sc(n), sr(p), sg(m);
    for (int j = 0; j < n; ++j) sc(j) = 1.0 / std::sqrt(clamp(cn(j)));
    for (int i = 0; i < p; ++i) sr(i) = 1.0 / std::sqrt(clamp(rn(i)));
    for (int i = 0; i < m; ++i) sg(i) = 1.0 / std::sqrt(clamp(gn(i)));
    d.A = sr.asDiagonal() * d.A * sc.asDiagonal();
    d.G = sg.asDiagonal() * d.G * sc.asDiagonal();
    e.col.array() *= sc.array();
    e.eq.array() *= sr.array();
    e.cone.array() *= sg.array();
  }
  d.c = e.col.asDiagonal() * d.c;
  d.b = e.eq.asDiagonal() * d.b;
  d.h = e.cone.asDiagonal() * d.h;
  return e;
}

class KktSystem {
 public:
  KktSystem(const ConicData& d, const ConeLayout& k)
      : d_(d), k_(k), n_(d.num_variables()), p_(static_cast<int>(d.b.size())), blocks_(split_blocks(d.G, k)) {
    At_ = d.A.transpose();
    Gt_ = d.G.transpose();
  }

  bool factor(const NtScaling& w) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_ + d_.A.nonZeros()) + 16 * blocks_.size());
    // H = sum_blocks (W^{-1} G_b)'(W^{-1} G_b)
    std::size_t bi = 0;
    for (int i = 0; i < k_.linear; ++i, ++bi) {
      const auto& b = blocks_[bi];
      const double inv = 1.0 / w.diag()(i);
      const Eigen::RowVectorXd r = b.dense.row(0) * inv;
      push_gram(trip, b.cols, r.transpose() * r);
    }
    for (std::size_t c = 0; c < k_.dims.size(); ++c, ++bi) {
      const auto& b = blocks_[bi];
      Eigen::MatrixXd scaled(b.dense.rows(), b.dense.cols());
      for (Eigen::Index j = 0; j < b.dense.cols(); ++j) {
        VectorXd col = b.dense.col(j);
        VectorXd out(col.size());
        w.apply_block(c, col, out.segment(0, col.size()), true);
        scaled.col(j) = out;
      }
      push_gram(trip, b.cols, scaled.transpose() * scaled);
    }
    for (int j = 0; j < n_; ++j) trip.emplace_back(j, j, kReg);
    for (int j = 0; j < d_.A.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(d_.A, j); it; ++it)
        trip.emplace_back(n_ + static_cast<int>(it.row()), j, it.value());
    for (int i = 0; i < p_; ++i) trip.emplace_back(n_ + i, n_ + i, -kReg);

    H_.resize(n_, n_);
    std::vector<Eigen::Triplet<double>> htrip;
    for (const auto& t : trip)
      if (t.row() < n_ && t.col() < n_) htrip.push_back(t);
    H_.setFromTriplets(htrip.begin(), htrip.end());
    H_.diagonal().array() -= kReg;

    SparseMatrix M(n_ + p_, n_ + p_);
    M.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(M);
      analyzed_ = true;
    }
    ldlt_.factorize(M);
    w_ = &w;
    return ldlt_.info() == Eigen::Success;
  }

  // Solve [0 A' G'; A 0 0; G 0 -W^2] [dx; dy; dz] = [r1; r2; r3], refining
  // against the unreduced system.
  bool solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx, VectorXd& dy,
             VectorXd& dz) const {
    solve_reduced(r1, r2, r3, dx, dy, dz);
    const double scale = 1.0 + std::max({r1.lpNorm<Eigen::Infinity>(), r2.size() ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                                         r3.size() ? r3.lpNorm<Eigen::Infinity>() : 0.0});
    for (int it = 0; it < 5; ++it) {
      const VectorXd e1 = r1 - At_ * dy - Gt_ * dz;
      const VectorXd e2 = r2 - d_.A * dx;
      const VectorXd e3 = r3 - d_.G * dx + w_->apply(w_->apply(dz, false), false);
      const double err = std::max({e1.size() ? e1.lpNorm<Eigen::Infinity>() : 0.0,
                                   e2.size() ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                   e3.size() ? e3.lpNorm<Eigen::Infinity>() : 0.0});
      if (!std::isfinite(err)) return false;
      if (err <= 1e-14 * scale) break;
      VectorXd cx, cy, cz;
      solve_reduced(e1, e2, e3, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
    return dx.allFinite() && dy.allFinite() && dz.allFinite();
  }

 private:
  static constexpr double kReg = 1e-9;

  void solve_reduced(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx,
                     VectorXd& dy, VectorXd& dz) const {
    const VectorXd t = w_->apply(w_->apply(r3, true), true);
    VectorXd rhs(n_ + p_);
    rhs.head(n_) = r1 + Gt_ * t;
    rhs.tail(p_) = r2;
    VectorXd sol = ldlt_.solve(rhs);
    for (int it = 0; it < 2; ++it) sol += ldlt_.solve(rhs - reduced_product(sol));
    dx = sol.head(n_);
    dy = sol.tail(p_);
    dz = w_->apply(w_->apply(d_.G * dx - r3, true), true);
  }

  void push_gram(std::vector<Eigen::Triplet<double>>& trip, const std::vector<int>& cols,
                 const Eigen::MatrixXd& gram) const {
    for (std::size_t a = 0; a < cols.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        trip.emplace_back(cols[a], cols[b], gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  }

  VectorXd reduced_product(const VectorXd& v) const {
    VectorXd out(n_ + p_);
    const VectorXd x = v.head(n_);
    const VectorXd y = v.tail(p_);
    out.head(n_) = H_ * x + At_ * y;
    out.tail(p_) = d_.A * x;
    return out;
  }

  const ConicData& d_;
  const ConeLayout& k_;
  int n_, p_;
  std::vector<BlockRows> blocks_;
  SparseMatrix At_, Gt_, H_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  const NtScaling* w_ = nullptr;
};

double safe_norm(const VectorXd& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

ConicSolution solve_conic(const ConicData& input, const SolverSettings& settings) {
  ConicData d = input;
  const ConeLayout k(d.num_linear, d.soc_dims);
  const int n = d.num_variables();
  const int p = static_cast<int>(d.b.size());
  const int m = d.num_cone_rows();
  ConicSolution sol;

  if (k.rows != m || d.G.cols() != n || d.A.cols() != n || d.A.rows() != p) {
    sol.diagnostics = "inconsistent conic dimensions";
    return sol;
  }
  for (int dim : d.soc_dims)
    if (dim < 1) {
      sol.diagnostics = "empty second-order cone";
      return sol;
    }

  const Equilibration eq = equilibrate(d, k, settings.equilibration_passes);
  const double cnorm = std::max(1.0, safe_norm(d.c));
  const double bnorm = std::max(1.0, safe_norm(d.b));
  const double hnorm = std::max(1.0, safe_norm(d.h));

  NtScaling w(k);
  KktSystem kkt(d, k);
  if (!kkt.factor(w)) {
    sol.diagnostics = "initial KKT factorization failed";
    return sol;
  }

  VectorXd x, y, z, s, tx, ty, tz;
  // primal start: minimize ||G x - h|| s.t. A x = b
  if (!kkt.solve(VectorXd::Zero(n), d.b, d.h, x, y, z)) {
    sol.diagnostics = "initial point solve failed";
    return sol;
  }
  s = -z;
  // dual start: minimize ||z|| s.t. G'z + A'y + c = 0
  if (!kkt.solve(-d.c, VectorXd::Zero(p), VectorXd::Zero(m), tx, y, z)) {
    sol.diagnostics = "initial point solve failed";
    return sol;
  }
  {
    const double as = interior_margin(s, k);
    if (as >= -1e-8) add_identity(s, k, 1.0 + std::max(as, 0.0));
    const double az = interior_margin(z, k);
    if (az >= -1e-8) add_identity(z, k, 1.0 + std::max(az, 0.0));
  }
  double tau = 1.0, kappa = 1.0;

  const VectorXd e_id = [&] {
    VectorXd e = VectorXd::Zero(m);
    add_identity(e, k, 1.0);
    return e;
  }();

  std::ostringstream diag;
  double pres = kInf, dres = kInf, gap = kInf;
  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    sol.iterations = iter;
    const VectorXd rx = d.A.transpose() * y + d.G.transpose() * z + d.c * tau;
    const VectorXd ry = -d.A * x + d.b * tau;
    const VectorXd rz = -d.G * x + d.h * tau - s;
    const double cx = d.c.dot(x), by = d.b.dot(y), hz = d.h.dot(z);
    const double rt = -cx - by - hz - kappa;
    const double sz = cone_dot(s, z);
    const double mu = (sz + tau * kappa) / (k.degree + 1);

    pres = std::max(safe_norm(ry) / bnorm, safe_norm(rz) / hnorm) / tau;
    dres = safe_norm(rx) / cnorm / tau;
    gap = sz / (tau * tau);
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    double relgap = kInf;
    if (pcost < 0.0) relgap = gap / -pcost;
    else if (dcost > 0.0) relgap = gap / dcost;

    if (pres <= settings.feastol && dres <= settings.feastol &&
        (gap <= settings.abstol || relgap <= settings.reltol)) {
      sol.status = SolveStatus::optimal;
      x /= tau; y /= tau; z /= tau; s /= tau;
      break;
    }
    if (hz + by < 0.0) {
      const double pinf = safe_norm(d.A.transpose() * y + d.G.transpose() * z) / cnorm / -(hz + by);
      if (pinf <= settings.feastol) {
        sol.status = SolveStatus::infeasible;
        y /= -(hz + by);
        z /= -(hz + by);
        diag << "primal infeasibility certificate at iteration " << iter;
        break;
      }
    }
    if (cx < 0.0) {
      const double dinf =
          std::max(safe_norm(d.A * x) / bnorm, safe_norm(d.G * x + s) / hnorm) / -cx;
      if (dinf <= settings.feastol) {
        sol.status = SolveStatus::numerical_failure;
        diag << "problem is unbounded below (dual infeasible) at iteration " << iter;
        break;
      }
    }
    if (iter == settings.max_iterations) {
      diag << "iteration limit reached";
      break;
    }

    if (!w.update(s, z) || !kkt.factor(w)) {
      diag << "scaling/factorization breakdown at iteration " << iter;
      break;
    }
    const VectorXd lambda = w.apply(z, false);
    VectorXd x1, y1, z1;
    if (!kkt.solve(-d.c, d.b, d.h, x1, y1, z1)) {
      diag << "KKT solve failed at iteration " << iter;
      break;
    }
    const double denom = kappa / tau + w.apply(z1, false).squaredNorm();

    struct Direction {
      VectorXd dx, dy, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](double eta, const VectorXd& ds_t, double dk, Direction& out) {
      VectorXd x2, y2, z2;
      const VectorXd r3 = eta * rz - w.apply(ds_t, false);
      if (!kkt.solve(-eta * rx, eta * ry, r3, x2, y2, z2)) return false;
      out.dtau = (-eta * rt + dk / tau + d.c.dot(x2) + d.b.dot(y2) + d.h.dot(z2)) / denom;
      out.dx = x2 + out.dtau * x1;
      out.dy = y2 + out.dtau * y1;
      out.dz = z2 + out.dtau * z1;
      out.ds = w.apply(ds_t - w.apply(out.dz, false), false);
      out.dkappa = (dk - kappa * out.dtau) / tau;
      return out.dx.allFinite() && out.dz.allFinite() && std::isfinite(out.dtau);
    };
    auto step_to_boundary = [&](const Direction& dd) {
      // measured in the scaled space, where lambda is well centred
      double a = std::min(max_step(lambda, w.apply(dd.ds, true), k),
                          max_step(lambda, w.apply(dd.dz, false), k));
      if (dd.dtau < 0.0) a = std::min(a, -tau / dd.dtau);
      if (dd.dkappa < 0.0) a = std::min(a, -kappa / dd.dkappa);
      return a;
    };

    Direction aff;
    if (!direction(1.0, -lambda, -tau * kappa, aff)) {
      diag << "affine direction failed at iteration " << iter;
      break;
    }
    const double alpha_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    const VectorXd corr = jordan_product(w.apply(aff.ds, true), w.apply(aff.dz, false), k);
    const VectorXd comp = sigma * mu * e_id - jordan_product(lambda, lambda, k) - corr;
    const VectorXd ds_t = jordan_divide(lambda, comp, k);
    const double dk = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
    Direction cmb;
    if (!direction(1.0 - sigma, ds_t, dk, cmb)) {
      diag << "combined direction failed at iteration " << iter;
      break;
    }
    const double alpha = std::min(1.0, 0.99 * step_to_boundary(cmb));
    if (!(alpha > 1e-12)) {
      diag << "step length collapsed at iteration " << iter;
      break;
    }
    x += alpha * cmb.dx;
    y += alpha * cmb.dy;
    z += alpha * cmb.dz;
    s += alpha * cmb.ds;
    tau += alpha * cmb.dtau;
    kappa += alpha * cmb.dkappa;
  }

  if (sol.status == SolveStatus::numerical_failure) {
    // report the last iterate so callers can inspect it
    x /= tau; y /= tau; z /= tau; s /= tau;
  }
  sol.primal_residual = pres;
  sol.dual_residual = dres;
  sol.gap = gap;
  sol.x = eq.col.asDiagonal() * x;
  sol.y = eq.eq.asDiagonal() * y;
  sol.z = eq.cone.asDiagonal() * z;
  sol.s = s.cwiseQuotient(eq.cone);
  diag << (diag.tellp() > 0 ? "; " : "") << "iterations=" << sol.iterations << " pres=" << pres
       << " dres=" << dres << " gap=" << gap;
  sol.diagnostics = diag.str();
  return sol;
}

namespace {

std::string dominant_certificate_family(const ConicForm& form, const ConicSolution& cs) {
  std::map<std::string, double> weight;
  const auto& d = form.data;
  for (Eigen::Index i = 0; i < d.h.size(); ++i)
    weight[form.cone_row_family[static_cast<std::size_t>(i)]] += d.h(i) * cs.z(i);
  for (Eigen::Index i = 0; i < d.b.size(); ++i)
    weight[form.eq_row_family[static_cast<std::size_t>(i)]] += d.b(i) * cs.y(i);
  std::string best;
  double most = 0.0;
  for (const auto& [family, wgt] : weight)
    if (wgt < most) {
      most = wgt;
      best = family;
    }
  return best;
}

}  // namespace

SolveResult solve(const ConvexProgram& program, const SolverSettings& settings) {
  const ConicForm form = conic_form(program);
  const ConicSolution cs = solve_conic(form.data, settings);
  SolveResult r;
  r.status = cs.status;
  r.iterations = cs.iterations;
  r.diagnostics = cs.diagnostics;
  if (cs.x.size() == form.data.num_variables()) {
    r.values.assign(cs.x.data(), cs.x.data() + form.num_user_variables);
    r.objective = program.objective().evaluate(r.values);
    r.max_residual = program.max_violation(r.values);
  } else {
    r.values.assign(static_cast<std::size_t>(form.num_user_variables), 0.0);
    r.max_residual = kInf;
  }
  if (r.status == SolveStatus::infeasible) r.violated_family = dominant_certificate_family(form, cs);
  if (r.status == SolveStatus::optimal && !(r.max_residual <= settings.residual_tol)) {
    r.status = SolveStatus::numerical_failure;
    const auto [family, v] = program.worst_violation(r.values);
    r.diagnostics += "; residual check failed: " + family + " violated by " + std::to_string(v);
  }
  return r;
}

SolveResult solve(const ConvexProgram& program, const SimControls& controls) {
  return solve(program, SolverSettings::from(controls));
}

}  // namespace risuav::convex
