#include "d2md/convex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace d2md {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double lse_sum(const LogSumExp2Term& t, const Vec& x) {
  double s = t.constant;
  for (const auto& [v, g] : t.terms) s += g * std::exp2(x[static_cast<Eigen::Index>(v)]);
  return s;
}

}  // namespace

double SmoothFunction::value(const Vec& x) const {
  double f = constant;
  for (const auto& [v, c] : linear) f += c * x[static_cast<Eigen::Index>(v)];
  for (const auto& e : exp2) f += e.coef * std::exp2(x[static_cast<Eigen::Index>(e.var)]);
  for (const auto& l : lse) f += l.coef * std::log2(lse_sum(l, x));
  return f;
}

double SmoothFunction::magnitude(const Vec& x) const {
  double f = std::abs(constant);
  for (const auto& [v, c] : linear) f += std::abs(c * x[static_cast<Eigen::Index>(v)]);
  for (const auto& e : exp2) f += std::abs(e.coef * std::exp2(x[static_cast<Eigen::Index>(e.var)]));
  for (const auto& l : lse) f += std::abs(l.coef * std::log2(lse_sum(l, x)));
  return f;
}

void SmoothFunction::add_gradient(const Vec& x, double scale, Vec& grad) const {
  for (const auto& [v, c] : linear) grad[static_cast<Eigen::Index>(v)] += scale * c;
  for (const auto& e : exp2) {
    const auto i = static_cast<Eigen::Index>(e.var);
    grad[i] += scale * e.coef * kLn2 * std::exp2(x[i]);
  }
  for (const auto& l : lse) {
    const double s = lse_sum(l, x);
    for (const auto& [v, g] : l.terms) {
      const auto i = static_cast<Eigen::Index>(v);
      grad[i] += scale * l.coef * g * std::exp2(x[i]) / s;
    }
  }
}

void SmoothFunction::add_hessian(const Vec& x, double scale, Mat& hess) const {
  for (const auto& e : exp2) {
    const auto i = static_cast<Eigen::Index>(e.var);
    hess(i, i) += scale * e.coef * kLn2 * kLn2 * std::exp2(x[i]);
  }
  std::vector<double> w;
  for (const auto& l : lse) {
    const double s = lse_sum(l, x);
    w.resize(l.terms.size());
    for (std::size_t a = 0; a < l.terms.size(); ++a)
      w[a] = l.terms[a].second * std::exp2(x[static_cast<Eigen::Index>(l.terms[a].first)]) / s;
    const double c = scale * l.coef * kLn2;
    for (std::size_t a = 0; a < l.terms.size(); ++a) {
      const auto ia = static_cast<Eigen::Index>(l.terms[a].first);
      hess(ia, ia) += c * w[a];
      for (std::size_t b = 0; b < l.terms.size(); ++b) {
        const auto ib = static_cast<Eigen::Index>(l.terms[b].first);
        hess(ia, ib) -= c * w[a] * w[b];
      }
    }
  }
}

SmoothFunction& SmoothFunction::operator+=(const SmoothFunction& other) {
  constant += other.constant;
  linear.insert(linear.end(), other.linear.begin(), other.linear.end());
  exp2.insert(exp2.end(), other.exp2.begin(), other.exp2.end());
  lse.insert(lse.end(), other.lse.begin(), other.lse.end());
  return *this;
}

SmoothFunction& SmoothFunction::operator*=(double s) {
  constant *= s;
  for (auto& l : linear) l.second *= s;
  for (auto& e : exp2) e.coef *= s;
  for (auto& l : lse) l.coef *= s;
  return *this;
}

SmoothFunction operator+(SmoothFunction a, const SmoothFunction& b) {
  a += b;
  return a;
}

SmoothFunction operator*(double s, SmoothFunction f) {
  f *= s;
  return f;
}

bool strictly_feasible(const ConvexProgram& prog, const Vec& x) {
  for (const auto& c : prog.constraints) {
    const double v = c.value(x);
    if (!(v < 0.0)) return false;
  }
  return true;
}

namespace {

std::vector<Eigen::Index> support_of(const SmoothFunction& f) {
  std::vector<Eigen::Index> s;
  for (const auto& l : f.linear) s.push_back(static_cast<Eigen::Index>(l.first));
  for (const auto& e : f.exp2) s.push_back(static_cast<Eigen::Index>(e.var));
  for (const auto& l : f.lse)
    for (const auto& t : l.terms) s.push_back(static_cast<Eigen::Index>(t.first));
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

class BarrierSolver {
 public:
  BarrierSolver(const ConvexProgram& prog, const BarrierOptions& opts) : prog_(prog), opts_(opts) {
    for (const auto& c : prog.constraints) supports_.push_back(support_of(c));
    work_ = Vec::Zero(static_cast<Eigen::Index>(prog.num_vars));
  }

  // Size of the rounding error in phi(x, t).
  double phi_noise(const Vec& x, double t) const {
    double v = t * prog_.objective.magnitude(x);
    for (const auto& c : prog_.constraints) v += std::abs(std::log(-c.value(x)));
    return 1e-13 * v;
  }

  // Returns +inf outside the strict interior.
  double phi(const Vec& x, double t) const {
    double v = -t * prog_.objective.value(x);
    for (const auto& c : prog_.constraints) {
      const double cj = c.value(x);
      if (!(cj < 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(-cj);
    }
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  void derivatives(const Vec& x, double t, Vec& grad, Mat& hess) {
    const auto n = static_cast<Eigen::Index>(prog_.num_vars);
    grad.setZero(n);
    hess.setZero(n, n);
    prog_.objective.add_gradient(x, -t, grad);
    prog_.objective.add_hessian(x, -t, hess);
    for (std::size_t j = 0; j < prog_.constraints.size(); ++j) {
      const auto& c = prog_.constraints[j];
      const double slack = -c.value(x);
      const auto& sup = supports_[j];
      for (auto i : sup) work_[i] = 0.0;
      c.add_gradient(x, 1.0, work_);
      for (auto i : sup) grad[i] += work_[i] / slack;
      c.add_hessian(x, 1.0 / slack, hess);
      const double inv2 = 1.0 / (slack * slack);
      for (auto a : sup)
        for (auto b : sup) hess(a, b) += work_[a] * work_[b] * inv2;
    }
  }

  BarrierResult run(const Vec& x0) {
    BarrierResult res;
    res.x = x0;
    double t = opts_.t0;
    const double m = static_cast<double>(std::max<std::size_t>(prog_.constraints.size(), 1));
    Vec grad;
    Mat hess;
    for (int outer = 0; outer < opts_.max_outer; ++outer) {
      res.outer_steps = outer + 1;
      res.centring_steps.push_back(0);
      for (int it = 0; it < opts_.max_newton; ++it) {
        derivatives(res.x, t, grad, hess);
        Vec step = newton_step(hess, grad);
        const double decrement = -grad.dot(step);
        ++res.newton_steps;
        ++res.centring_steps.back();
        const double f0 = phi(res.x, t);
        // Below this the line search only sees rounding noise in phi.
        const double tol = std::max(opts_.newton_tol, phi_noise(res.x, t));
        if (!(decrement > 0.0) || decrement / 2.0 <= tol) break;
        double s = 1.0;
        bool moved = false;
        while (s > 1e-16) {
          Vec trial = res.x + s * step;
          const double f1 = phi(trial, t);
          if (f1 <= f0 - 0.01 * s * decrement) {
            res.x = std::move(trial);
            moved = true;
            break;
          }
          s *= 0.5;
        }
        if (!moved) break;
        // A step this short makes no progress the objective can resolve.
        if (s < 1e-6 && decrement < 1e-3) break;
        if (res.x[static_cast<Eigen::Index>(opts_.stop_var)] < opts_.stop_below) {
          res.t = t;
          res.stopped_early = true;
          return res;
        }
      }
      if (m / t < opts_.gap_tol) {
        res.converged = true;
        break;
      }
      t *= opts_.mu;
    }
    res.t = t;
    return res;
  }

 private:
  static Vec newton_step(const Mat& hess, const Vec& grad) {
    double reg = 0.0;
    const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 12; ++attempt) {
      Mat h = hess;
      if (reg > 0.0) h.diagonal().array() += reg;
      Eigen::LDLT<Mat> ldlt(h);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vec d = ldlt.solve(-grad);
        if (d.allFinite() && -grad.dot(d) > 0.0) return d;
      }
      reg = reg == 0.0 ? 1e-12 * scale : reg * 10.0;
    }
    return -grad / scale;
  }

  const ConvexProgram& prog_;
  BarrierOptions opts_;
  std::vector<std::vector<Eigen::Index>> supports_;
  Vec work_;
};

}  // namespace

BarrierResult solve_barrier(const ConvexProgram& prog, const Vec& x0, const BarrierOptions& opts) {
  BarrierSolver solver(prog, opts);
  return solver.run(x0);
}

Vec barrier_duals(const ConvexProgram& prog, const Vec& x, double t) {
  Vec mu(static_cast<Eigen::Index>(prog.constraints.size()));
  for (std::size_t j = 0; j < prog.constraints.size(); ++j)
    mu[static_cast<Eigen::Index>(j)] = 1.0 / (t * -prog.constraints[j].value(x));
  return mu;
}

Vec lagrangian_gradient(const ConvexProgram& prog, const Vec& x, const Vec& duals) {
  Vec g = Vec::Zero(static_cast<Eigen::Index>(prog.num_vars));
  prog.objective.add_gradient(x, 1.0, g);
  for (std::size_t j = 0; j < prog.constraints.size(); ++j)
    prog.constraints[j].add_gradient(x, -duals[static_cast<Eigen::Index>(j)], g);
  return g;
}

Vec active_duals(const ConvexProgram& prog, const Vec& x, double active_tol) {
  const auto n = static_cast<Eigen::Index>(prog.num_vars);
  const auto m = static_cast<Eigen::Index>(prog.constraints.size());
  Vec b = Vec::Zero(n);
  prog.objective.add_gradient(x, 1.0, b);
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < m; ++j)
    if (-prog.constraints[static_cast<std::size_t>(j)].value(x) <= active_tol) active.push_back(j);
  const auto na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, na);
  for (Eigen::Index c = 0; c < na; ++c) {
    Vec col = Vec::Zero(n);
    prog.constraints[static_cast<std::size_t>(active[static_cast<std::size_t>(c)])].add_gradient(x, 1.0, col);
    A.col(c) = col;
  }

  // Lawson-Hanson nonnegative least squares for b ~ A mu.
  Vec mu = Vec::Zero(na);
  std::vector<bool> in(static_cast<std::size_t>(na), false);
  const double tol = 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
  auto solve_on = [&](Vec& out) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index c = 0; c < na; ++c)
      if (in[static_cast<std::size_t>(c)]) cols.push_back(c);
    Eigen::MatrixXd Ap(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) Ap.col(static_cast<Eigen::Index>(i)) = A.col(cols[i]);
    const Vec z = Ap.colPivHouseholderQr().solve(b);
    out = Vec::Zero(na);
    for (std::size_t i = 0; i < cols.size(); ++i) out[cols[i]] = z[static_cast<Eigen::Index>(i)];
  };
  for (int outer = 0; outer < 3 * na + 3; ++outer) {
    const Vec w = A.transpose() * (b - A * mu);
    Eigen::Index pick = -1;
    double best = tol;
    for (Eigen::Index c = 0; c < na; ++c)
      if (!in[static_cast<std::size_t>(c)] && w[c] > best) {
        best = w[c];
        pick = c;
      }
    if (pick < 0) break;
    in[static_cast<std::size_t>(pick)] = true;
    for (int inner = 0; inner < 3 * na + 3; ++inner) {
      Vec z;
      solve_on(z);
      double alpha = 1.0;
      bool clipped = false;
      for (Eigen::Index c = 0; c < na; ++c)
        if (in[static_cast<std::size_t>(c)] && z[c] <= 0.0) {
          alpha = std::min(alpha, mu[c] / (mu[c] - z[c]));
          clipped = true;
        }
      if (!clipped) {
        mu = z;
        break;
      }
      mu += alpha * (z - mu);
      for (Eigen::Index c = 0; c < na; ++c)
        if (in[static_cast<std::size_t>(c)] && mu[c] <= tol) {
          in[static_cast<std::size_t>(c)] = false;
          mu[c] = 0.0;
        }
    }
  }

  Vec full = Vec::Zero(m);
  for (Eigen::Index c = 0; c < na; ++c) full[active[static_cast<std::size_t>(c)]] = mu[c];
  return full;
}

}  // namespace d2md
