#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace d2md {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// coef * 2^{x[var]}
struct Exp2Term {
  std::size_t var = 0;
  double coef = 0.0;
};

/// coef * log2(constant + sum_i gain_i * 2^{x[var_i]})
struct LogSumExp2Term {
  double coef = 0.0;
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;  // (var, gain)
};

/// Sum of a constant, linear terms and exp2 / log-sum-exp2 atoms. Convex when
/// every atom coefficient is >= 0, concave when every one is <= 0.
struct SmoothFunction {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> linear;
  std::vector<Exp2Term> exp2;
  std::vector<LogSumExp2Term> lse;

  double value(const Vec& x) const;
  /// Sum of the absolute values of the individual terms.
  double magnitude(const Vec& x) const;
  void add_gradient(const Vec& x, double scale, Vec& grad) const;
  void add_hessian(const Vec& x, double scale, Mat& hess) const;

  SmoothFunction& operator+=(const SmoothFunction& other);
  SmoothFunction& operator*=(double s);
};

SmoothFunction operator+(SmoothFunction a, const SmoothFunction& b);
SmoothFunction operator*(double s, SmoothFunction f);

/// maximize objective(x) s.t. constraints[j](x) <= 0, objective concave,
/// constraints convex.
struct ConvexProgram {
  std::size_t num_vars = 0;
  SmoothFunction objective;
  std::vector<SmoothFunction> constraints;
};

struct BarrierOptions {
  double t0 = 1.0;
  double mu = 20.0;
  double gap_tol = 1e-8;       // stop once (#constraints)/t falls below this
  double newton_tol = 1e-7;    // half squared Newton decrement, barrier-function units
  int max_newton = 200;        // per centering step
  int max_outer = 80;
  double stop_below = -1e300;  // early exit once x[stop_var] < stop_below
  std::size_t stop_var = 0;
};

struct BarrierResult {
  Vec x;
  double t = 0.0;
  int newton_steps = 0;
  int outer_steps = 0;
  std::vector<int> centring_steps;  // Newton steps per value of t
  bool converged = false;
  bool stopped_early = false;
};

bool strictly_feasible(const ConvexProgram& prog, const Vec& x);

/// Log-barrier interior-point method with damped Newton centring. `x0` must be
/// strictly feasible.
BarrierResult solve_barrier(const ConvexProgram& prog, const Vec& x0, const BarrierOptions& opts = {});

/// Dual estimates mu_j = 1 / (t * -c_j(x)) of a barrier iterate.
Vec barrier_duals(const ConvexProgram& prog, const Vec& x, double t);

/// grad f0 - sum_j mu_j grad c_j.
Vec lagrangian_gradient(const ConvexProgram& prog, const Vec& x, const Vec& duals);

/// Nonnegative least-squares multipliers for the constraints within
/// `active_tol` of their bound at x; zero for the rest.
Vec active_duals(const ConvexProgram& prog, const Vec& x, double active_tol = 1e-5);

}  // namespace d2md
