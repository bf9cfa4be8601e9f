#include "ddib/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/QR>

#include "ddib/error.hpp"

namespace ddib {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_clouds(const PointCloud& source, const PointCloud& target) {
  if (source.size() == 0 || target.size() == 0) {
    throw ParameterError("optimal transport needs non-empty point sets");
  }
  if (source.dim() != target.dim()) {
    throw ShapeError("source and target clouds have different dimensions");
  }
}

void check_options(const SinkhornOptions& opt) {
  if (!(opt.epsilon > 0.0)) throw ParameterError("sinkhorn epsilon must be positive");
  if (opt.max_iters < 1) throw ParameterError("sinkhorn max_iters must be positive");
  if (!(opt.tol > 0.0)) throw ParameterError("sinkhorn tolerance must be positive");
}

Eigen::VectorXd uniform(std::size_t n) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

double violation_of(const Eigen::MatrixXd& p, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b) {
  return (p.rowwise().sum() - a).cwiseAbs().sum() +
         (p.colwise().sum().transpose() - b).cwiseAbs().sum();
}

// Integer transportation problem by successive shortest paths with
// Johnson potentials. Supplies and demands are unit counts; returns the
// flow matrix.
Eigen::MatrixXi solve_transportation(const Eigen::MatrixXd& cost,
                                     std::vector<int> supply,
                                     std::vector<int> demand) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  Eigen::MatrixXi flow = Eigen::MatrixXi::Zero(n, m);
  // Nodes 0..n-1 are sources, n..n+m-1 sinks. The super source has
  // potential 0 throughout.
  std::vector<double> pot(static_cast<std::size_t>(n + m), 0.0);
  std::vector<double> dist(static_cast<std::size_t>(n + m));
  std::vector<int> parent(static_cast<std::size_t>(n + m));
  std::vector<char> done(static_cast<std::size_t>(n + m));
  int remaining = std::accumulate(supply.begin(), supply.end(), 0);

  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i) {
      if (supply[static_cast<std::size_t>(i)] > 0) {
        dist[static_cast<std::size_t>(i)] = std::max(0.0, -pot[static_cast<std::size_t>(i)]);
        parent[static_cast<std::size_t>(i)] = -1;
      }
    }
    int sink = -1;
    double sink_dist = kInf;
    for (;;) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < n + m; ++v) {
        if (!done[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < best) {
          best = dist[static_cast<std::size_t>(v)];
          u = v;
        }
      }
      if (u < 0) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u >= n) {
        const int j = u - n;
        if (demand[static_cast<std::size_t>(j)] > 0) {
          sink = u;
          sink_dist = best;
          break;
        }
        // Residual backward arcs sink -> source where flow is positive.
        for (int i = 0; i < n; ++i) {
          if (flow(i, j) > 0 && !done[static_cast<std::size_t>(i)]) {
            const double rc = std::max(
                0.0, -cost(i, j) + pot[static_cast<std::size_t>(u)] - pot[static_cast<std::size_t>(i)]);
            if (best + rc < dist[static_cast<std::size_t>(i)]) {
              dist[static_cast<std::size_t>(i)] = best + rc;
              parent[static_cast<std::size_t>(i)] = u;
            }
          }
        }
      } else {
        for (int j = 0; j < m; ++j) {
          const int v = n + j;
          if (done[static_cast<std::size_t>(v)]) continue;
          const double rc = std::max(
              0.0, cost(u, j) + pot[static_cast<std::size_t>(u)] - pot[static_cast<std::size_t>(v)]);
          if (best + rc < dist[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = best + rc;
            parent[static_cast<std::size_t>(v)] = u;
          }
        }
      }
    }
    if (sink < 0) throw NumericError("transportation solver found no augmenting path");

    // Bottleneck along the path.
    int amount = demand[static_cast<std::size_t>(sink - n)];
    int v = sink;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (u >= n) amount = std::min(amount, flow(v, u - n));  // backward arc
      v = u;
    }
    amount = std::min(amount, supply[static_cast<std::size_t>(v)]);
    supply[static_cast<std::size_t>(v)] -= amount;
    demand[static_cast<std::size_t>(sink - n)] -= amount;
    remaining -= amount;
    v = sink;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (u < n) {
        flow(u, v - n) += amount;
      } else {
        flow(v, u - n) -= amount;
      }
      v = u;
    }
    for (int w = 0; w < n + m; ++w) {
      pot[static_cast<std::size_t>(w)] += std::min(dist[static_cast<std::size_t>(w)], sink_dist);
    }
  }
  return flow;
}

}  // namespace

Eigen::MatrixXd squared_euclidean_cost(const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) throw ShapeError("cost matrix: dimension mismatch");
  Eigen::MatrixXd c(x.cols(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    c.col(j) = (x.colwise() - y.col(j)).colwise().squaredNorm().transpose();
  }
  return c;
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ShapeError("assignment needs a square cost matrix");
  // Row i of the cost is column i of the transpose, contiguous in memory.
  const Eigen::MatrixXd ct = cost.transpose();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row (1-based)
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  std::vector<double> minv(static_cast<std::size_t>(n) + 1);
  std::vector<char> used(static_cast<std::size_t>(n) + 1);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      const double* row = ct.col(i0 - 1).data();
      const double ui = u[static_cast<std::size_t>(i0)];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = row[j - 1] - ui - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  return assignment;
}

TransportPlan emd(const PointCloud& source, const PointCloud& target) {
  check_clouds(source, target);
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  if (n > kEmdMaxPoints || m > kEmdMaxPoints) {
    throw CapacityError("exact EMD is limited to " + std::to_string(kEmdMaxPoints) +
                        " points per side (got " + std::to_string(n) + " x " +
                        std::to_string(m) + "); use sinkhorn for larger sets");
  }
  const Eigen::MatrixXd c = squared_euclidean_cost(source.points, target.points);
  TransportPlan plan;
  plan.source_weights = uniform(n);
  plan.target_weights = uniform(m);
  plan.coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  if (n == m) {
    const std::vector<int> assignment = solve_assignment(c);
    for (std::size_t i = 0; i < n; ++i) {
      plan.coupling(static_cast<Eigen::Index>(i), assignment[i]) = 1.0 / static_cast<double>(n);
    }
  } else {
    const std::size_t g = std::gcd(n, m);
    const Eigen::MatrixXi flow = solve_transportation(
        c, std::vector<int>(n, static_cast<int>(m / g)), std::vector<int>(m, static_cast<int>(n / g)));
    const double unit = static_cast<double>(g) / (static_cast<double>(n) * static_cast<double>(m));
    plan.coupling = flow.cast<double>() * unit;
  }
  plan.cost = (plan.coupling.array() * c.array()).sum();
  plan.regularized_cost = plan.cost;
  plan.marginal_violation = violation_of(plan.coupling, plan.source_weights, plan.target_weights);
  return plan;
}

namespace {

// Newton polishing solves a dense (n + m - 1) system per step.
constexpr std::size_t kNewtonMaxPoints = 600;

struct SinkhornState {
  Eigen::VectorXd f;
  Eigen::VectorXd g;
  int iterations = 0;
  double violation = kInf;
};

// Soft-min against the other side's weights w:
//   out_i = -eps * log sum_j w_j exp((h_j - C_ij) / eps),
// where row i of C is passed as column i of `ct` (m x n, contiguous).
Eigen::VectorXd softmin(const Eigen::MatrixXd& ct, const Eigen::VectorXd& h,
                        const Eigen::VectorXd& log_w, double eps) {
  const double inv_eps = 1.0 / eps;
  const Eigen::ArrayXd base = h.array() * inv_eps + log_w.array();
  Eigen::VectorXd out(ct.cols());
  Eigen::ArrayXd z(ct.rows());
  for (Eigen::Index i = 0; i < ct.cols(); ++i) {
    z = base - ct.col(i).array() * inv_eps;
    const double mx = z.maxCoeff();
    out[i] = -eps * (mx + std::log((z - mx).exp().sum()));
  }
  return out;
}

// Marginal residuals [P 1 - a ; P^T 1 - b] of the plan of (f, g).
Eigen::VectorXd marginal_residual(const Eigen::MatrixXd& c, const Eigen::VectorXd& log_a,
                                  const Eigen::VectorXd& log_b, double eps,
                                  const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                  Eigen::MatrixXd* plan_out = nullptr) {
  Eigen::ArrayXXd logp = (-c).array();
  logp.colwise() += f.array();
  logp.rowwise() += g.array().transpose();
  logp /= eps;
  logp.colwise() += log_a.array();
  logp.rowwise() += log_b.array().transpose();
  const Eigen::MatrixXd p = logp.exp().matrix();
  Eigen::VectorXd r(f.size() + g.size());
  r << p.rowwise().sum() - log_a.array().exp().matrix(),
      p.colwise().sum().transpose() - log_b.array().exp().matrix();
  if (plan_out) *plan_out = p;
  return r;
}

// One damped Newton step on the dual. The Jacobian of the marginals is
//   (1/eps) [diag(P 1)  P ; P^T  diag(P^T 1)],
// singular along (1, -1); the last g entry is held fixed to remove it.
// Returns false when no step length reduces the L1 residual.
bool newton_step(const Eigen::MatrixXd& c, const Eigen::VectorXd& log_a,
                 const Eigen::VectorXd& log_b, double eps, SinkhornState& st) {
  const Eigen::Index n = st.f.size();
  const Eigen::Index m = st.g.size();
  Eigen::MatrixXd p;
  const Eigen::VectorXd r = marginal_residual(c, log_a, log_b, eps, st.f, st.g, &p);
  const Eigen::Index k = n + m - 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(k, k);
  jac.topLeftCorner(n, n).diagonal() = p.rowwise().sum();
  jac.topRightCorner(n, m - 1) = p.leftCols(m - 1);
  jac.bottomLeftCorner(m - 1, n) = p.leftCols(m - 1).transpose();
  jac.bottomRightCorner(m - 1, m - 1).diagonal() = p.colwise().sum().head(m - 1).transpose();
  const Eigen::VectorXd step = jac.ldlt().solve(-eps * r.head(k));
  if (!step.allFinite()) return false;
  const double before = r.lpNorm<1>();
  for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
    Eigen::VectorXd f = st.f + alpha * step.head(n);
    Eigen::VectorXd g = st.g;
    g.head(m - 1) += alpha * step.tail(m - 1);
    if (marginal_residual(c, log_a, log_b, eps, f, g).lpNorm<1>() < before) {
      st.f = std::move(f);
      st.g = std::move(g);
      return true;
    }
  }
  return false;
}

// Over-relaxation factor for alternating updates contracting at rate rho.
double optimal_relaxation(double rho) {
  constexpr double kMaxOmega = 1.9;
  return std::min(kMaxOmega, 2.0 / (1.0 + std::sqrt(1.0 - rho)));
}

// Runs alternating updates at fixed eps until the violation drops to tol
// or `budget` iterations are spent. The violation measured is that of the
// rows; column marginals are exact whenever the stage returns.
//
// Near-degenerate problems (two targets at almost the same cost from every
// source) make the alternating updates crawl. For small problems a stalled
// run switches to Newton steps on the dual, each followed by an exact
// column refit; a Newton step counts as one iteration. Larger problems use
// over-relaxed updates instead, with the factor set from the observed
// contraction rate, and drop back to plain updates if the violation stops
// shrinking.
void sinkhorn_stage(const Eigen::MatrixXd& c, const Eigen::MatrixXd& ct,
                    const Eigen::VectorXd& log_a, const Eigen::VectorXd& log_b,
                    double eps, double tol, int budget, SinkhornState& st) {
  constexpr std::size_t kWindow = 20;
  constexpr double kStallRate = 0.98;
  const Eigen::ArrayXd a = log_a.array().exp();
  bool newton = c.rows() + c.cols() <= static_cast<Eigen::Index>(kNewtonMaxPoints);
  bool relax = !newton;
  double omega = 1.0;
  std::size_t relaxed_since = 0;
  std::vector<double> history;
  for (int k = 0; k < budget; ++k) {
    const Eigen::VectorXd f_new = softmin(ct, st.g, log_b, eps);
    if (st.iterations > 0) {
      // Row sums of the current plan are a_i * exp((f_i - f_new_i) / eps).
      st.violation = (a * (((st.f - f_new).array() / eps).exp() - 1.0)).abs().sum();
      if (st.violation <= tol) {
        if (omega == 1.0) return;
        // Columns are only exact after a plain update.
        omega = 1.0;
        relax = false;
      }
      history.push_back(st.violation);
      const auto h = history.size();
      if (h > kWindow) {
        const double rate = std::pow(history[h - 1] / history[h - 1 - kWindow], 1.0 / kWindow);
        if (newton && rate > kStallRate) {
          if (newton_step(c, log_a, log_b, eps, st)) {
            st.g = softmin(c, st.f, log_a, eps);
            ++st.iterations;
            continue;
          }
          newton = false;
        } else if (relax && omega == 1.0 && rate < 1.0) {
          omega = optimal_relaxation(rate);
          relaxed_since = h;
        } else if (omega > 1.0 && h >= relaxed_since + 2 * kWindow &&
                   (h - relaxed_since) % kWindow == 0) {
          // Checked on whole windows, skipping the first one after omega
          // changes: relaxed runs overshoot briefly before contracting.
          if (!(rate < 1.0)) {
            omega = 1.0;
            relax = false;
          } else {
            // The early plain rate underestimates the asymptotic one; infer
            // it again from the relaxed rate and only ever raise omega.
            const double rho = std::min(1.0, (rate + omega - 1.0) * (rate + omega - 1.0) /
                                                 (rate * omega * omega));
            const double better = optimal_relaxation(rho);
            if (better > omega + 0.01) {
              omega = better;
              relaxed_since = h;
            }
          }
        }
      }
    }
    if (omega == 1.0) {
      st.f = f_new;
      st.g = softmin(c, st.f, log_a, eps);
    } else {
      st.f = (1.0 - omega) * st.f + omega * f_new;
      st.g = (1.0 - omega) * st.g + omega * softmin(c, st.f, log_a, eps);
    }
    ++st.iterations;
  }
}

}  // namespace

TransportPlan sinkhorn(const PointCloud& source, const PointCloud& target,
                       const SinkhornOptions& opt) {
  check_clouds(source, target);
  check_options(opt);
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  const Eigen::MatrixXd c = squared_euclidean_cost(source.points, target.points);
  const Eigen::MatrixXd ct = c.transpose();
  TransportPlan plan;
  plan.source_weights = uniform(n);
  plan.target_weights = uniform(m);
  const Eigen::VectorXd log_a = plan.source_weights.array().log().matrix();
  const Eigen::VectorXd log_b = plan.target_weights.array().log().matrix();

  SinkhornState st;
  st.f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  st.g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  if (opt.epsilon_scaling) {
    // Coarse stages only need a loose fit (1e-2); they exist to warm-start
    // the potentials for the target epsilon.
    const double scale = std::max(c.maxCoeff(), opt.epsilon);
    for (double eps = scale; eps > opt.epsilon; eps *= 0.5) {
      const int budget = std::min(100, opt.max_iters - st.iterations);
      if (budget <= 0) break;
      SinkhornState stage = st;
      stage.iterations = 0;
      sinkhorn_stage(c, ct, log_a, log_b, eps, 1e-2, budget, stage);
      st.f = stage.f;
      st.g = stage.g;
      st.iterations += stage.iterations;
    }
  }
  const int spent = st.iterations;
  SinkhornState final_stage = st;
  final_stage.iterations = 0;
  sinkhorn_stage(c, ct, log_a, log_b, opt.epsilon, opt.tol,
                 std::max(0, opt.max_iters - spent), final_stage);
  st = final_stage;
  st.iterations += spent;

  const double eps = opt.epsilon;
  Eigen::ArrayXXd logp = (-c).array();
  logp.colwise() += st.f.array();
  logp.rowwise() += st.g.array().transpose();
  logp /= eps;
  logp.colwise() += log_a.array();
  logp.rowwise() += log_b.array().transpose();
  plan.coupling = logp.exp().matrix();
  plan.marginal_violation = violation_of(plan.coupling, plan.source_weights, plan.target_weights);
  plan.iterations = st.iterations;
  plan.cost = (plan.coupling.array() * c.array()).sum();
  plan.regularized_cost = st.f.dot(plan.source_weights) + st.g.dot(plan.target_weights);
  if (!(plan.marginal_violation <= opt.tol) || !std::isfinite(plan.cost)) {
    throw ConvergenceError("sinkhorn did not reach tolerance " + std::to_string(opt.tol) +
                               " within " + std::to_string(opt.max_iters) +
                               " iterations (violation " +
                               std::to_string(plan.marginal_violation) + ")",
                           plan.marginal_violation);
  }
  return plan;
}

TransportPlan sinkhorn(const PointCloud& source, const PointCloud& target,
                       double epsilon, int max_iters, double tol) {
  return sinkhorn(source, target, SinkhornOptions{epsilon, max_iters, tol, true});
}

// The two potentials coincide at the optimum, so iterate the averaged fixed
// point f <- (f + softmin(f)) / 2, which converges in a few dozen steps where
// alternating updates can take thousands.
double sinkhorn_self_cost(const PointCloud& cloud, const SinkhornOptions& opt) {
  check_clouds(cloud, cloud);
  check_options(opt);
  const Eigen::MatrixXd c = squared_euclidean_cost(cloud.points, cloud.points);
  const Eigen::VectorXd w = uniform(cloud.size());
  const Eigen::VectorXd log_w = w.array().log().matrix();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(c.rows());
  double eps = opt.epsilon_scaling ? std::max(c.maxCoeff(), opt.epsilon) : opt.epsilon;
  double violation = kInf;
  for (int k = 0; k < opt.max_iters; ++k) {
    const Eigen::VectorXd t = softmin(c, f, log_w, eps);
    // Row and column sums of the plan are both w_i exp((f_i - t_i) / eps).
    violation = 2.0 * (w.array() * (((f - t).array() / eps).exp() - 1.0)).abs().sum();
    if (eps == opt.epsilon && violation <= opt.tol) return 2.0 * f.dot(w);
    if (eps > opt.epsilon && violation <= 1e-3) eps = std::max(0.5 * eps, opt.epsilon);
    f = 0.5 * (f + t);
  }
  throw ConvergenceError("sinkhorn did not reach tolerance " + std::to_string(opt.tol) +
                             " within " + std::to_string(opt.max_iters) +
                             " iterations (violation " + std::to_string(violation) + ")",
                         violation);
}

double sinkhorn_divergence(const PointCloud& a, const PointCloud& b,
                           const SinkhornOptions& options) {
  const double ab = sinkhorn(a, b, options).regularized_cost;
  return ab - 0.5 * (sinkhorn_self_cost(a, options) + sinkhorn_self_cost(b, options));
}

Eigen::MatrixXd AffineMap::apply(const Eigen::MatrixXd& points) const {
  if (points.rows() != linear.cols()) throw ShapeError("affine map dimension mismatch");
  return (linear * points).colwise() + offset;
}

PointCloud AffineMap::apply(const PointCloud& cloud) const {
  return PointCloud(apply(cloud.points), cloud.tags);
}

PointCloud barycentric_map(const TransportPlan& plan, const PointCloud& source,
                           const PointCloud& target) {
  if (plan.coupling.rows() != static_cast<Eigen::Index>(source.size()) ||
      plan.coupling.cols() != static_cast<Eigen::Index>(target.size()) ||
      plan.source_weights.size() != plan.coupling.rows()) {
    throw ShapeError("transport plan does not match the point clouds");
  }
  for (Eigen::Index i = 0; i < plan.source_weights.size(); ++i) {
    if (!(plan.source_weights[i] > 0.0)) {
      throw DegenerateDataError("source point " + std::to_string(i) + " carries no mass");
    }
  }
  Eigen::MatrixXd mapped = target.points * plan.coupling.transpose();
  mapped.array().rowwise() /= plan.source_weights.array().transpose();
  return PointCloud(std::move(mapped), source.tags);
}

AffineMap linear_map_estimate(const PointCloud& source, const PointCloud& target,
                              const SinkhornOptions& options) {
  check_clouds(source, target);
  const int d = source.dim();
  if (source.size() < static_cast<std::size_t>(d) + 1) {
    throw DegenerateDataError("linear map estimation needs at least dim + 1 source points");
  }
  const TransportPlan plan = sinkhorn(source, target, options);
  const PointCloud images = barycentric_map(plan, source, target);
  // Least squares on [x^T 1] * [A^T; b^T] = y^T.
  const auto n = static_cast<Eigen::Index>(source.size());
  Eigen::MatrixXd design(n, d + 1);
  design.leftCols(d) = source.points.transpose();
  design.col(d).setOnes();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < d + 1) {
    throw DegenerateDataError("source points are affinely dependent; the map is not identifiable");
  }
  const Eigen::MatrixXd sol = qr.solve(Eigen::MatrixXd(images.points.transpose()));
  return AffineMap{sol.topRows(d).transpose(), sol.row(d).transpose()};
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed) {
  k = std::min(k, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

namespace {

PointCloud subsample(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd pts(cloud.dim(), static_cast<Eigen::Index>(idx.size()));
  std::vector<std::int64_t> tags(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    pts.col(static_cast<Eigen::Index>(k)) = cloud.points.col(static_cast<Eigen::Index>(idx[k]));
    tags[k] = cloud.tags[idx[k]];
  }
  return PointCloud(std::move(pts), std::move(tags));
}

}  // namespace

Eigen::MatrixXd ColorMap::apply(const Eigen::MatrixXd& colors) const {
  if (colors.rows() != anchors.rows()) throw ShapeError("color map dimension mismatch");
  Eigen::MatrixXd out = colors;
  for (Eigen::Index j = 0; j < colors.cols(); ++j) {
    Eigen::Index nearest = 0;
    (anchors.colwise() - colors.col(j)).colwise().squaredNorm().minCoeff(&nearest);
    out.col(j) += displacements.col(nearest);
  }
  return out;
}

PointCloud ColorMap::apply(const PointCloud& cloud) const {
  return PointCloud(apply(cloud.points), cloud.tags);
}

ColorMap color_convert(const PointCloud& reference, const PointCloud& subject,
                       const ColorConvertOptions& options) {
  if (reference.dim() != 3 || subject.dim() != 3) {
    throw ShapeError("color conversion works on 3D color clouds");
  }
  if (options.sample_size == 0 || options.sample_size > kEmdMaxPoints) {
    throw ParameterError("color conversion sample size must lie in [1, " +
                         std::to_string(kEmdMaxPoints) + "]");
  }
  const PointCloud subj = subsample(subject, sample_indices(subject.size(), options.sample_size, options.seed));
  const PointCloud ref = subsample(reference, sample_indices(reference.size(), options.sample_size, options.seed));
  const TransportPlan plan = options.method == PlanMethod::kEmd
                                 ? emd(subj, ref)
                                 : sinkhorn(subj, ref, options.sinkhorn);
  const PointCloud images = barycentric_map(plan, subj, ref);
  return ColorMap{subj.points, images.points - subj.points};
}

double pixel_mse(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height || a.data.size() != b.data.size()) {
    throw ShapeError("pixel_mse: images differ in size (" + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height) + ")");
  }
  if (a.data.empty()) throw ShapeError("pixel_mse: empty images");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = 2.0 * (static_cast<double>(a.data[k]) - static_cast<double>(b.data[k])) / 255.0;
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

}  // namespace ddib
