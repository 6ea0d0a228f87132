#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace causalcast::selectors {

void lagged_system(const Matrix& data, int p, Matrix& X, Matrix& Xlag) {
  const Eigen::Index T = data.rows(), d = data.cols();
  if (p < 1 || T <= p) throw Error(ErrorKind::InsufficientHistory, "lagged_system: need more than p rows");
  const Eigen::Index n = T - p;
  X = data.bottomRows(n);
  Xlag.resize(n, p * d);
  for (int tau = 1; tau <= p; ++tau) Xlag.middleCols((tau - 1) * d, d) = data.middleRows(p - tau, n);
}

DynotearsObjective::DynotearsObjective(Matrix X, Matrix Xlag, double lambda_s, double lambda_w)
    : X_(std::move(X)), Xlag_(std::move(Xlag)), lambda_s_(lambda_s), lambda_w_(lambda_w) {
  if (X_.rows() != Xlag_.rows()) throw Error(ErrorKind::ShapeError, "dynotears: X and Xlag row mismatch");
}

Matrix DynotearsObjective::S(const Vector& theta) const {
  const Eigen::Index dd = d() * d();
  return (theta.segment(0, dd) - theta.segment(dd, dd)).reshaped(d(), d());
}

Matrix DynotearsObjective::W(const Vector& theta) const {
  const Eigen::Index dd = d() * d(), wd = lag_rows() * d();
  return (theta.segment(2 * dd, wd) - theta.segment(2 * dd + wd, wd)).reshaped(lag_rows(), d());
}

Vector DynotearsObjective::pack(const Matrix& S, const Matrix& W) const {
  const Eigen::Index dd = d() * d(), wd = lag_rows() * d();
  Vector theta(size());
  const Vector s = S.reshaped();
  const Vector w = W.reshaped();
  theta.segment(0, dd) = s.cwiseMax(0.0);
  theta.segment(dd, dd) = (-s).cwiseMax(0.0);
  theta.segment(2 * dd, wd) = w.cwiseMax(0.0);
  theta.segment(2 * dd + wd, wd) = (-w).cwiseMax(0.0);
  return theta;
}

double DynotearsObjective::evaluate(const Vector& theta, double rho, double alpha, Vector* grad) const {
  const Eigen::Index dd = d() * d(), wd = lag_rows() * d();
  const double n = static_cast<double>(X_.rows());
  const Matrix s = S(theta), w = W(theta);
  const Matrix R = X_ - X_ * s - Xlag_ * w;
  const auto acyc = numerics::acyclicity(s);
  const double value = 0.5 / n * R.squaredNorm() + lambda_s_ * theta.segment(0, 2 * dd).sum() +
                       lambda_w_ * theta.segment(2 * dd, 2 * wd).sum() + 0.5 * rho * acyc.h * acyc.h + alpha * acyc.h;
  if (grad) {
    const Matrix gs = -(X_.transpose() * R) / n + (rho * acyc.h + alpha) * acyc.gradient;
    const Matrix gw = -(Xlag_.transpose() * R) / n;
    grad->resize(size());
    const Vector gsv = gs.reshaped(), gwv = gw.reshaped();
    grad->segment(0, dd) = gsv.array() + lambda_s_;
    grad->segment(dd, dd) = -gsv.array() + lambda_s_;
    grad->segment(2 * dd, wd) = gwv.array() + lambda_w_;
    grad->segment(2 * dd + wd, wd) = -gwv.array() + lambda_w_;
  }
  return value;
}

namespace {

// Projected L-BFGS on theta >= 0 with the S diagonal pinned at zero.
class BoundedLbfgs {
 public:
  BoundedLbfgs(const DynotearsObjective& f, double rho, double alpha, const Deadline& deadline, int max_iter)
      : f_(f), rho_(rho), alpha_(alpha), deadline_(deadline), max_iter_(max_iter), fixed_(f.size()) {
    fixed_.setConstant(false);
    const Eigen::Index d = f.d();
    for (Eigen::Index i = 0; i < d; ++i) {
      fixed_[i * d + i] = true;
      fixed_[d * d + i * d + i] = true;
    }
  }

  Vector minimize(Vector x) {
    project(x);
    Vector g;
    double fx = f_.evaluate(x, rho_, alpha_, &g);
    std::deque<std::pair<Vector, Vector>> history;
    for (int it = 0; it < max_iter_; ++it) {
      deadline_.check("dynotears");
      Vector free = free_mask(x, g);
      const Vector pg = g.cwiseProduct(free);
      if (pg.lpNorm<Eigen::Infinity>() < kPgTol) break;

      Vector dir = -two_loop(pg, history, free);
      if (dir.dot(g) >= 0.0) {
        history.clear();
        dir = -pg;
      }
      double step = history.empty() ? std::min(1.0, 1.0 / std::max(pg.norm(), 1e-300)) : 1.0;
      Vector x_new, g_new;
      double f_new = fx;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        x_new = x + step * dir;
        project(x_new);
        f_new = f_.evaluate(x_new, rho_, alpha_, &g_new);
        if (f_new <= fx + 1e-4 * g.dot(x_new - x)) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        if (history.empty()) break;
        history.clear();
        continue;
      }
      const Vector s = x_new - x, y = g_new - g;
      if (s.dot(y) > 1e-12 * s.squaredNorm()) {
        history.emplace_back(s, y);
        if (history.size() > kMemory) history.pop_front();
      }
      const double decrease = fx - f_new;
      x = std::move(x_new);
      g = std::move(g_new);
      fx = f_new;
      if (decrease <= kFtol * std::max({std::fabs(fx), std::fabs(fx + decrease), 1.0})) break;
    }
    return x;
  }

 private:
  static constexpr double kPgTol = 1e-9;
  static constexpr double kFtol = 1e-12;
  static constexpr std::size_t kMemory = 10;

  void project(Vector& x) const {
    x = x.cwiseMax(0.0);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (fixed_[i]) x[i] = 0.0;
  }

  Vector free_mask(const Vector& x, const Vector& g) const {
    Vector m(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) m[i] = (fixed_[i] || (x[i] <= 0.0 && g[i] > 0.0)) ? 0.0 : 1.0;
    return m;
  }

  static Vector two_loop(const Vector& q0, const std::deque<std::pair<Vector, Vector>>& history, const Vector& free) {
    Vector q = q0;
    std::vector<double> a(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      const Vector s = history[k].first.cwiseProduct(free), y = history[k].second.cwiseProduct(free);
      const double sy = s.dot(y);
      if (sy <= 0.0) continue;
      a[k] = s.dot(q) / sy;
      q -= a[k] * y;
    }
    if (!history.empty()) {
      const Vector s = history.back().first.cwiseProduct(free), y = history.back().second.cwiseProduct(free);
      const double yy = y.squaredNorm();
      if (yy > 0.0 && s.dot(y) > 0.0) q *= s.dot(y) / yy;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const Vector s = history[k].first.cwiseProduct(free), y = history[k].second.cwiseProduct(free);
      const double sy = s.dot(y);
      if (sy <= 0.0) continue;
      const double b = y.dot(q) / sy;
      q += (a[k] - b) * s;
    }
    return q.cwiseProduct(free);
  }

  const DynotearsObjective& f_;
  double rho_, alpha_;
  const Deadline& deadline_;
  int max_iter_;
  Eigen::Array<bool, Eigen::Dynamic, 1> fixed_;
};


}  // namespace

NotAcyclicError::NotAcyclicError(const std::string& message, DynamicGraph best)
    : Error(ErrorKind::NotAcyclic, message), graph(std::move(best)) {}

DynamicGraph dynotears_fit_matrix(const Matrix& data, const std::vector<std::string>& variables,
                                  const DynotearsOptions& options) {
  if (options.p < 1) throw Error(ErrorKind::PreconditionViolated, "dynotears: p must be >= 1");
  if (static_cast<Eigen::Index>(variables.size()) != data.cols())
    throw Error(ErrorKind::ShapeError, "dynotears: variable names do not match columns");
  const Eigen::Index d = data.cols();

  DynamicGraph graph;
  graph.variables = variables;
  graph.lambda_s = options.lambda_s;
  graph.lambda_w = options.lambda_w;
  if (data.rows() - options.p <= options.p * d)
    graph.warnings.push_back("dynotears: fewer rows than lagged parameters (T - p <= p*d)");

  Matrix X, Xlag;
  lagged_system(options.standardize ? numerics::standardize(data) : data, options.p, X, Xlag);
  const DynotearsObjective objective(std::move(X), std::move(Xlag), options.lambda_s, options.lambda_w);

  Vector theta = Vector::Zero(objective.size());
  double rho = 1.0, alpha = 0.0, h = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < options.max_outer; ++outer) {
    Vector candidate;
    double h_new = h;
    while (rho < options.rho_max) {
      BoundedLbfgs solver(objective, rho, alpha, options.deadline, options.max_inner);
      candidate = solver.minimize(theta);
      h_new = numerics::acyclicity(objective.S(candidate)).h;
      if (h_new > 0.25 * h) {
        rho *= 10.0;
      } else {
        break;
      }
    }
    if (candidate.size() == 0) break;
    theta = std::move(candidate);
    h = h_new;
    alpha += rho * h;
    if (h <= options.h_tol || rho >= options.rho_max) break;
  }

  Matrix S = objective.S(theta);
  const Matrix W = objective.W(theta);
  const double h_raw = numerics::acyclicity(S).h;
  S = (S.array().abs() < options.w_threshold).select(0.0, S);
  S.diagonal().setZero();
  graph.S = S;
  const Matrix Wt = (W.array().abs() < options.w_threshold).select(0.0, W);
  for (int tau = 0; tau < options.p; ++tau) graph.W.push_back(Wt.middleRows(tau * d, d));
  graph.h = numerics::acyclicity(S).h;

  if (h_raw > options.h_tol && graph.h > options.h_tol)
    throw NotAcyclicError("h(S)=" + std::to_string(h_raw) + " > h_tol at rho=" + std::to_string(rho), graph);
  return graph;
}

DynamicGraph dynotears_fit(const AlignedPanel& panel, const DynotearsOptions& options) {
  std::vector<std::string> variables{panel.target_name()};
  variables.insert(variables.end(), panel.feature_names().begin(), panel.feature_names().end());
  return dynotears_fit_matrix(panel.joint(), variables, options);
}

FeatureSet dynotears_select(const DynamicGraph& graph, const std::string& target_name) {
  auto it = std::find(graph.variables.begin(), graph.variables.end(), target_name);
  if (it == graph.variables.end()) throw Error(ErrorKind::BadName, "unknown target '" + target_name + "'");
  const auto target = static_cast<Eigen::Index>(it - graph.variables.begin());
  FeatureSet out;
  out.selector_id = "dynotears";
  out.warnings = graph.warnings;
  for (Eigen::Index j = 0; j < graph.d(); ++j) {
    if (j == target) continue;
    const auto& name = graph.variables[static_cast<std::size_t>(j)];
    out.candidates.push_back(name);
    double weight = std::fabs(graph.S(j, target));
    for (const auto& W : graph.W) weight = std::max(weight, std::fabs(W(j, target)));
    out.diagnostics.push_back({name, kNaN, kNaN, weight});
    if (weight > 0.0) out.selected.push_back(name);
  }
  return out;
}

}  // namespace causalcast::selectors
