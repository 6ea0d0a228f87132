#include "causalcast/synthlab.hpp"

#include "causalcast/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace causalcast::synthlab {

using selectors::DynamicGraph;

namespace {

double draw_coefficient(std::mt19937_64& rng, double low, double high) {
  std::uniform_real_distribution<double> mag(low, high);
  std::bernoulli_distribution sign(0.5);
  const double v = mag(rng);
  return sign(rng) ? v : -v;
}

class NoiseSource {
 public:
  NoiseSource(Noise kind, std::uint64_t seed) : kind_(kind), rng_(seed) {}

  // Unit variance in every family.
  double operator()() {
    switch (kind_) {
      case Noise::Gaussian: return normal_(rng_);
      case Noise::Uniform: return uniform_(rng_);
      case Noise::Laplace: return (exponential_(rng_) - exponential_(rng_)) / std::sqrt(2.0);
    }
    return 0.0;
  }

 private:
  Noise kind_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-std::sqrt(3.0), std::sqrt(3.0)};
  std::exponential_distribution<double> exponential_{1.0};
};

std::vector<std::string> variable_names(int d) {
  std::vector<std::string> names{"Y"};
  for (int i = 1; i <= d; ++i) names.push_back("X" + std::to_string(i));
  return names;
}

}  // namespace

double companion_radius(const DynamicGraph& graph) {
  const Eigen::Index D = graph.d();
  const int p = graph.p();
  const Matrix inv = (Matrix::Identity(D, D) - graph.S).inverse();
  Matrix C = Matrix::Zero(p * D, p * D);
  for (int tau = 0; tau < p; ++tau) C.block(0, tau * D, D, D) = (graph.W[static_cast<std::size_t>(tau)] * inv).transpose();
  if (p > 1) C.block(D, 0, (p - 1) * D, (p - 1) * D).setIdentity();
  return Eigen::EigenSolver<Matrix>(C, false).eigenvalues().cwiseAbs().maxCoeff();
}

AlignedPanel simulate(const DynamicGraph& graph, Eigen::Index n, Noise noise,
                      const std::vector<EnvironmentShift>& shifts, std::uint64_t seed, int burn_in) {
  const Eigen::Index D = graph.d();
  const int p = graph.p();
  if (n < 1 || burn_in < 0 || D < 2) throw Error(ErrorKind::PreconditionViolated, "simulate: bad dimensions");
  for (const auto& s : shifts)
    if (s.variable < 0 || s.variable >= D) throw Error(ErrorKind::PreconditionViolated, "simulate: shift variable out of range");

  const Matrix inv = (Matrix::Identity(D, D) - graph.S).inverse();
  const Eigen::Index total = burn_in + n;
  Matrix x = Matrix::Zero(total + p, D);
  NoiseSource draw(noise, seed);
  Eigen::RowVectorXd e(D);
  for (Eigen::Index t = 0; t < total; ++t) {
    for (Eigen::Index v = 0; v < D; ++v) e[v] = draw();
    const Eigen::Index out_row = t - burn_in;
    for (const auto& s : shifts)
      if (out_row >= s.start_row) e[s.variable] = s.scale * e[s.variable] + s.mean_shift;
    Eigen::RowVectorXd row = e;
    for (int tau = 1; tau <= p; ++tau) row += x.row(p + t - tau) * graph.W[static_cast<std::size_t>(tau - 1)];
    x.row(p + t) = row * inv;
  }
  const Matrix kept = x.bottomRows(n);

  std::vector<MonthStamp> dates;
  for (Eigen::Index t = 0; t < n; ++t) dates.push_back(MonthStamp(2000, 1).plus(static_cast<int>(t)));
  std::vector<std::string> names(graph.variables.begin() + 1, graph.variables.end());
  return AlignedPanel(std::move(dates), kept.col(0), kept.rightCols(D - 1), std::move(names), {}, false,
                      graph.variables.front());
}

SyntheticPanel generate_svar(const SvarSpec& spec) {
  if (spec.d < 1 || spec.p < 1 || spec.n < 1 || spec.edge_density < 0.0 || spec.edge_density > 1.0 ||
      !(spec.coef_low >= 0.0 && spec.coef_low <= spec.coef_high) || spec.target_parents > spec.d)
    throw Error(ErrorKind::GenerationFailed, "invalid SVAR spec");
  const int D = spec.d + 1;
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution edge(spec.edge_density);
  const bool fixed_target = spec.target_parents >= 0;

  DynamicGraph g;
  g.variables = variable_names(spec.d);
  g.S = Matrix::Zero(D, D);
  for (int tau = 0; tau < spec.p; ++tau) {
    Matrix W = Matrix::Zero(D, D);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        if (fixed_target && j == 0) continue;
        if (edge(rng)) W(i, j) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
      }
    g.W.push_back(W);
  }
  if (spec.instantaneous) {
    std::vector<int> order(static_cast<std::size_t>(D));
    for (int i = 0; i < D; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int a = 0; a < D; ++a)
      for (int b = a + 1; b < D; ++b) {
        const int from = order[static_cast<std::size_t>(a)], to = order[static_cast<std::size_t>(b)];
        if (fixed_target && to == 0) continue;
        if (edge(rng)) g.S(from, to) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
      }
  }
  if (fixed_target) {
    std::vector<int> features(static_cast<std::size_t>(spec.d));
    for (int i = 0; i < spec.d; ++i) features[static_cast<std::size_t>(i)] = i + 1;
    std::shuffle(features.begin(), features.end(), rng);
    for (int k = 0; k < spec.target_parents; ++k)
      g.W[0](features[static_cast<std::size_t>(k)], 0) = draw_coefficient(rng, spec.coef_low, spec.coef_high);
  }

  double radius = companion_radius(g);
  for (int attempt = 0; attempt < 100 && radius >= spec.max_spectral_radius; ++attempt) {
    const double factor = 0.99 * spec.max_spectral_radius / radius;
    for (auto& W : g.W) W *= factor;
    radius = companion_radius(g);
  }
  if (!(radius < spec.max_spectral_radius))
    throw Error(ErrorKind::GenerationFailed, "could not rescale to a stationary system (radius " + std::to_string(radius) + ")");

  AlignedPanel panel = simulate(g, spec.n, spec.noise, spec.shifts, rng(), spec.burn_in);
  return {std::move(panel), std::move(g)};
}

std::vector<std::string> true_parents(const DynamicGraph& truth, const std::string& target) {
  auto it = std::find(truth.variables.begin(), truth.variables.end(), target);
  if (it == truth.variables.end()) throw Error(ErrorKind::BadName, "unknown target '" + target + "'");
  const auto t = static_cast<Eigen::Index>(it - truth.variables.begin());
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < truth.d(); ++j) {
    if (j == t) continue;
    bool edge = truth.S(j, t) != 0.0;
    for (const auto& W : truth.W) edge = edge || W(j, t) != 0.0;
    if (edge) out.push_back(truth.variables[static_cast<std::size_t>(j)]);
  }
  return out;
}

RecoveryScore score_sets(const std::vector<std::string>& selected, const std::vector<std::string>& truth) {
  const std::set<std::string> sel(selected.begin(), selected.end()), tru(truth.begin(), truth.end());
  std::size_t hits = 0;
  for (const auto& s : sel) hits += tru.count(s);
  RecoveryScore r;
  r.precision = sel.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(sel.size());
  r.recall = tru.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(tru.size());
  r.f1 = (r.recall == 0.0 || r.precision + r.recall == 0.0) ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

RecoveryScore score_recovery(const selectors::FeatureSet& selected, const DynamicGraph& truth, const std::string& target) {
  return score_sets(selected.selected, true_parents(truth, target));
}

RecoveryScore score_edges(const DynamicGraph& fitted, const DynamicGraph& truth) {
  if (fitted.d() != truth.d() || fitted.p() != truth.p())
    throw Error(ErrorKind::ShapeError, "score_edges: graph shapes differ");
  auto edges = [](const DynamicGraph& g) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < g.d(); ++i)
      for (Eigen::Index j = 0; j < g.d(); ++j) {
        if (i != j && g.S(i, j) != 0.0) out.push_back("0:" + std::to_string(i) + ">" + std::to_string(j));
        for (int tau = 0; tau < g.p(); ++tau)
          if (g.W[static_cast<std::size_t>(tau)](i, j) != 0.0)
            out.push_back(std::to_string(tau + 1) + ":" + std::to_string(i) + ">" + std::to_string(j));
      }
    return out;
  };
  return score_sets(edges(fitted), edges(truth));
}

SvarSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "svar spec must be a table");
  static const std::set<std::string> known{"d", "p", "n", "edge_density", "coef_range", "noise", "instantaneous",
                                           "shifts", "seed", "target_parents", "burn_in", "max_spectral_radius"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw Error(ErrorKind::ConfigError, "svar spec: unknown key '" + it.key() + "'");
  SvarSpec s;
  try {
    s.d = j.value("d", s.d);
    s.p = j.value("p", s.p);
    s.n = j.value("n", s.n);
    s.edge_density = j.value("edge_density", s.edge_density);
    if (j.contains("coef_range")) {
      const auto r = j.at("coef_range").get<std::vector<double>>();
      if (r.size() != 2) throw Error(ErrorKind::ConfigError, "svar spec: coef_range needs two values");
      s.coef_low = r[0];
      s.coef_high = r[1];
    }
    const auto noise = j.value("noise", std::string("gaussian"));
    if (noise == "gaussian") s.noise = Noise::Gaussian;
    else if (noise == "uniform") s.noise = Noise::Uniform;
    else if (noise == "laplace") s.noise = Noise::Laplace;
    else throw Error(ErrorKind::ConfigError, "svar spec: noise must be gaussian, uniform or laplace");
    s.instantaneous = j.value("instantaneous", s.instantaneous);
    s.seed = j.value("seed", s.seed);
    s.target_parents = j.value("target_parents", s.target_parents);
    s.burn_in = j.value("burn_in", s.burn_in);
    s.max_spectral_radius = j.value("max_spectral_radius", s.max_spectral_radius);
    if (j.contains("shifts"))
      for (const auto& sh : j.at("shifts")) {
        EnvironmentShift e;
        e.variable = sh.value("variable", e.variable);
        e.mean_shift = sh.value("mean_shift", e.mean_shift);
        e.scale = sh.value("scale", e.scale);
        e.start_row = sh.value("start_row", e.start_row);
        s.shifts.push_back(e);
      }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("svar spec: ") + e.what());
  }
  return s;
}

}  // namespace causalcast::synthlab
