#include "causalcast/synthlab.hpp"

#include "helpers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace causalcast;
using namespace causalcast::synthlab;

TEST_CASE("generation is deterministic in the seed") {
  SvarSpec spec;
  spec.d = 6;
  spec.n = 120;
  spec.instantaneous = true;
  spec.seed = 42;
  const auto a = generate_svar(spec), b = generate_svar(spec);
  CHECK(a.panel.features() == b.panel.features());
  CHECK(a.panel.target() == b.panel.target());
  CHECK(a.truth.S == b.truth.S);
  spec.seed = 43;
  CHECK(generate_svar(spec).panel.target() != a.panel.target());
  CHECK(a.panel.rows() == 120);
  CHECK(a.panel.num_features() == 6);
  CHECK(a.panel.dates().front() == MonthStamp(2000, 1));
  CHECK(a.panel.target_name() == "Y");
}

TEST_CASE("generated graphs are stationary, acyclic and respect the coefficient range") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    SvarSpec spec;
    spec.d = 8;
    spec.p = 1 + static_cast<int>(s % 3);
    spec.n = 50;
    spec.edge_density = 0.3;
    spec.instantaneous = s % 2 == 0;
    spec.seed = s;
    const auto g = generate_svar(spec);
    CHECK(companion_radius(g.truth) < 0.95);
    CHECK(numerics::acyclicity(g.truth.S).h == 0.0);
    for (Eigen::Index i = 0; i < g.truth.S.rows(); ++i)
      for (Eigen::Index j = 0; j < g.truth.S.cols(); ++j)
        if (g.truth.S(i, j) != 0.0) CHECK((std::abs(g.truth.S(i, j)) >= 0.3 && std::abs(g.truth.S(i, j)) <= 0.8));
    for (const auto& W : g.truth.W) CHECK(W.cwiseAbs().maxCoeff() <= 0.8);
  }
}

TEST_CASE("fixed target parents and zero density") {
  SvarSpec spec;
  spec.d = 10;
  spec.target_parents = 3;
  spec.n = 60;
  for (std::uint64_t s = 0; s < 10; ++s) {
    spec.seed = s;
    const auto g = generate_svar(spec);
    CHECK(true_parents(g.truth, "Y").size() == 3);
  }
  spec.target_parents = -1;
  spec.edge_density = 0.0;
  const auto null = generate_svar(spec);
  CHECK(null.truth.S.cwiseAbs().maxCoeff() == 0.0);
  CHECK(null.truth.W[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(true_parents(null.truth, "Y").empty());
}

TEST_CASE("sample autocovariances match the Lyapunov solution") {
  // Chain X1 -> X2 -> Y at lag 1 with own-lag persistence.
  selectors::DynamicGraph g;
  g.variables = {"Y", "X1", "X2"};
  g.S = Matrix::Zero(3, 3);
  Matrix W = Matrix::Zero(3, 3);
  W(1, 1) = 0.5;
  W(1, 2) = 0.6;
  W(2, 2) = 0.3;
  W(2, 0) = 0.7;
  W(0, 0) = 0.2;
  g.W = {W};
  const Eigen::Index n = 10000;
  const AlignedPanel panel = simulate(g, n, Noise::Gaussian, {}, 2024);
  // Column form x_t = A x_{t-1} + e with A = W^T; vec(Sigma) = (I - A (x) A)^{-1} vec(I).
  const Matrix A = W.transpose();
  Matrix K(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K.block(3 * i, 3 * j, 3, 3) = A(i, j) * A;
  const Vector vecI = Eigen::Map<const Vector>(Matrix::Identity(3, 3).eval().data(), 9);
  const Vector vs = (Matrix::Identity(9, 9) - K).partialPivLu().solve(vecI);
  const Matrix Sigma = Eigen::Map<const Matrix>(vs.data(), 3, 3);
  const Matrix Gamma1 = A * Sigma;  // E[x_t x_{t-1}^T]

  const Matrix X = panel.joint();
  const Matrix C = X.rowwise() - X.colwise().mean();
  const Matrix S0 = C.transpose() * C / static_cast<double>(n);
  const Matrix S1 = C.bottomRows(n - 1).transpose() * C.topRows(n - 1) / static_cast<double>(n - 1);
  const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
  const double inflate = (1 + rho * rho) / (1 - rho * rho);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt((Sigma(i, i) * Sigma(j, j) + Sigma(i, j) * Sigma(i, j)) * inflate / n);
      CHECK(std::abs(S0(i, j) - Sigma(i, j)) <= 5 * se);
      CHECK(std::abs(S1(i, j) - Gamma1(i, j)) <= 5 * se);
    }
}

TEST_CASE("noise families have unit variance") {
  selectors::DynamicGraph g;
  g.variables = {"Y", "X1"};
  g.S = Matrix::Zero(2, 2);
  g.W = {Matrix::Zero(2, 2)};
  for (Noise noise : {Noise::Gaussian, Noise::Uniform, Noise::Laplace}) {
    const AlignedPanel p = simulate(g, 20000, noise, {}, 5);
    const Vector y = p.target();
    const double var = (y.array() - y.mean()).square().sum() / (y.size() - 1.0);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("environment shifts touch only the shifted variable's equation") {
  selectors::DynamicGraph g;
  g.variables = {"Y", "X1", "X2"};
  g.S = Matrix::Zero(3, 3);
  g.W = {Matrix::Zero(3, 3)};
  g.W[0](1, 0) = 0.7;
  g.W[0](0, 2) = 0.5;  // Y drives X2, so X2 is a child
  const AlignedPanel base = simulate(g, 300, Noise::Gaussian, {}, 9);
  const AlignedPanel shifted = simulate(g, 300, Noise::Gaussian, {{2, 4.0, 2.0, 150}}, 9);
  CHECK(shifted.target() == base.target());
  CHECK(shifted.features().col(0) == base.features().col(0));
  CHECK(shifted.features().col(1).head(150) == base.features().col(1).head(150));
  CHECK(shifted.features().col(1).tail(150).mean() > base.features().col(1).tail(150).mean() + 3.0);
}

TEST_CASE("recovery scores") {
  const auto exact = score_sets({"a", "b"}, {"a", "b"});
  CHECK(exact.precision == 1.0);
  CHECK(exact.recall == 1.0);
  CHECK(exact.f1 == 1.0);
  const auto none = score_sets({}, {"a"});
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  const auto wrong = score_sets({"b"}, {"a"});
  CHECK(wrong.f1 == 0.0);

  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f"};
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::string> sel, truth;
    for (const auto& x : pool) {
      if (coin(rng)) sel.push_back(x);
      if (coin(rng)) truth.push_back(x);
    }
    std::set<std::string> S(sel.begin(), sel.end()), T(truth.begin(), truth.end());
    double tp = 0;
    for (const auto& x : S) tp += T.count(x);
    const double prec = S.empty() ? 1.0 : tp / static_cast<double>(S.size());
    const double rec = T.empty() ? 1.0 : tp / static_cast<double>(T.size());
    const double f1 = rec == 0.0 ? 0.0 : 2 * prec * rec / (prec + rec);
    const auto got = score_sets(sel, truth);
    CHECK(got.precision == doctest::Approx(prec));
    CHECK(got.recall == doctest::Approx(rec));
    CHECK(got.f1 == doctest::Approx(f1));
  }

  selectors::DynamicGraph g;
  g.variables = {"Y", "X1", "X2"};
  g.S = Matrix::Zero(3, 3);
  g.S(2, 0) = 0.4;
  g.W = {Matrix::Zero(3, 3)};
  g.W[0](1, 0) = 0.5;
  CHECK(true_parents(g, "Y") == std::vector<std::string>{"X1", "X2"});
  selectors::FeatureSet fs;
  fs.selected = {"X1"};
  const auto r = score_recovery(fs, g, "Y");
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 0.5);
  CHECK(score_edges(g, g).f1 == 1.0);
}

TEST_CASE("spec parsing and failure modes") {
  const SvarSpec s = spec_from_json({{"d", 4}, {"n", 300}, {"coef_range", {0.2, 0.5}}, {"noise", "laplace"}, {"seed", 3}});
  CHECK(s.d == 4);
  CHECK(s.n == 300);
  CHECK(s.coef_low == 0.2);
  CHECK(s.coef_high == 0.5);
  CHECK(s.noise == Noise::Laplace);
  CHECK_KIND(spec_from_json({{"dims", 4}}), ErrorKind::ConfigError);
  CHECK_KIND(spec_from_json({{"noise", "cauchy"}}), ErrorKind::ConfigError);

  SvarSpec bad;
  bad.coef_low = 0.9;
  bad.coef_high = 0.1;
  CHECK_KIND(generate_svar(bad), ErrorKind::GenerationFailed);
  SvarSpec frozen;
  frozen.max_spectral_radius = 0.0;
  frozen.edge_density = 0.5;
  CHECK_KIND(generate_svar(frozen), ErrorKind::GenerationFailed);
}
