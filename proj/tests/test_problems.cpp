#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include "novograd/harness/grad_check.hpp"
#include "novograd/problems/dataset.hpp"
#include "novograd/problems/finite_diff.hpp"
#include "novograd/problems/logreg.hpp"
#include "novograd/problems/mlp.hpp"
#include "novograd/problems/quadratic.hpp"
#include "novograd/problems/rosenbrock.hpp"

using namespace novograd;

namespace {

std::vector<double> grad_of(const ModelParams<double>& p, std::size_t l = 0) {
  return {p[l].grad().begin(), p[l].grad().end()};
}

class ConstantProblem final : public Problem {
 public:
  std::string name() const override { return "constant"; }
  ModelParams<double> initial_params() const override {
    ModelParams<double> p;
    p.add("w", {1, 2, 3});
    return p;
  }
  ModelParams<double> random_params(Rng&) const override { return initial_params(); }
  double eval(const ModelParams<double>&, std::span<const std::size_t>) const override { return 4.25; }
  double eval_grad(ModelParams<double>& p, std::span<const std::size_t>) const override {
    zero_grads(p);
    return 4.25;
  }
  double gradcheck_tolerance() const override { return 0; }
};

class SumProblem final : public Problem {
 public:
  SumProblem(std::shared_ptr<const Problem> a, std::shared_ptr<const Problem> b) : a_(a), b_(b) {}
  std::string name() const override { return "sum"; }
  ModelParams<double> initial_params() const override { return a_->initial_params(); }
  ModelParams<double> random_params(Rng& rng) const override { return a_->random_params(rng); }
  double eval(const ModelParams<double>& p, std::span<const std::size_t> batch) const override {
    return a_->eval(p, batch) + b_->eval(p, batch);
  }
  double eval_grad(ModelParams<double>&, std::span<const std::size_t>) const override { throw Error("unused"); }
  double gradcheck_tolerance() const override { return 0; }

 private:
  std::shared_ptr<const Problem> a_, b_;
};

Dataset blobs(std::uint64_t seed, std::size_t classes, std::size_t size = 60) {
  return generate_dataset({.seed = seed, .size = size, .dim = 3, .task = DatasetTask::multiclass_blobs,
                           .num_classes = classes, .separation = 3.0});
}

}  // namespace

// ---- quadratic ----------------------------------------------------------------

TEST(Quadratic, Example) {
  const auto q = QuadraticProblem::diagonal({2, 4}, {0, 0}, {1, 2});
  auto p = q.initial_params();
  EXPECT_EQ(q.eval_grad(p, {}), 9.0);
  EXPECT_EQ(grad_of(p), (std::vector<double>{2, 8}));
}

TEST(Quadratic, StationaryAtMinimizer) {
  const auto q = QuadraticProblem::random_spd(6, 50.0, 3);
  ModelParams<double> p;
  p.add("w", q.minimizer());
  q.eval_grad(p, {});
  for (double g : p[0].grad()) EXPECT_NEAR(g, 0.0, 1e-12);
  EXPECT_NEAR(*q.optimal_loss(), q.eval(p, {}), 1e-15);
}

TEST(Quadratic, RandomSpdMatchesFiniteDifferences) {
  const auto q = QuadraticProblem::random_spd(8, 10.0, 1);
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    auto p = q.random_params(rng);
    q.eval_grad(p, {});
    const auto fd = finite_diff_grad(q, p, {});
    EXPECT_LE(relative_error(p[0].grad(), fd[0]), 1e-8);
  }
}

TEST(Quadratic, Rejections) {
  EXPECT_THROW(QuadraticProblem({1, 2, 3, 4}, {0, 0}, {}), Error);             // not symmetric
  EXPECT_THROW(QuadraticProblem::diagonal({1, -1}, {}, {}), Error);            // not positive definite
  EXPECT_THROW(QuadraticProblem::diagonal({1, 1}, {0, 0}, {1, 2, 3}), Error);  // init size
  const auto q = QuadraticProblem::diagonal({1, 1}, {}, {});
  ModelParams<double> wrong;
  wrong.add("w", {1, 2, 3});
  EXPECT_THROW(q.eval(wrong, {}), Error);
}

// ---- rosenbrock ---------------------------------------------------------------

TEST(Rosenbrock, Examples) {
  const RosenbrockProblem r({1, 1});
  auto p = r.initial_params();
  EXPECT_EQ(r.eval_grad(p, {}), 0.0);
  EXPECT_EQ(grad_of(p), (std::vector<double>{0, 0}));

  const RosenbrockProblem o({0, 0});
  auto q = o.initial_params();
  o.eval_grad(q, {});
  EXPECT_EQ(grad_of(q), (std::vector<double>{-2, 0}));
}

TEST(Rosenbrock, FiniteDifferences) {
  const RosenbrockProblem r;
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    auto p = r.random_params(rng);
    r.eval_grad(p, {});
    EXPECT_LE(relative_error(p[0].grad(), finite_diff_grad(r, p, {})[0]), 1e-6);
  }
}

// ---- logistic regression ------------------------------------------------------

TEST(LogReg, UniformPredictorLoss) {
  const LogisticRegressionProblem lr(generate_dataset({.seed = 1, .size = 100, .dim = 3}));
  auto p = lr.initial_params();
  const std::vector<std::size_t> all = [] {
    std::vector<std::size_t> v(100);
    std::iota(v.begin(), v.end(), 0);
    return v;
  }();
  EXPECT_NEAR(lr.eval_grad(p, all), std::log(2.0), 1e-15);
  EXPECT_NEAR(p.at("b").grad()[0], 0.0, 1e-15);  // balanced labels
}

TEST(LogReg, FiniteDifferences) {
  const LogisticRegressionProblem lr(generate_dataset({.seed = 2, .size = 50, .dim = 4, .separation = 2}));
  const auto report = grad_check(lr, 9, 30);
  EXPECT_TRUE(report.passed()) << report.worst();
  EXPECT_EQ(report.layer_ids, (std::vector<std::string>{"w", "b"}));
}

TEST(LogReg, BatchChecks) {
  const LogisticRegressionProblem lr(generate_dataset({.seed = 1, .size = 10}));
  auto p = lr.initial_params();
  EXPECT_THROW(lr.eval(p, std::vector<std::size_t>{}), Error);
  EXPECT_THROW(lr.eval(p, std::vector<std::size_t>{10}), Error);
  EXPECT_THROW(LogisticRegressionProblem(blobs(1, 3)), Error);
}

TEST(LogReg, StableForLargeLogits) {
  const LogisticRegressionProblem lr(generate_dataset({.seed = 1, .size = 10, .dim = 2}));
  auto p = lr.initial_params();
  p.at("w").weights()[0] = 1e6;
  const double loss = lr.eval_grad(p, std::vector<std::size_t>{0, 1, 2, 3});
  EXPECT_TRUE(std::isfinite(loss));
  for (const auto& layer : p)
    for (double g : layer.grad()) EXPECT_TRUE(std::isfinite(g));
}

// ---- MLP ----------------------------------------------------------------------

TEST(Mlp, ZeroOutputLayerGivesUniformLoss) {
  for (std::size_t c : {2u, 3u, 5u}) {
    const MlpProblem mlp(blobs(1, c), 8, 3);
    auto p = mlp.initial_params();
    for (auto& x : p.at("W2").weights()) x = 0;
    for (auto& x : p.at("b2").weights()) x = 0;
    EXPECT_NEAR(mlp.eval(p, std::vector<std::size_t>{0, 1, 2, 7}), std::log(static_cast<double>(c)), 1e-14);
  }
}

TEST(Mlp, DuplicateExampleIsMean) {
  const MlpProblem mlp(blobs(2, 3), 8, 1);
  auto p = mlp.initial_params();
  const double one = mlp.eval_grad(p, std::vector<std::size_t>{5});
  const auto g1 = grad_of(p, 0);
  const double two = mlp.eval_grad(p, std::vector<std::size_t>{5, 5});
  EXPECT_NEAR(one, two, 1e-15);
  const auto g2 = grad_of(p, 0);
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1[i], g2[i], 1e-15);
}

TEST(Mlp, FiniteDifferences) {
  const MlpProblem mlp(blobs(3, 4), 6, 2);
  const auto report = grad_check(mlp, 5, 30);
  EXPECT_TRUE(report.passed()) << report.worst();
  EXPECT_EQ(report.layer_ids, (std::vector<std::string>{"W1", "b1", "W2", "b2"}));
}

TEST(Mlp, InitializationIsSeeded) {
  const MlpProblem a(blobs(1, 3), 8, 42), b(blobs(1, 3), 8, 42), c(blobs(1, 3), 8, 43);
  EXPECT_EQ(a.initial_params(), b.initial_params());
  EXPECT_FALSE(a.initial_params() == c.initial_params());
}

TEST(Mlp, ProbabilitiesSumToOne) {
  const MlpProblem mlp(blobs(1, 4), 8, 1);
  const auto p = mlp.initial_params();
  const auto probs = mlp.predict_proba(p, mlp.data().row(0));
  EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-15);
}

// ---- finite differences -------------------------------------------------------

TEST(FiniteDiff, ConstantFunctionAndRestore) {
  const ConstantProblem c;
  auto p = c.initial_params();
  const auto before = p;
  const auto g = finite_diff_grad(c, p, {});
  for (double x : g[0]) EXPECT_NEAR(x, 0.0, 1e-10);
  EXPECT_EQ(p, before);
}

TEST(FiniteDiff, QuadraticExact) {
  const auto q = QuadraticProblem::diagonal({2, 4}, {1, -1}, {0.3, -0.7});
  auto p = q.initial_params();
  q.eval_grad(p, {});
  EXPECT_LE(relative_error(p[0].grad(), finite_diff_grad(q, p, {})[0]), 1e-8);
}

TEST(FiniteDiff, Linearity) {
  auto a = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal({2, 4}, {1, 0}, {0.5, 1}));
  auto b = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal({1, 3}, {0, 2}, {0.5, 1}));
  const SumProblem sum(a, b);
  auto p = a->initial_params();
  const auto ga = finite_diff_grad(*a, p, {})[0];
  const auto gb = finite_diff_grad(*b, p, {})[0];
  const auto gs = finite_diff_grad(sum, p, {})[0];
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(gs[i], ga[i] + gb[i], 1e-8);
}

TEST(FiniteDiff, RejectsBadStep) {
  const ConstantProblem c;
  auto p = c.initial_params();
  EXPECT_THROW(finite_diff_grad(c, p, {}, 0.0), Error);
}

TEST(RelativeError, Definition) {
  EXPECT_EQ(relative_error(std::vector<double>{0, 0}, std::vector<double>{0, 0}), 0.0);
  EXPECT_NEAR(relative_error(std::vector<double>{3, 4}, std::vector<double>{3, 4.5}), 0.5 / std::sqrt(29.25), 1e-15);
}

// ---- scaled gradients ---------------------------------------------------------

TEST(ScaledGradient, ScalesGradientsOnly) {
  auto q = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal({2, 4}, {0, 0}, {1, 2}));
  const ScaledGradientProblem s(q, 0x1p-10);
  auto p = s.initial_params();
  EXPECT_EQ(s.eval_grad(p, {}), 9.0);
  EXPECT_EQ(grad_of(p), (std::vector<double>{2 * 0x1p-10, 8 * 0x1p-10}));
  EXPECT_THROW(ScaledGradientProblem(q, 0.0), Error);
}

// ---- datasets -----------------------------------------------------------------

TEST(Dataset, DeterministicBytes) {
  for (auto task : {DatasetTask::two_gaussians, DatasetTask::two_moons, DatasetTask::multiclass_blobs}) {
    const DatasetSpec spec{.seed = 17, .size = 100, .dim = 3, .task = task, .num_classes = 3};
    std::ostringstream a, b;
    write_csv(generate_dataset(spec), a);
    write_csv(generate_dataset(spec), b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(generate_dataset(spec), generate_dataset(spec));
  }
  EXPECT_FALSE(generate_dataset({.seed = 1}) == generate_dataset({.seed = 2}));
}

TEST(Dataset, Balanced) {
  const auto ds = generate_dataset({.seed = 3, .size = 100});
  EXPECT_EQ(std::count(ds.labels.begin(), ds.labels.end(), 0), 50);
  EXPECT_EQ(std::count(ds.labels.begin(), ds.labels.end(), 1), 50);
  const auto b = generate_dataset({.seed = 3, .size = 100, .task = DatasetTask::multiclass_blobs, .num_classes = 3});
  for (int c = 0; c < 3; ++c) {
    const auto n = std::count(b.labels.begin(), b.labels.end(), c);
    EXPECT_GE(n, 33);
    EXPECT_LE(n, 34);
  }
}

TEST(Dataset, CsvLayout) {
  const auto ds = generate_dataset({.seed = 1, .size = 3, .dim = 2});
  std::ostringstream out;
  write_csv(ds, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x0,x1,label");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Dataset, Split) {
  const auto ds = generate_dataset({.seed = 1, .size = 10});
  const auto [a, b] = split_dataset(ds, 7);
  EXPECT_EQ(a.size(), 7u);
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.row(0)[0], ds.row(7)[0]);
  EXPECT_THROW(split_dataset(ds, 11), Error);
}

TEST(Dataset, Rejections) {
  EXPECT_THROW(generate_dataset({.size = 0}), Error);
  EXPECT_THROW(generate_dataset({.dim = 1, .task = DatasetTask::two_moons}), Error);
  EXPECT_THROW(generate_dataset({.task = DatasetTask::multiclass_blobs, .num_classes = 1}), Error);
}
