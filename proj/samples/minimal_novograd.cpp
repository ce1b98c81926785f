// Minimizes Rosenbrock with NovoGrad and a cosine schedule, driving the
// optimizer by hand instead of through the harness.

#include <cstdio>

#include "novograd/novograd.hpp"

int main() {
  using namespace novograd;
  RosenbrockProblem problem;
  auto params = problem.initial_params();

  Optimizer<double> opt(NovoGradConfig{}, params);
  const ScheduleSpec schedule{.base_lr = 1e-3, .total_steps = 10000, .family = ScheduleFamily::cosine};

  for (std::size_t t = 0; t < schedule.total_steps; ++t) {
    const double loss = problem.eval_grad(params, {});
    if (t % 2000 == 0) std::printf("step %5zu  loss %.3e\n", t, loss);
    opt.step(params, lr_at(schedule, t));
  }
  const auto w = params[0].weights();
  std::printf("final (%.6f, %.6f)  loss %.3e\n", w[0], w[1], problem.eval(params, {}));
}
