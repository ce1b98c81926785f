#pragma once

#include "novograd/error.hpp"
#include "novograd/param.hpp"
#include "novograd/random.hpp"
#include "novograd/schedule.hpp"
#include "novograd/optim/adam.hpp"
#include "novograd/optim/novograd.hpp"
#include "novograd/optim/optimizer.hpp"
#include "novograd/optim/sgd.hpp"
#include "novograd/optim/sngd.hpp"
#include "novograd/problems/dataset.hpp"
#include "novograd/problems/finite_diff.hpp"
#include "novograd/problems/logreg.hpp"
#include "novograd/problems/mlp.hpp"
#include "novograd/problems/problem.hpp"
#include "novograd/problems/quadratic.hpp"
#include "novograd/problems/rosenbrock.hpp"
#include "novograd/harness/compare.hpp"
#include "novograd/harness/grad_check.hpp"
#include "novograd/harness/run_config.hpp"
#include "novograd/harness/train.hpp"
#include "novograd/harness/trajectory_io.hpp"
