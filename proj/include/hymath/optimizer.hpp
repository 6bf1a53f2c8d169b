#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hymath {

/// f(x), writing df/dx into the second argument.
using ObjectiveFn = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct LbfgsOptions
{
  int history = 10;
  int max_iterations = 100;
  double tolerance = 1e-7;  // stop when the relative objective gain falls below this
  double armijo = 1e-4;
  int max_backtracks = 40;
};

struct OptimizerTrace
{
  std::vector<double> objectives;  // value after each accepted step, starting point first
  int iterations = 0;
  std::string stop_reason;
};

/// Maximizes f with limited-memory BFGS and a backtracking line search that
/// only accepts steps satisfying the sufficient-increase condition, so the
/// objective never decreases.
OptimizerTrace lbfgs_maximize(const ObjectiveFn& f, std::vector<double>& x, const LbfgsOptions& options,
                              const std::function<void(int, double)>& on_iteration = {});

} // namespace hymath
