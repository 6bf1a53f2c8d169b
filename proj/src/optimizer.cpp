#include <hymath/optimizer.hpp>

#include <cmath>
#include <algorithm>
#include <deque>
#include <stdexcept>

namespace hymath {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

struct Correction
{
  std::vector<double> s, y;
  double rho;
};

// two-loop recursion on the negated objective: returns an ascent direction
std::vector<double> direction(const std::vector<double>& grad, const std::deque<Correction>& memory)
{
  std::vector<double> q(grad.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = -grad[i];
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * dot(memory[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] -= alpha[k] * memory[k].y[i];
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q)
      v *= gamma;
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * dot(memory[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] += (alpha[k] - beta) * memory[k].s[i];
  }
  for (double& v : q)
    v = -v;
  return q;
}

} // namespace

OptimizerTrace lbfgs_maximize(const ObjectiveFn& f, std::vector<double>& x, const LbfgsOptions& options,
                              const std::function<void(int, double)>& on_iteration)
{
  OptimizerTrace trace;
  std::vector<double> grad(x.size(), 0.0);
  double value = f(x, grad);
  if (!std::isfinite(value))
    throw std::runtime_error("objective is not finite at the starting point");
  trace.objectives.push_back(value);
  if (options.max_iterations <= 0) {
    trace.stop_reason = "no iterations requested";
    return trace;
  }

  std::deque<Correction> memory;
  std::vector<double> trial(x.size()), trial_grad(x.size());
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const double gnorm = std::sqrt(dot(grad, grad));
    if (gnorm == 0.0) {
      trace.stop_reason = "zero gradient";
      break;
    }
    std::vector<double> d = direction(grad, memory);
    double slope = dot(grad, d);
    if (!(slope > 0.0)) {
      memory.clear();
      d = grad;
      slope = dot(grad, d);
    }
    double step = memory.empty() ? 1.0 / gnorm : 1.0;

    bool accepted = false;
    double trial_value = value;
    for (int b = 0; b < options.max_backtracks; ++b) {
      for (std::size_t i = 0; i < x.size(); ++i)
        trial[i] = x[i] + step * d[i];
      std::fill(trial_grad.begin(), trial_grad.end(), 0.0);
      trial_value = f(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value >= value + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      trace.stop_reason = "line search failed";
      break;
    }

    Correction c;
    c.s.resize(x.size());
    c.y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      c.s[i] = trial[i] - x[i];
      c.y[i] = grad[i] - trial_grad[i];  // gradient change of -f
    }
    const double sy = dot(c.s, c.y);
    if (sy > 1e-12) {
      c.rho = 1.0 / sy;
      memory.push_back(std::move(c));
      if (static_cast<int>(memory.size()) > options.history)
        memory.pop_front();
    }

    const double previous = value;
    x = trial;
    grad = trial_grad;
    value = trial_value;
    trace.objectives.push_back(value);
    trace.iterations = iter;
    if (on_iteration)
      on_iteration(iter, value);
    if (std::abs(value - previous) <= options.tolerance * std::max(1.0, std::abs(value))) {
      trace.stop_reason = "converged";
      break;
    }
  }
  if (trace.stop_reason.empty())
    trace.stop_reason = "iteration limit";
  return trace;
}

} // namespace hymath
