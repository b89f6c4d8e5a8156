#include "gpcc/nn/optim.hpp"

#include "gpcc/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gpcc::nn
{

void AdamConfig::validate() const
{
  if (!(learning_rate > 0.0)) {
    throw ConfigError("adam.learning_rate", "must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw ConfigError("adam.beta1", "must be in [0, 1)");
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam.beta2", "must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("adam.epsilon", "must be positive");
  }
}

void adam_step(std::span<Parameter * const> params, const AdamConfig & cfg)
{
  for (Parameter * p : params) {
    p->step += 1;
    const double t = static_cast<double>(p->step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    auto value = p->value.values();
    auto grad = p->grad.values();
    auto m = p->first_moment.values();
    auto v = p->second_moment.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      grad[i] = 0.0;
    }
  }
}

namespace
{

double evaluate(const LossBuilder & loss)
{
  Tape tape;
  const Var out = loss(tape);
  const Tensor & v = out.value();
  if (v.size() != 1) {
    throw ShapeError("finite_diff_check: loss must be a scalar");
  }
  if (!std::isfinite(v[0])) {
    throw NumericError("finite_diff_check: loss is not finite");
  }
  return v[0];
}

}  // namespace

GradCheckReport finite_diff_check(
  const LossBuilder & loss, std::span<Parameter * const> params, const GradCheckOptions & options)
{
  for (Parameter * p : params) {
    p->zero_grad();
  }
  {
    Tape tape;
    const Var out = loss(tape);
    if (!std::isfinite(out.value()[0])) {
      throw NumericError("finite_diff_check: loss is not finite");
    }
    tape.backward(out);
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;  // (param, index)
  std::size_t total = 0;
  for (const Parameter * p : params) {
    total += p->value.size();
  }
  if (total <= options.samples) {
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      for (std::size_t i = 0; i < params[pi]->value.size(); ++i) {
        coords.emplace_back(pi, i);
      }
    }
  } else {
    Rng rng(options.seed);
    std::set<std::size_t> picked;
    while (picked.size() < options.samples) {
      picked.insert(rng.index(total));
    }
    for (std::size_t flat : picked) {
      std::size_t pi = 0;
      while (flat >= params[pi]->value.size()) {
        flat -= params[pi]->value.size();
        ++pi;
      }
      coords.emplace_back(pi, flat);
    }
  }

  GradCheckReport report;
  for (const auto & [pi, i] : coords) {
    Parameter & p = *params[pi];
    const double original = p.value[i];
    p.value[i] = original + options.step;
    const double up = evaluate(loss);
    p.value[i] = original - options.step;
    const double down = evaluate(loss);
    p.value[i] = original;

    const double numeric = (up - down) / (2.0 * options.step);
    const double analytic = p.grad[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), options.denominator_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel >= report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = p.name;
      report.worst_index = i;
      report.worst_analytic = analytic;
      report.worst_numeric = numeric;
    }
    ++report.coordinates_checked;
  }
  for (Parameter * p : params) {
    p->zero_grad();
  }
  report.passed = report.max_relative_error <= options.tolerance;
  return report;
}

}  // namespace gpcc::nn
