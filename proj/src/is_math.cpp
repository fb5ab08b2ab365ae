#include "leader/is_math.h"

#include <cmath>
#include <stdexcept>

#include "leader/belief.h"

namespace leader::ismath {

void DiscreteProblem::validate() const {
  if (p.empty() || p.size() != f.size()) throw std::invalid_argument("p and f must be non-empty and equal length");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("p does not sum to one");
}

double DiscreteProblem::mean() const {
  double mu = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mu += f[i] * p[i];
  return mu;
}

void check_proposal(const DiscreteProblem& problem, std::span<const double> q) {
  problem.validate();
  if (q.size() != problem.size()) throw std::invalid_argument("proposal size differs from problem size");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0)) throw std::invalid_argument("negative proposal probability");
    if (q[i] == 0.0 && problem.p[i] * problem.f[i] != 0.0) {
      throw std::invalid_argument("proposal has no support on an outcome that contributes to the mean");
    }
    sum += q[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("proposal does not sum to one");
}

double is_estimate(const DiscreteProblem& problem, std::span<const double> q, int n, ScenarioStream& stream) {
  check_proposal(problem, q);
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto x = static_cast<std::size_t>(sample_categorical(q, stream.next_uniform()));
    total += problem.f[x] * problem.p[x] / q[x];
  }
  return total / n;
}

double exact_estimator_mean(const DiscreteProblem& problem, std::span<const double> q) {
  check_proposal(problem, q);
  double mean = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] == 0.0) continue;
    mean += q[x] * (problem.f[x] * problem.p[x] / q[x]);
  }
  return mean;
}

double estimator_variance(const DiscreteProblem& problem, std::span<const double> q, int n) {
  check_proposal(problem, q);
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  const double mu = problem.mean();
  double total = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] == 0.0) continue;
    const double d = problem.f[x] * problem.p[x] - mu * q[x];
    total += d * d / q[x];
  }
  return total / n;
}

std::vector<double> optimal_q(const DiscreteProblem& problem) {
  problem.validate();
  double norm = 0.0;
  for (std::size_t x = 0; x < problem.size(); ++x) norm += std::abs(problem.f[x]) * problem.p[x];
  if (!(norm > 0.0)) throw std::domain_error("optimal proposal undefined when f p vanishes everywhere");
  std::vector<double> q(problem.size());
  for (std::size_t x = 0; x < problem.size(); ++x) q[x] = std::abs(problem.f[x]) * problem.p[x] / norm;
  return q;
}

}  // namespace leader::ismath
