#pragma once

#include <span>
#include <vector>

#include "leader/stream.h"

namespace leader::ismath {

/// A finite random variable x ~ p with a value f(x) per outcome.
struct DiscreteProblem {
  std::vector<double> p;
  std::vector<double> f;

  std::size_t size() const { return p.size(); }
  /// Throws std::invalid_argument when p is not a distribution or sizes differ.
  void validate() const;
  /// Exact mean of f under p.
  double mean() const;
};

/// Throws std::invalid_argument unless q is a distribution over the same
/// outcomes with q > 0 wherever p * f != 0.
void check_proposal(const DiscreteProblem& problem, std::span<const double> q);

/// Mean of f(x) p(x) / q(x) over `n` draws x ~ q.
double is_estimate(const DiscreteProblem& problem, std::span<const double> q, int n, ScenarioStream& stream);

/// Exact expectation of the n-sample estimator, by enumeration over outcomes.
double exact_estimator_mean(const DiscreteProblem& problem, std::span<const double> q);

/// Exact variance of the n-sample estimator: (1/n) sum (f p - mu q)^2 / q.
double estimator_variance(const DiscreteProblem& problem, std::span<const double> q, int n);

/// Zero-variance proposal for single-signed f: |f| p normalised by sum |f| p.
/// Throws std::domain_error when f p vanishes everywhere.
std::vector<double> optimal_q(const DiscreteProblem& problem);

}  // namespace leader::ismath
