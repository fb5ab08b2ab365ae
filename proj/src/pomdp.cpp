#include "leader/pomdp.h"

#include <cmath>

namespace leader {

void PomdpSpec::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (action_count < 1) throw std::invalid_argument("action_count must be at least 1");
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

}  // namespace leader
