#pragma once

#include <span>
#include <vector>

#include "leader/belief.h"
#include "leader/driving_model.h"

namespace leader {

/// Every agent's intentions equally likely.
IntentionDistribution uniform_attention(const IntentionDistribution& b);

struct TtcAttentionParams {
  double horizon = 20.0;     // T_max: time-to-collision cap in seconds
  double time_step = 0.1;    // resolution of the constant-speed projection
  double min_ttc = 0.1;      // guards 1/t_c when already in conflict
};

/// Time until the agent, moving along `path` at constant speed, first comes
/// within collision reach of the ego moving along its reference path at
/// constant speed; `params.horizon` if that never happens within the cap.
double path_time_to_collision(const EgoState& ego, const ExoState& agent, const Polyline& path,
                              const DrivingParams& driving, const TtcAttentionParams& params = {});

/// Scores 1/t_c normalised to one and then floored.
std::vector<double> attention_from_ttc(std::span<const double> ttc);

/// Per agent, attention proportional to 1/t_c of each intention.
IntentionDistribution ttc_attention(const IntentionDistribution& b, const Observation& z, const AgentContexts& agents,
                                    const DrivingParams& driving, const TtcAttentionParams& params = {});

}  // namespace leader
