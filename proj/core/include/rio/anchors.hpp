#pragma once

#include <map>
#include <vector>

#include "rio/types.hpp"

namespace rio {

/// Inter-anchor distances of a three-anchor deployment, all anchors on a
/// plane at anchor_height.
struct AnchorSurvey {
  double d01 = 0.0;
  double d02 = 0.0;
  double d12 = 0.0;
  double anchor_height = 1.0;
};

struct AnchorMap {
  std::map<int, Vec3> positions;
};

/// Closed-form three-anchor frame: anchor 0 at the origin, +x through
/// anchor 1, anchor 2 on the y < 0 half plane, z up. Throws
/// std::invalid_argument on degenerate (collinear or inconsistent)
/// distances.
AnchorMap self_localize(const AnchorSurvey& survey);

struct SurveyRangeRecord {
  int anchor_i = 0;
  int anchor_j = 0;
  double distance = 0.0;
  double stamp = 0.0;
};

/// Aggregates repeated inter-anchor ranges into an AnchorSurvey using the
/// per-pair median. Requires at least min_samples records for each of the
/// pairs (0,1), (0,2), (1,2); throws std::invalid_argument otherwise.
AnchorSurvey survey_from_network(const std::vector<SurveyRangeRecord>& records,
                                 int min_samples = 1, double anchor_height = 1.0);

}  // namespace rio
