#include "rio/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rio {

AnchorMap self_localize(const AnchorSurvey& survey) {
  const double d01 = survey.d01, d02 = survey.d02, d12 = survey.d12;
  if (d01 <= 0.0 || d02 <= 0.0 || d12 <= 0.0) {
    throw std::invalid_argument("self_localize: distances must be positive");
  }
  if (d01 >= d02 + d12 || d02 >= d01 + d12 || d12 >= d01 + d02) {
    throw std::invalid_argument("self_localize: triangle inequality violated");
  }

  const double x2 = (d01 * d01 + d02 * d02 - d12 * d12) / (2.0 * d01);
  const double disc = d02 * d02 - x2 * x2;
  if (disc < 1e-9 * d02 * d02) {
    throw std::invalid_argument("self_localize: anchors are collinear within tolerance");
  }

  const double h = survey.anchor_height;
  AnchorMap map;
  map.positions[0] = Vec3(0.0, 0.0, h);
  map.positions[1] = Vec3(d01, 0.0, h);
  map.positions[2] = Vec3(x2, -std::sqrt(disc), h);
  return map;
}

AnchorSurvey survey_from_network(const std::vector<SurveyRangeRecord>& records,
                                 int min_samples, double anchor_height) {
  std::vector<double> samples[3];  // (0,1), (0,2), (1,2)
  for (const auto& rec : records) {
    const int a = std::min(rec.anchor_i, rec.anchor_j);
    const int b = std::max(rec.anchor_i, rec.anchor_j);
    if (a == 0 && b == 1) samples[0].push_back(rec.distance);
    else if (a == 0 && b == 2) samples[1].push_back(rec.distance);
    else if (a == 1 && b == 2) samples[2].push_back(rec.distance);
  }

  auto median = [&](std::vector<double>& v, const char* pair) {
    if (static_cast<int>(v.size()) < std::max(min_samples, 1)) {
      throw std::invalid_argument(std::string("survey_from_network: too few samples for pair ") + pair);
    }
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };

  AnchorSurvey survey;
  survey.d01 = median(samples[0], "(0,1)");
  survey.d02 = median(samples[1], "(0,2)");
  survey.d12 = median(samples[2], "(1,2)");
  survey.anchor_height = anchor_height;
  return survey;
}

}  // namespace rio
