#include "freerider/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freerider {

void validate(const HorizonModel& model) {
  if (const auto* f = std::get_if<FixedHorizon>(&model)) {
    if (f->length < 1) throw std::invalid_argument("fixed horizon length must be >= 1");
    return;
  }
  const auto& g = std::get<GeometricHorizon>(model);
  if (!(g.stop_prob > 0.0 && g.stop_prob <= 1.0)) {
    throw std::invalid_argument("geometric stop probability must be in (0, 1]");
  }
  if (g.cap < 1) throw std::invalid_argument("geometric horizon cap must be >= 1");
}

int sample_horizon(const HorizonModel& model, Rng& rng) {
  validate(model);
  if (const auto* f = std::get_if<FixedHorizon>(&model)) return f->length;

  const auto& g = std::get<GeometricHorizon>(model);
  if (g.stop_prob >= 1.0) return 1;
  // Inverse CDF: P(L > k) = (1-p)^k, so L = 1 + floor(log(1-u)/log(1-p)).
  const double u = rng.uniform01();
  const double len = 1.0 + std::floor(std::log1p(-u) / std::log1p(-g.stop_prob));
  if (!(len < static_cast<double>(g.cap))) return g.cap;
  return std::max(1, static_cast<int>(len));
}

}  // namespace freerider
