#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdid/model.hpp"

namespace sdid::testing {

/// Categorical panel whose per-level deltas are given directly (y_pre = 0).
inline PanelDataset panel_from_deltas(
    const std::vector<std::pair<std::string, std::vector<double>>>& levels) {
  std::vector<UnitRecord> records;
  for (const auto& [label, deltas] : levels) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      records.push_back({label + std::to_string(i), label, 0.0, deltas[i]});
    }
  }
  return PanelDataset(std::move(records), CovariateKind::Categorical, "fixture");
}

/// The hand fixture: A deltas {2,2}, B deltas {1,1}, with nonzero baselines.
inline PanelDataset hand_panel() {
  return PanelDataset({{"a1", std::string("A"), 0.0, 2.0},
                       {"a2", std::string("A"), 1.0, 3.0},
                       {"b1", std::string("B"), 0.0, 1.0},
                       {"b2", std::string("B"), 2.0, 3.0}},
                      CovariateKind::Categorical, "fixture");
}

/// Random categorical panel with `levels` labels L0..L{k-1}.
inline PanelDataset random_categorical_panel(std::uint64_t seed, std::size_t n, std::size_t levels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::vector<UnitRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    // every level appears at least twice
    const std::size_t g = i < 2 * levels ? i % levels : rng() % levels;
    const double pre = noise(rng) + static_cast<double>(g);
    records.push_back({"u" + std::to_string(i), "L" + std::to_string(g), pre,
                       pre + noise(rng) + 0.5 * static_cast<double>(g)});
  }
  return PanelDataset(std::move(records), CovariateKind::Categorical, "random");
}

inline PanelDataset random_continuous_panel(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xdist(-3.0, 5.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<UnitRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xdist(rng);
    const double pre = noise(rng);
    records.push_back({"u" + std::to_string(i), x, pre, pre + 1.0 + 0.5 * x - 0.1 * x * x + noise(rng)});
  }
  return PanelDataset(std::move(records), CovariateKind::Continuous, "random");
}

}  // namespace sdid::testing
