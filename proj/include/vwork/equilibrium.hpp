#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vwork/geometry.hpp"
#include "vwork/jets.hpp"
#include "vwork/systems.hpp"

namespace vwork {

enum class EquilibriumStatus { NotEquilibrium, EquilibriumSampled, Indeterminate };

std::string to_string(EquilibriumStatus s);

struct EquilibriumVerdict {
  EquilibriumStatus status = EquilibriumStatus::Indeterminate;
  /// Initial velocity and work jet of a trial arc classified Negative.
  std::optional<Vector> witness_direction;
  std::optional<Jet> witness_jet;
  std::size_t order_used = 0;
  std::size_t n_samples = 0;
  std::size_t n_positive = 0;
  std::size_t n_zero = 0;
};

/// Relative zero band on jet coefficients used by the verdicts.
inline constexpr double kJetZeroBand = 1e-9;

/// First-order test: theta(q0, v) over unit samples of V(q0).
EquilibriumVerdict virtual_work_check(const StaticSystem& sys, const Point& q0, std::size_t n_samples,
                                      std::uint64_t seed = 0);

struct JetCheckOptions {
  std::size_t order = 2;
  std::size_t n_samples = 128;
  std::size_t curvature_trials = 4;
  std::uint64_t seed = 0;
  /// Arcs must satisfy active inequality constraints on (0, s_check].
  double s_check = 1e-2;
};

/// Order-k test over trial arcs q0 + s v + sum s^i c_i admissible to order k.
EquilibriumVerdict jet_equilibrium_check(const StaticSystem& sys, const Point& q0, const JetCheckOptions& opt);

}  // namespace vwork
