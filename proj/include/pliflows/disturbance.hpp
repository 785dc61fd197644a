#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pliflows/matrix.hpp"

namespace pliflows {

enum class DisturbanceKind { zero, constant, sinusoid, piecewise_step, bounded_random };

// Deterministic additive error u(t) on the flow state. Each entry is a
// direction value in [-1, 1]; the signal is amplitude * d(t) / sqrt(rows*cols),
// so ||u(t)||_F <= amplitude for all t.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::zero;
  double amplitude = 0.0;
  // sinusoid: d_j(t) = sin(frequency t + phase + 2 pi j / dim)
  double frequency = 1.0;
  double phase = 0.0;
  // piecewise_step: level index = number of switch times <= t;
  // levels.size() == switch_times.size() + 1.
  std::vector<double> switch_times;
  std::vector<double> levels;
  // bounded_random: value hashed from (seed, floor(t / bucket_width), j).
  std::uint64_t seed = 0;
  double bucket_width = 1.0;
  std::size_t rows = 1;
  std::size_t cols = 1;

  // Throws InvalidArgument on inconsistent fields.
  void validate() const;
  DisturbanceSpec with_amplitude(double delta) const;
  // Variant p of n for sweeps: shifts the sinusoid phase by 2 pi p / n and the
  // random seed by p; other kinds are unchanged.
  DisturbanceSpec with_phase(std::size_t p, std::size_t n) const;
  bool active() const noexcept { return kind != DisturbanceKind::zero && amplitude > 0.0; }

  friend bool operator==(const DisturbanceSpec&, const DisturbanceSpec&) = default;
};

Matrix disturbance_value(const DisturbanceSpec& spec, double t);
// Writes u(t) into out (size rows*cols) without allocating.
void disturbance_value_into(const DisturbanceSpec& spec, double t, std::span<double> out);

const char* to_string(DisturbanceKind kind) noexcept;
DisturbanceKind disturbance_kind_from_string(const std::string& name);

}  // namespace pliflows
