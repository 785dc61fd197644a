#include "pliflows/disturbance.hpp"

#include <cmath>
#include <numbers>

#include "pliflows/error.hpp"

namespace pliflows {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1) from a counter key.
double hashed_unit(std::uint64_t seed, std::int64_t bucket, std::size_t entry) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(bucket));
  h = splitmix64(h ^ static_cast<std::uint64_t>(entry));
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

void DisturbanceSpec::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw Error(Errc::invalid_argument, "disturbance amplitude must be nonnegative");
  }
  if (rows == 0 || cols == 0) throw Error(Errc::invalid_argument, "disturbance shape is empty");
  switch (kind) {
    case DisturbanceKind::sinusoid:
      if (!std::isfinite(frequency) || !std::isfinite(phase)) {
        throw Error(Errc::invalid_argument, "sinusoid frequency/phase must be finite");
      }
      break;
    case DisturbanceKind::piecewise_step:
      if (levels.size() != switch_times.size() + 1) {
        throw Error(Errc::invalid_argument, "piecewise_step needs one more level than switches");
      }
      for (std::size_t i = 0; i < switch_times.size(); ++i) {
        if (!(switch_times[i] >= 0.0) || (i > 0 && !(switch_times[i] > switch_times[i - 1]))) {
          throw Error(Errc::invalid_argument, "switch times must be nonnegative and increasing");
        }
      }
      for (double level : levels) {
        if (!(std::fabs(level) <= 1.0)) {
          throw Error(Errc::invalid_argument, "step levels must lie in [-1, 1]");
        }
      }
      break;
    case DisturbanceKind::bounded_random:
      if (!(bucket_width > 0.0)) throw Error(Errc::invalid_argument, "bucket_width must be > 0");
      break;
    case DisturbanceKind::zero:
    case DisturbanceKind::constant:
      break;
  }
}

DisturbanceSpec DisturbanceSpec::with_amplitude(double delta) const {
  DisturbanceSpec out = *this;
  out.amplitude = delta;
  return out;
}

DisturbanceSpec DisturbanceSpec::with_phase(std::size_t p, std::size_t n) const {
  DisturbanceSpec out = *this;
  if (n == 0) return out;
  out.phase += 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(n);
  out.seed += p;
  return out;
}

void disturbance_value_into(const DisturbanceSpec& spec, double t, std::span<double> out) {
  const std::size_t dim = spec.rows * spec.cols;
  if (out.size() != dim) throw Error(Errc::dimension_mismatch, "disturbance output size");
  const double scale = spec.amplitude / std::sqrt(static_cast<double>(dim));
  switch (spec.kind) {
    case DisturbanceKind::zero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case DisturbanceKind::constant:
      std::fill(out.begin(), out.end(), scale);
      return;
    case DisturbanceKind::sinusoid:
      for (std::size_t j = 0; j < dim; ++j) {
        const double shift = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(dim);
        out[j] = scale * std::sin(spec.frequency * t + spec.phase + shift);
      }
      return;
    case DisturbanceKind::piecewise_step: {
      std::size_t idx = 0;
      while (idx < spec.switch_times.size() && t >= spec.switch_times[idx]) ++idx;
      std::fill(out.begin(), out.end(), scale * spec.levels[idx]);
      return;
    }
    case DisturbanceKind::bounded_random: {
      const auto bucket = static_cast<std::int64_t>(std::floor(t / spec.bucket_width));
      for (std::size_t j = 0; j < dim; ++j) out[j] = scale * hashed_unit(spec.seed, bucket, j);
      return;
    }
  }
}

Matrix disturbance_value(const DisturbanceSpec& spec, double t) {
  Matrix u(spec.rows, spec.cols);
  disturbance_value_into(spec, t, u.data());
  return u;
}

const char* to_string(DisturbanceKind kind) noexcept {
  switch (kind) {
    case DisturbanceKind::zero: return "zero";
    case DisturbanceKind::constant: return "constant";
    case DisturbanceKind::sinusoid: return "sinusoid";
    case DisturbanceKind::piecewise_step: return "piecewise_step";
    case DisturbanceKind::bounded_random: return "bounded_random";
  }
  return "zero";
}

DisturbanceKind disturbance_kind_from_string(const std::string& name) {
  for (auto kind : {DisturbanceKind::zero, DisturbanceKind::constant, DisturbanceKind::sinusoid,
                    DisturbanceKind::piecewise_step, DisturbanceKind::bounded_random}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(Errc::invalid_argument, "unknown disturbance kind '" + name + "'");
}

}  // namespace pliflows
