#include "cdiff/toy_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cdiff/error.hpp"
#include "cdiff/random.hpp"

namespace cdiff {

namespace {

constexpr double kPi = std::numbers::pi;

struct NamedDensity {
  ToyDensity density;
  const char* name;
};

constexpr std::array<NamedDensity, 7> kDensities{{
    {ToyDensity::two_spirals, "2spirals"},
    {ToyDensity::eight_gaussians, "8gaussians"},
    {ToyDensity::circles, "circles"},
    {ToyDensity::moons, "moons"},
    {ToyDensity::pinwheel, "pinwheel"},
    {ToyDensity::swissroll, "swissroll"},
    {ToyDensity::checkerboard, "checkerboard"},
}};

Point2 draw_point(ToyDensity density, double lim, Rng& rng) {
  switch (density) {
    case ToyDensity::two_spirals: {
      // Archimedean arms r = a*theta over 1.5 turns, second arm rotated by pi.
      const double theta = std::sqrt(rng.uniform()) * 3.0 * kPi;
      const double r = theta / (3.0 * kPi) * 0.9 * lim + 0.1 * lim * rng.normal();
      const double phi = theta + (rng.uniform() < 0.5 ? 0.0 : kPi);
      return {r * std::cos(phi), r * std::sin(phi)};
    }
    case ToyDensity::eight_gaussians: {
      const int k = rng.uniform_int(0, 7);
      const double a = k * kPi / 4.0;
      const double sigma = lim / 20.0;
      return {0.5 * lim * std::cos(a) + sigma * rng.normal(), 0.5 * lim * std::sin(a) + sigma * rng.normal()};
    }
    case ToyDensity::circles: {
      const double r = rng.uniform() < 0.5 ? lim / 2.0 : lim / 4.0;
      const double a = rng.uniform(0.0, 2.0 * kPi);
      const double sigma = lim / 40.0;
      return {r * std::cos(a) + sigma * rng.normal(), r * std::sin(a) + sigma * rng.normal()};
    }
    case ToyDensity::moons: {
      const double r = lim / 2.0;
      const double a = rng.uniform(0.0, kPi);
      const double sigma = lim / 40.0;
      const double dx = sigma * rng.normal();
      const double dy = sigma * rng.normal();
      if (rng.uniform() < 0.5) return {r * std::cos(a) - r / 2.0 + dx, r * std::sin(a) - lim / 16.0 + dy};
      return {r / 2.0 - r * std::cos(a) + dx, lim / 16.0 - r * std::sin(a) + dy};
    }
    case ToyDensity::pinwheel: {
      constexpr int kBlades = 5;
      constexpr double kRadialStd = 0.3;
      constexpr double kTangentialStd = 0.1;
      constexpr double kRate = 0.25;
      const int k = rng.uniform_int(0, kBlades - 1);
      const double f0 = kRadialStd * rng.normal() + 1.0;
      const double f1 = kTangentialStd * rng.normal();
      const double a = 2.0 * kPi * k / kBlades + kRate * std::exp(f0);
      const double scale = lim / 2.0;
      return {scale * (f0 * std::cos(a) - f1 * std::sin(a)), scale * (f0 * std::sin(a) + f1 * std::cos(a))};
    }
    case ToyDensity::swissroll: {
      const double theta = 1.5 * kPi * (1.0 + 2.0 * rng.uniform());
      const double r = theta / (4.5 * kPi) * 0.9 * lim;
      const double sigma = lim / 40.0;
      return {r * std::cos(theta) + sigma * rng.normal(), r * std::sin(theta) + sigma * rng.normal()};
    }
    case ToyDensity::checkerboard: {
      // 8 populated cells of the 4x4 partition: (i + j) even.
      const int cell = rng.uniform_int(0, 7);
      const int j = cell / 2;
      const int i = 2 * (cell % 2) + (j % 2);
      const double w = lim / 2.0;
      return {-lim + (i + rng.uniform()) * w, -lim + (j + rng.uniform()) * w};
    }
  }
  throw ConfigError("unknown toy density");
}

}  // namespace

ToyDensity parse_toy_density(std::string_view name) {
  for (const auto& d : kDensities)
    if (name == d.name) return d.density;
  throw ConfigError("unknown dataset '" + std::string(name) +
                    "' (expected 2spirals, 8gaussians, circles, moons, pinwheel, swissroll, checkerboard)");
}

std::string_view toy_density_name(ToyDensity density) {
  for (const auto& d : kDensities)
    if (d.density == density) return d.name;
  return "unknown";
}

const std::vector<std::string>& toy_density_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& d : kDensities) v.emplace_back(d.name);
    return v;
  }();
  return names;
}

void ToyDatasetSpec::validate() const {
  if (bits_per_axis < 2 || bits_per_axis > 16)
    throw ConfigError("bits_per_axis must be in [2, 16], got " + std::to_string(bits_per_axis));
  if (!(lim > 0.0)) throw ConfigError("bounding box half-width must be positive");
}

double ToyDatasetSpec::cell_width() const { return 2.0 * lim / static_cast<double>(std::uint64_t{1} << bits_per_axis); }

std::vector<Point2> sample_toy2d(const ToyDatasetSpec& spec, std::size_t count, std::uint64_t seed) {
  spec.validate();
  std::vector<Point2> out(count);
  const auto chunks = static_cast<std::int64_t>((count + kToyChunk - 1) / kToyChunk);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < chunks; ++k) {
    Rng rng(mix64(seed + static_cast<std::uint64_t>(k)));
    const std::size_t begin = static_cast<std::size_t>(k) * kToyChunk;
    const std::size_t end = std::min(count, begin + kToyChunk);
    for (std::size_t i = begin; i < end; ++i) {
      Point2 p = draw_point(spec.density, spec.lim, rng);
      p[0] = std::clamp(p[0], -spec.lim, spec.lim);
      p[1] = std::clamp(p[1], -spec.lim, spec.lim);
      out[i] = p;
    }
  }
  return out;
}

std::uint64_t quantize_axis(double v, const ToyDatasetSpec& spec) {
  if (!(v >= -spec.lim && v <= spec.lim))
    throw DomainError("point coordinate " + std::to_string(v) + " outside the bounding box");
  const std::uint64_t cells = std::uint64_t{1} << spec.bits_per_axis;
  const auto i = static_cast<std::uint64_t>(std::floor((v + spec.lim) / spec.cell_width()));
  return std::min(i, cells - 1);
}

double dequantize_axis(std::uint64_t cell, const ToyDatasetSpec& spec) {
  return -spec.lim + (static_cast<double>(cell) + 0.5) * spec.cell_width();
}

State quantize2d(const Point2& p, const ToyDatasetSpec& spec) {
  spec.validate();
  const auto gx = gray_encode(quantize_axis(p[0], spec), spec.bits_per_axis);
  const auto gy = gray_encode(quantize_axis(p[1], spec), spec.bits_per_axis);
  State s;
  s.reserve(gx.size() + gy.size());
  s.insert(s.end(), gx.begin(), gx.end());
  s.insert(s.end(), gy.begin(), gy.end());
  return s;
}

Point2 dequantize2d(const State& s, const ToyDatasetSpec& spec) {
  spec.validate();
  const auto b = static_cast<std::size_t>(spec.bits_per_axis);
  if (s.size() != 2 * b)
    throw DomainError("dequantize2d: state has " + std::to_string(s.size()) + " bits, expected " +
                      std::to_string(2 * b));
  const std::span<const int> bits(s);
  return {dequantize_axis(gray_decode(bits.subspan(0, b)), spec), dequantize_axis(gray_decode(bits.subspan(b, b)), spec)};
}

bool checkerboard_black(const Point2& p, double lim) {
  const double w = lim / 2.0;
  const int i = std::clamp(static_cast<int>(std::floor((p[0] + lim) / w)), 0, 3);
  const int j = std::clamp(static_cast<int>(std::floor((p[1] + lim) / w)), 0, 3);
  return (i + j) % 2 == 0;
}

}  // namespace cdiff
