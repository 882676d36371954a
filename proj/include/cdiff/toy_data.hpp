#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cdiff/state_space.hpp"

namespace cdiff {

using Point2 = std::array<double, 2>;

enum class ToyDensity { two_spirals, eight_gaussians, circles, moons, pinwheel, swissroll, checkerboard };

ToyDensity parse_toy_density(std::string_view name);
std::string_view toy_density_name(ToyDensity d);
const std::vector<std::string>& toy_density_names();

struct ToyDatasetSpec {
  ToyDensity density = ToyDensity::two_spirals;
  int bits_per_axis = 16;
  // Half-width of the square bounding box [-lim, lim]^2.
  double lim = 4.0;

  void validate() const;
  // Binary space of 2 * bits_per_axis dimensions.
  StateSpace space() const { return StateSpace(2 * bits_per_axis, 2); }
  double cell_width() const;
};

// Deterministic in (spec, count, seed). Points are clamped to the bounding box.
// Generation runs in chunks of kToyChunk points; chunk k uses stream seed + k.
inline constexpr std::size_t kToyChunk = 1024;
std::vector<Point2> sample_toy2d(const ToyDatasetSpec& spec, std::size_t count, std::uint64_t seed);

// Axis value -> integer grid cell in [0, 2^bits).
std::uint64_t quantize_axis(double v, const ToyDatasetSpec& spec);
double dequantize_axis(std::uint64_t cell, const ToyDatasetSpec& spec);

// x-axis Gray bits then y-axis Gray bits, MSB first.
State quantize2d(const Point2& p, const ToyDatasetSpec& spec);
// Cell centre of the decoded integer pair.
Point2 dequantize2d(const State& s, const ToyDatasetSpec& spec);

// Colour of the checkerboard cell that contains p (true = populated cell).
bool checkerboard_black(const Point2& p, double lim);

}  // namespace cdiff
