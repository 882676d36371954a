#include "cdiff/random.hpp"

#include <cmath>

#include "cdiff/error.hpp"

namespace cdiff {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t id : ids) s = mix64(s ^ mix64(id + 0x632be59bd9b4e019ULL));
  return s;
}

Rng Rng::split(std::initializer_list<std::uint64_t> ids) const {
  return Rng(derive_seed(seed_base_, ids));
}

double Rng::uniform_open() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return u;
}

long Rng::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean)) throw DomainError("poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  return std::poisson_distribution<long>(mean)(engine_);
}

int Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw NumericError("categorical draw from all-zero weights");
  double u = uniform() * total;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    if (u < weights[i]) return last_positive;
    u -= weights[i];
  }
  return last_positive;
}

}  // namespace cdiff
