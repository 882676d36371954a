#include "cdiff/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "cdiff/error.hpp"

namespace cdiff {

namespace {

constexpr char kTabularMagic[8] = {'C', 'D', 'I', 'F', 'F', 'T', 'A', 'B'};
constexpr std::uint32_t kTabularVersion = 1;

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated tabular file " + path.string());
  return v;
}

}  // namespace

TabularDistribution::TabularDistribution(StateSpace space, std::vector<double> probs)
    : space_(std::move(space)), probs_(std::move(probs)) {
  space_.require_enumerable();
  if (probs_.size() != space_.state_count())
    throw DomainError("tabular distribution has " + std::to_string(probs_.size()) + " entries, space has " +
                      std::to_string(space_.state_count()));
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("tabular distribution has a negative or non-finite entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("tabular distribution sums to " + std::to_string(total));
  cdf_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) cdf_[i] = (acc += probs_[i]);
}

TabularDistribution TabularDistribution::uniform(const StateSpace& space) {
  space.require_enumerable();
  const auto n = space.state_count();
  return TabularDistribution(space, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

TabularDistribution TabularDistribution::point_mass(const StateSpace& space, const State& x) {
  space.require_enumerable();
  space.validate(x);
  std::vector<double> p(space.state_count(), 0.0);
  p[space.index(x)] = 1.0;
  return TabularDistribution(space, std::move(p));
}

TabularDistribution TabularDistribution::from_weights(const StateSpace& space, std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("weights sum to zero");
  for (double& w : weights) w /= total;
  return TabularDistribution(space, std::move(weights));
}

TabularDistribution TabularDistribution::random(const StateSpace& space, Rng& rng, double alpha) {
  space.require_enumerable();
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> w(space.state_count());
  for (double& v : w) v = std::max(gamma(rng.engine()), 1e-300);
  return from_weights(space, std::move(w));
}

TabularDistribution TabularDistribution::product(const StateSpace& space,
                                                 const std::vector<std::vector<double>>& marginals) {
  space.require_enumerable();
  if (static_cast<int>(marginals.size()) != space.dims()) throw DomainError("product needs one marginal per dimension");
  std::vector<double> p(space.state_count());
  for (std::uint64_t i = 0; i < p.size(); ++i) {
    const State x = space.state_at(i);
    double v = 1.0;
    for (int d = 0; d < space.dims(); ++d) v *= marginals[d].at(static_cast<std::size_t>(x[d]));
    p[i] = v;
  }
  return from_weights(space, std::move(p));
}

State TabularDistribution::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  auto idx = static_cast<std::size_t>(it - cdf_.begin());
  if (idx >= cdf_.size()) idx = cdf_.size() - 1;
  // Skip zero-probability entries that share a CDF value.
  while (probs_[idx] <= 0.0 && idx + 1 < probs_.size()) ++idx;
  return space_.state_at(idx);
}

double tv_distance(const TabularDistribution& p, const TabularDistribution& q) {
  if (!(p.space() == q.space())) throw DomainError("tv_distance: distributions live on different spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

void save_tabular(const TabularDistribution& dist, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kTabularMagic, sizeof(kTabularMagic));
  write_pod(out, kTabularVersion);
  write_pod(out, static_cast<std::uint32_t>(dist.space().dims()));
  write_pod(out, static_cast<std::uint32_t>(dist.space().vocab()));
  const std::uint8_t flags[4] = {static_cast<std::uint8_t>(dist.space().ordinal() ? 1 : 0), 0, 0, 0};
  out.write(reinterpret_cast<const char*>(flags), sizeof(flags));
  write_pod(out, static_cast<std::uint64_t>(dist.size()));
  out.write(reinterpret_cast<const char*>(dist.probs().data()), static_cast<std::streamsize>(dist.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

TabularDistribution load_tabular(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kTabularMagic, sizeof(magic)) != 0)
    throw IoError(path.string() + " is not a tabular distribution file");
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kTabularVersion) throw IoError("unsupported tabular file version " + std::to_string(version));
  const auto dims = read_pod<std::uint32_t>(in, path);
  const auto vocab = read_pod<std::uint32_t>(in, path);
  std::uint8_t flags[4];
  in.read(reinterpret_cast<char*>(flags), sizeof(flags));
  const auto count = read_pod<std::uint64_t>(in, path);
  StateSpace space(static_cast<int>(dims), static_cast<int>(vocab), flags[0] != 0);
  if (count != space.state_count()) throw IoError("tabular file " + path.string() + " has an inconsistent count");
  space.require_enumerable();
  std::vector<double> probs(count);
  in.read(reinterpret_cast<char*>(probs.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw IoError("truncated tabular file " + path.string());
  return TabularDistribution(space, std::move(probs));
}

nlohmann::json tabular_to_json(const TabularDistribution& dist) {
  nlohmann::json j;
  j["format"] = "cdiff-tabular";
  j["version"] = kTabularVersion;
  j["dims"] = dist.space().dims();
  j["vocab"] = dist.space().vocab();
  j["ordinal"] = dist.space().ordinal();
  j["probs"] = std::vector<double>(dist.probs().begin(), dist.probs().end());
  return j;
}

TabularDistribution tabular_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "cdiff-tabular") throw IoError("JSON is not a cdiff tabular distribution");
  StateSpace space(j.at("dims").get<int>(), j.at("vocab").get<int>(), j.value("ordinal", false));
  return TabularDistribution(space, j.at("probs").get<std::vector<double>>());
}

}  // namespace cdiff
