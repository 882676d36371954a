#include "cdiff/io.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "cdiff/error.hpp"

namespace cdiff {

std::string state_to_string(const State& x, const StateSpace& space) {
  space.validate(x);
  std::string s;
  if (space.vocab() <= 10) {
    s.reserve(x.size());
    for (int v : x) s.push_back(static_cast<char>('0' + v));
    return s;
  }
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (d > 0) s.push_back('.');
    s += std::to_string(x[d]);
  }
  return s;
}

State state_from_string(std::string_view s, const StateSpace& space) {
  State x;
  const auto bad = [&] { return DomainError("malformed state '" + std::string(s) + "'"); };
  if (space.vocab() <= 10) {
    for (char c : s) {
      if (c < '0' || c > '9') throw bad();
      x.push_back(c - '0');
    }
  } else {
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto dot = std::min(s.find('.', pos), s.size());
      const auto tok = s.substr(pos, dot - pos);
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string_view::npos) throw bad();
      x.push_back(std::stoi(std::string(tok)));
      pos = dot + 1;
    }
  }
  if (!space.contains(x)) throw bad();
  return x;
}

std::string csv_metadata(const nlohmann::json& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata.items()) out += "# " + k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<State>& xs, const StateSpace& space,
                       const std::optional<ToyDatasetSpec>& toy, const nlohmann::json& metadata) {
  std::ostringstream os;
  os.precision(17);
  os << csv_metadata(metadata) << (toy ? "state,x,y\n" : "state\n");
  for (const auto& x : xs) {
    os << state_to_string(x, space);
    if (toy) {
      const Point2 p = dequantize2d(x, *toy);
      os << ',' << p[0] << ',' << p[1];
    }
    os << '\n';
  }
  write_text(path, os.str());
}

std::vector<State> read_samples_csv(const std::filesystem::path& path, const StateSpace& space) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read samples file " + path.string());
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1)
      cells.push_back(line.substr(start, comma - start));
    cells.push_back(line.substr(start));
    return cells;
  };
  std::vector<State> xs;
  std::string line;
  std::optional<std::size_t> column;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (!column) {
      const auto it = std::find(cells.begin(), cells.end(), "state");
      if (it == cells.end()) throw IoError(path.string() + ": header has no 'state' column");
      column = static_cast<std::size_t>(it - cells.begin());
      continue;
    }
    if (*column >= cells.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": missing state column");
    try {
      xs.push_back(state_from_string(cells[*column], space));
    } catch (const DomainError& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!column) throw IoError(path.string() + ": missing header");
  return xs;
}

void write_points_csv(const std::filesystem::path& path, const std::vector<Point2>& pts, const ToyDatasetSpec& spec,
                      const nlohmann::json& metadata) {
  std::ostringstream os;
  os.precision(17);
  os << csv_metadata(metadata) << "x,y,state\n";
  const StateSpace space = spec.space();
  for (const auto& p : pts) os << p[0] << ',' << p[1] << ',' << state_to_string(quantize2d(p, spec), space) << '\n';
  write_text(path, os.str());
}

std::string metrics_csv(const std::vector<MetricRow>& rows, const nlohmann::json& metadata) {
  std::ostringstream os;
  os.precision(17);
  os << csv_metadata(metadata) << "step,loss,wall_ms\n";
  for (const auto& r : rows) os << r.step << ',' << r.loss << ',' << r.wall_ms << '\n';
  return os.str();
}

}  // namespace cdiff
