#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cdiff/state_space.hpp"
#include "cdiff/toy_data.hpp"
#include "cdiff/training.hpp"

namespace cdiff {

// One digit per dimension when vocab <= 10, otherwise values joined by '.'.
std::string state_to_string(const State& x, const StateSpace& space);
State state_from_string(std::string_view s, const StateSpace& space);

// CSV files start with "# key: value" lines carrying metadata (one per
// top-level key of the JSON object).
std::string csv_metadata(const nlohmann::json& metadata);

// Column "state", plus dequantized "x,y" when a toy spec is given.
void write_samples_csv(const std::filesystem::path& path, const std::vector<State>& xs, const StateSpace& space,
                       const std::optional<ToyDatasetSpec>& toy, const nlohmann::json& metadata);
// Reads the column named "state"; other columns are ignored.
std::vector<State> read_samples_csv(const std::filesystem::path& path, const StateSpace& space);

// Real points with their quantized states: "x,y,state".
void write_points_csv(const std::filesystem::path& path, const std::vector<Point2>& pts, const ToyDatasetSpec& spec,
                      const nlohmann::json& metadata);

// "step,loss,wall_ms".
std::string metrics_csv(const std::vector<MetricRow>& rows, const nlohmann::json& metadata);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace cdiff
