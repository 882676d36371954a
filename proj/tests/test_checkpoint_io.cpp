#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cdiff/checkpoint.hpp"
#include "cdiff/error.hpp"
#include "cdiff/io.hpp"
#include "cdiff/models.hpp"
#include "cdiff/random.hpp"

using namespace cdiff;
namespace fs = std::filesystem;

namespace {

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("cdiff_test_" + name); }

std::unique_ptr<Model> small_model(int hidden) {
  NetworkOptions opt;
  opt.hidden = hidden;
  opt.layers = 2;
  return make_ebm_model(StateSpace(4, 2), ModelMode::noisy_marginal, 1.0, opt);
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  auto m = small_model(8);
  Rng rng(1);
  m->initialize(rng, true);
  auto path = temp("ckpt.bin");
  save_checkpoint(*m, {{"steps", 5}}, path);
  auto ck = read_checkpoint(path);
  CHECK(ck.metadata["steps"] == 5);
  auto back = model_from_checkpoint(ck);
  std::vector<State> xs{State{0, 1, 1, 0}};
  CHECK((back->logits(xs, 0.4) - m->logits(xs, 0.4)).cwiseAbs().maxCoeff() == 0.0);

  auto other = small_model(16);
  CHECK_THROWS_AS(load_parameters(*other, ck), ConfigError);
  fs::remove(path);
}

TEST_CASE("corrupted checkpoints are rejected") {
  auto m = small_model(8);
  auto path = temp("bad.bin");
  save_checkpoint(*m, nlohmann::json::object(), path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << b;
  };
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  write(flipped);
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  write(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  write(bytes + "x");
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  write("NOTACKPT");
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  fs::remove(path);
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
}

TEST_CASE("state strings") {
  StateSpace small(4, 3);
  CHECK(state_to_string(State{0, 2, 1, 0}, small) == "0210");
  CHECK(state_from_string("0210", small) == State{0, 2, 1, 0});
  StateSpace wide(3, 12);
  CHECK(state_to_string(State{11, 0, 7}, wide) == "11.0.7");
  CHECK(state_from_string("11.0.7", wide) == State{11, 0, 7});
  CHECK_THROWS(state_from_string("0230", small));
  CHECK_THROWS(state_from_string("021", small));
}

TEST_CASE("sample csv round trip with metadata") {
  ToyDatasetSpec spec;
  spec.bits_per_axis = 3;
  auto space = spec.space();
  std::vector<State> xs{State(6, 0), State{1, 0, 1, 1, 1, 0}};
  auto path = temp("samples.csv");
  write_samples_csv(path, xs, space, spec, {{"seed", 4}, {"dataset", "moons"}});
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("# ", 0) == 0);
  CHECK(read_samples_csv(path, space) == xs);
  fs::remove(path);
}

TEST_CASE("metrics csv") {
  std::vector<MetricRow> rows{{100, 1.5, 0.0}, {200, 1.25, 0.0}};
  auto text = metrics_csv(rows, {{"loss", "ce_simplified"}});
  CHECK(text.find("step,loss,wall_ms") != std::string::npos);
  CHECK(text.find("200,1.25") != std::string::npos);
  CHECK(text.find("# loss: ce_simplified") != std::string::npos);
}

TEST_CASE("point csv is readable as samples") {
  ToyDatasetSpec spec;
  spec.bits_per_axis = 3;
  std::vector<Point2> pts{{0.5, -1.0}, {3.9, 3.9}};
  auto path = temp("points.csv");
  write_points_csv(path, pts, spec, nlohmann::json::object());
  auto xs = read_samples_csv(path, spec.space());
  REQUIRE(xs.size() == 2);
  CHECK(xs[0] == quantize2d(pts[0], spec));
  fs::remove(path);
}
