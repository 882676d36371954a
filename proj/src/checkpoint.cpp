#include "cdiff/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "cdiff/config.hpp"
#include "cdiff/error.hpp"

namespace cdiff {

namespace {

constexpr char kMagic[8] = {'C', 'D', 'I', 'F', 'F', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& buf, T v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& buf, const std::filesystem::path& path) : buf_(buf), path_(path) {}

  template <class T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > buf_.size() - pos_) throw IoError(path_.string() + ": truncated checkpoint");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& buf_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Model& model, const nlohmann::json& metadata, const std::filesystem::path& path) {
  const std::string desc = model.descriptor().dump();
  const std::string meta = metadata.dump();
  const auto params = model.params().values();
  std::string buf(kMagic, sizeof(kMagic));
  put(buf, kVersion);
  put(buf, static_cast<std::uint64_t>(desc.size()));
  buf += desc;
  put(buf, static_cast<std::uint64_t>(meta.size()));
  buf += meta;
  put(buf, static_cast<std::uint64_t>(params.size()));
  buf.append(reinterpret_cast<const char*>(params.data()), params.size() * sizeof(double));
  put(buf, fnv1a64(buf));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(buf, path);
  if (std::memcmp(r.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0)
    throw IoError(path.string() + " is not a checkpoint");
  if (const auto v = r.get<std::uint32_t>(); v != kVersion)
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
  Checkpoint ckpt;
  try {
    const auto dlen = r.get<std::uint64_t>();
    ckpt.descriptor = nlohmann::json::parse(std::string(r.take(dlen), dlen));
    const auto mlen = r.get<std::uint64_t>();
    ckpt.metadata = nlohmann::json::parse(std::string(r.take(mlen), mlen));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": corrupt checkpoint header (" + e.what() + ")");
  }
  const auto count = r.get<std::uint64_t>();
  if (count > buf.size() / sizeof(double)) throw IoError(path.string() + ": truncated checkpoint");
  ckpt.params.resize(count);
  std::memcpy(ckpt.params.data(), r.take(count * sizeof(double)), count * sizeof(double));
  const std::size_t body = r.pos();
  if (r.get<std::uint64_t>() != fnv1a64(std::string_view(buf.data(), body)))
    throw IoError(path.string() + ": checksum mismatch");
  if (r.pos() != buf.size()) throw IoError(path.string() + ": trailing bytes after checkpoint");
  return ckpt;
}

void load_parameters(Model& model, const Checkpoint& ckpt) {
  if (model.descriptor() != ckpt.descriptor)
    throw ConfigError("checkpoint architecture " + ckpt.descriptor.dump() + " does not match model " +
                      model.descriptor().dump());
  auto values = model.params().values();
  if (values.size() != ckpt.params.size()) throw ConfigError("checkpoint parameter count does not match the model");
  std::copy(ckpt.params.begin(), ckpt.params.end(), values.begin());
}

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt) {
  auto model = make_model(ckpt.descriptor);
  load_parameters(*model, ckpt);
  return model;
}

}  // namespace cdiff
