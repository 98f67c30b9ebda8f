#include "lgr/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "config_json.hpp"
#include "lgr/errors.hpp"

namespace lgr {

namespace {

constexpr char kMagic[8] = {'L', 'G', 'R', 'C', 'K', 'P', 'T', '\n'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

void write_tensor(std::ostream& out, const double* data, std::uint32_t count) {
  write_u32(out, count);
  out.write(reinterpret_cast<const char*>(data), sizeof(double) * count);
}

void read_tensor(std::istream& in, double* data, std::uint32_t expected) {
  const std::uint32_t count = read_u32(in);
  if (count != expected) throw IoError("checkpoint tensor size mismatch");
  in.read(reinterpret_cast<char*>(data), sizeof(double) * count);
}

template <typename Fn>
void visit_tensors(DenseStack& stack, Fn&& fn) {
  for (DenseLayer& layer : stack) {
    fn(layer.weight.data(), static_cast<std::uint32_t>(layer.weight.size()));
    fn(layer.bias.data(), static_cast<std::uint32_t>(layer.bias.size()));
    if (layer.bn) {
      fn(layer.bn->gamma.data(), static_cast<std::uint32_t>(layer.bn->gamma.size()));
      fn(layer.bn->beta.data(), static_cast<std::uint32_t>(layer.bn->beta.size()));
      fn(layer.bn->running_mean.data(),
         static_cast<std::uint32_t>(layer.bn->running_mean.size()));
      fn(layer.bn->running_var.data(),
         static_cast<std::uint32_t>(layer.bn->running_var.size()));
    }
  }
}

template <typename Fn>
void visit_all(Model& model, Fn&& fn) {
  visit_tensors(model.local_mlp, fn);
  visit_tensors(model.global_mlp, fn);
  visit_tensors(model.fusion_head, fn);
  visit_tensors(model.cat_conv, fn);
  visit_tensors(model.classifier, fn);
}

}  // namespace

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for write: " + path);

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);

  const std::string config = config_to_json(model.config).dump();
  write_u32(out, static_cast<std::uint32_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));

  Model& mutable_model = const_cast<Model&>(model);  // read-only traversal
  visit_all(mutable_model, [&out](double* data, std::uint32_t count) {
    write_tensor(out, data, count);
  });
  if (!out) throw IoError("write failed: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }
  if (read_u32(in) != kVersion) throw IoError("unsupported checkpoint version");

  const std::uint32_t config_len = read_u32(in);
  std::string config_str(config_len, '\0');
  in.read(config_str.data(), config_len);

  Model model = make_model(config_from_json(nlohmann::json::parse(config_str)));
  visit_all(model, [&in](double* data, std::uint32_t count) {
    read_tensor(in, data, count);
  });
  if (!in) throw IoError("truncated checkpoint: " + path);
  return model;
}

}  // namespace lgr
