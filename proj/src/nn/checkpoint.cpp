#include "hainav/nn/checkpoint.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace hainav::nn {

namespace {

constexpr uint32_t kMagic = 0x484E434Bu;  // "HNCK"
constexpr uint32_t kVersion = 1;

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void write_u32(FILE* f, uint32_t v) { std::fwrite(&v, sizeof v, 1, f); }
void write_str(FILE* f, const std::string& s) {
  write_u32(f, static_cast<uint32_t>(s.size()));
  std::fwrite(s.data(), 1, s.size(), f);
}
uint32_t read_u32(FILE* f) {
  uint32_t v = 0;
  if (std::fread(&v, sizeof v, 1, f) != 1) throw std::runtime_error("checkpoint: truncated");
  return v;
}
std::string read_str(FILE* f) {
  const uint32_t n = read_u32(f);
  std::string s(n, '\0');
  if (n && std::fread(s.data(), 1, n, f) != n) throw std::runtime_error("checkpoint: truncated");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& model_kind,
                     const ParamStore& params, const std::string& meta_json) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("checkpoint: cannot write " + path);
  write_u32(f.get(), kMagic);
  write_u32(f.get(), kVersion);
  write_str(f.get(), model_kind);
  write_str(f.get(), meta_json);
  const auto named = params.named();
  write_u32(f.get(), static_cast<uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    write_str(f.get(), name);
    write_u32(f.get(), static_cast<uint32_t>(t->shape.size()));
    for (int d : t->shape) write_u32(f.get(), static_cast<uint32_t>(d));
    std::fwrite(t->val.data(), sizeof(double), t->val.size(), f.get());
  }
}

CheckpointInfo load_checkpoint(const std::string& path, ParamStore& params) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("checkpoint: cannot read " + path);
  if (read_u32(f.get()) != kMagic) throw std::runtime_error("checkpoint: bad magic");
  if (read_u32(f.get()) != kVersion) throw std::runtime_error("checkpoint: bad version");
  CheckpointInfo info;
  info.model_kind = read_str(f.get());
  info.meta_json = read_str(f.get());
  const uint32_t count = read_u32(f.get());
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = read_str(f.get());
    const uint32_t ndim = read_u32(f.get());
    size_t n = 1;
    for (uint32_t d = 0; d < ndim; ++d) n *= read_u32(f.get());
    Tensor t = params.get(name);
    if (t->val.size() != n) throw std::runtime_error("checkpoint: size mismatch for " + name);
    if (std::fread(t->val.data(), sizeof(double), n, f.get()) != n)
      throw std::runtime_error("checkpoint: truncated tensor " + name);
  }
  return info;
}

CheckpointInfo peek_checkpoint(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("checkpoint: cannot read " + path);
  if (read_u32(f.get()) != kMagic) throw std::runtime_error("checkpoint: bad magic");
  if (read_u32(f.get()) != kVersion) throw std::runtime_error("checkpoint: bad version");
  CheckpointInfo info;
  info.model_kind = read_str(f.get());
  info.meta_json = read_str(f.get());
  return info;
}

}  // namespace hainav::nn
