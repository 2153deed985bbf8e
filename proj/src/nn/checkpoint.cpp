// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/nn/checkpoint.hpp"

#include "specrec/errors.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace specrec::nn {

namespace {

constexpr char kMagic[12] = {'S', 'P', 'E', 'C', 'R', 'E', 'C', '.', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw specrec::IoError(what + ": " + path);
}

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_checkpoint(const std::string& path, const UNet& model, const CheckpointMeta& meta) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) fail("cannot open checkpoint for writing", tmp);
    f.write(kMagic, 12);
    write_pod(f, kVersion);
    write_pod(f, meta.schedule_hash);
    write_pod(f, meta.normalization.min_dbm);
    write_pod(f, meta.normalization.max_dbm);
    write_pod(f, static_cast<std::uint32_t>(meta.config.base_channels));
    write_pod(f, static_cast<std::uint32_t>(meta.config.time_dim));
    write_pod(f, static_cast<std::uint32_t>(meta.config.groups));
    const auto& params = model.params().items();
    write_pod(f, static_cast<std::uint64_t>(params.size()));
    for (const Param& p : params) {
      write_pod(f, static_cast<std::uint32_t>(p.name.size()));
      f.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      write_pod(f, static_cast<std::uint32_t>(p.value.c));
      write_pod(f, static_cast<std::uint32_t>(p.value.h));
      write_pod(f, static_cast<std::uint32_t>(p.value.w));
      f.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    }
    if (!f) fail("write failed for checkpoint", tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<UNet> load_checkpoint(const std::string& path, CheckpointMeta& meta_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("cannot open checkpoint", path);
  char magic[12];
  f.read(magic, 12);
  std::uint32_t version = 0;
  read_pod(f, version);
  if (!f || std::memcmp(magic, kMagic, 12) != 0) fail("bad magic in checkpoint", path);
  if (version != kVersion) fail("unsupported checkpoint version", path);

  read_pod(f, meta_out.schedule_hash);
  read_pod(f, meta_out.normalization.min_dbm);
  read_pod(f, meta_out.normalization.max_dbm);
  std::uint32_t base = 0, td = 0, groups = 0;
  read_pod(f, base);
  read_pod(f, td);
  read_pod(f, groups);
  meta_out.config.base_channels = static_cast<int>(base);
  meta_out.config.time_dim = static_cast<int>(td);
  meta_out.config.groups = static_cast<int>(groups);

  auto model = std::make_unique<UNet>(meta_out.config);
  std::uint64_t count = 0;
  read_pod(f, count);
  auto& params = model->params().items();
  if (count != params.size()) fail("checkpoint parameter count mismatch", path);
  for (Param& p : params) {
    std::uint32_t name_len = 0;
    read_pod(f, name_len);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    std::uint32_t c = 0, h = 0, w = 0;
    read_pod(f, c);
    read_pod(f, h);
    read_pod(f, w);
    if (!f || name != p.name || static_cast<int>(c) != p.value.c || static_cast<int>(h) != p.value.h ||
        static_cast<int>(w) != p.value.w)
      fail("checkpoint tensor '" + name + "' does not match model layout", path);
    f.read(reinterpret_cast<char*>(p.value.data()),
           static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!f) fail("truncated checkpoint", path);
  return model;
}

}  // namespace specrec::nn
