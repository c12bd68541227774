#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "astro/error.hpp"

namespace astro {

// ASTROEMB interchange file: little-endian
//   "ASTROEMB" | version u32 (=1) | dim u32 | count u64
//   count x ( id_len u32 | id bytes (UTF-8) | dim x f32 )
inline constexpr std::string_view kEmbMagic = "ASTROEMB";
inline constexpr std::uint32_t kEmbVersion = 1;

class EmbeddingFile {
 public:
  EmbeddingFile() = default;
  explicit EmbeddingFile(std::uint32_t dim) : dim_(dim) {}

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  void add(std::string id, std::span<const float> vec) {
    if (vec.size() != dim_)
      throw DimMismatch("record '" + id + "' has " + std::to_string(vec.size()) + " components, file dim is " +
                        std::to_string(dim_));
    if (!index_.emplace(id, ids_.size()).second) throw FormatError("embedding", 0, "duplicate id '" + id + "'");
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vec.begin(), vec.end());
  }

  void add(std::string id, std::span<const double> vec) {
    std::vector<float> f(vec.begin(), vec.end());
    add(std::move(id), std::span<const float>(f));
  }

  bool contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  std::span<const float> at(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw MissingEmbedding("no embedding for id '" + std::string(id) + "'");
    return row(it->second);
  }

  bool operator==(const EmbeddingFile& o) const { return dim_ == o.dim_ && ids_ == o.ids_ && data_ == o.data_; }

  std::string serialize() const {
    std::string out(kEmbMagic);
    put_u32(out, kEmbVersion);
    put_u32(out, dim_);
    put_u64(out, ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      put_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
      out += ids_[i];
      for (float v : row(i)) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
  }

  static EmbeddingFile deserialize(std::string_view bytes, const std::string& name = "embedding") {
    std::size_t off = 0;
    auto need = [&](std::size_t n) {
      if (bytes.size() - off < n) throw FormatError(name, 0, "truncated at byte " + std::to_string(off));
    };
    need(kEmbMagic.size());
    if (bytes.substr(0, kEmbMagic.size()) != kEmbMagic) throw FormatError(name, 0, "bad magic, not an ASTROEMB file");
    off += kEmbMagic.size();
    need(16);
    auto version = get_u32(bytes, off);
    if (version != kEmbVersion) throw FormatError(name, 0, "unsupported version " + std::to_string(version));
    EmbeddingFile f(get_u32(bytes, off + 4));
    const std::uint64_t count = get_u64(bytes, off + 8);
    off += 16;
    std::vector<float> vec(f.dim_);
    for (std::uint64_t r = 0; r < count; ++r) {
      need(4);
      const std::uint32_t len = get_u32(bytes, off);
      off += 4;
      need(len);
      std::string id(bytes.substr(off, len));
      off += len;
      need(static_cast<std::size_t>(f.dim_) * 4);
      for (std::uint32_t d = 0; d < f.dim_; ++d, off += 4) vec[d] = std::bit_cast<float>(get_u32(bytes, off));
      f.add(std::move(id), std::span<const float>(vec));
    }
    if (off != bytes.size()) throw FormatError(name, 0, "trailing bytes after " + std::to_string(count) + " records");
    return f;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
  }

  static EmbeddingFile load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embedding file " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes, path.string());
  }

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;

  static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static std::uint32_t get_u32(std::string_view b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
    return v;
  }
  static std::uint64_t get_u64(std::string_view b, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
    return v;
  }
};

}  // namespace astro
