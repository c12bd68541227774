#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "astro/embedding_io.hpp"
#include "astro/fingerprint.hpp"

using namespace astro;

namespace {

// Independent writer: appends raw host bytes, valid on little-endian hosts.
template <typename T>
void raw(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

std::string hand_written(const std::vector<std::pair<std::string, std::vector<float>>>& recs, std::uint32_t dim) {
  std::string out = "ASTROEMB";
  raw<std::uint32_t>(out, 1);
  raw<std::uint32_t>(out, dim);
  raw<std::uint64_t>(out, recs.size());
  for (const auto& [id, v] : recs) {
    raw<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out += id;
    for (float x : v) raw(out, x);
  }
  return out;
}

}  // namespace

TEST(EmbeddingFile, ReadsExternallyWrittenFile768) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g;
  std::vector<std::pair<std::string, std::vector<float>>> recs;
  for (const char* id : {"snippet-0", "snippet-1", "\xc3\xa9t\xc3\xa9"}) {
    std::vector<float> v(768);
    for (auto& x : v) x = g(rng);
    recs.emplace_back(id, v);
  }
  recs[1].second[5] = -0.0f;
  recs[2].second[0] = std::numeric_limits<float>::denorm_min();
  auto bytes = hand_written(recs, 768);
  auto f = EmbeddingFile::deserialize(bytes);
  ASSERT_EQ(f.dim(), 768u);
  ASSERT_EQ(f.size(), 3u);
  for (const auto& [id, v] : recs) {
    auto row = f.at(id);
    EXPECT_EQ(std::memcmp(row.data(), v.data(), v.size() * sizeof(float)), 0) << id;
  }
  EXPECT_EQ(f.serialize(), bytes);
}

TEST(EmbeddingFile, SaveLoadByteExact) {
  EmbeddingFile f(4);
  f.add("a", std::vector<float>{1.5f, -2.0f, 0.0f, 3.25f});
  f.add("b", std::vector<double>{0.1, 0.2, 0.3, 0.4});
  auto path = std::filesystem::temp_directory_path() / "astro_emb_roundtrip.emb";
  f.save(path);
  auto back = EmbeddingFile::load(path);
  EXPECT_EQ(back, f);
  back.save(path);
  EXPECT_EQ(file_fingerprint(path), sha256_hex(f.serialize()));
  EXPECT_EQ(back.at("b")[1], 0.2f);
  std::filesystem::remove(path);
}

TEST(EmbeddingFile, HeaderLayout) {
  EmbeddingFile f(2);
  f.add("xy", std::vector<float>{1.0f, 2.0f});
  auto b = f.serialize();
  ASSERT_EQ(b.size(), 8u + 4 + 4 + 8 + 4 + 2 + 8);
  EXPECT_EQ(b.substr(0, 8), "ASTROEMB");
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[12]), 2);
  EXPECT_EQ(static_cast<unsigned char>(b[16]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[24]), 2);
  EXPECT_EQ(b.substr(28, 2), "xy");
  // 1.0f = 0x3f800000 little-endian
  EXPECT_EQ(static_cast<unsigned char>(b[33]), 0x3f);
  EXPECT_EQ(static_cast<unsigned char>(b[32]), 0x80);
}

TEST(EmbeddingFile, RejectsCorruptInput) {
  EmbeddingFile f(3);
  f.add("p", std::vector<float>{1, 2, 3});
  f.add("q", std::vector<float>{4, 5, 6});
  auto good = f.serialize();
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(EmbeddingFile::deserialize(bad_magic), FormatError);
  auto bad_version = good;
  bad_version[8] = 2;
  EXPECT_THROW(EmbeddingFile::deserialize(bad_version), FormatError);
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, good.size() - 1})
    EXPECT_THROW(EmbeddingFile::deserialize(good.substr(0, cut)), FormatError) << cut;
  EXPECT_THROW(EmbeddingFile::deserialize(good + "z"), FormatError);
  auto dup = hand_written({{"p", {1, 2, 3}}, {"p", {1, 2, 3}}}, 3);
  EXPECT_THROW(EmbeddingFile::deserialize(dup), FormatError);
  EXPECT_THROW(EmbeddingFile::load("/nonexistent/astro.emb"), IoError);
}

TEST(EmbeddingFile, Lookups) {
  EmbeddingFile f(2);
  f.add("p", std::vector<float>{1, 2});
  EXPECT_TRUE(f.contains("p"));
  EXPECT_FALSE(f.contains("q"));
  EXPECT_THROW(f.at("q"), MissingEmbedding);
  EXPECT_THROW(f.add("r", std::vector<float>{1, 2, 3}), DimMismatch);
}

TEST(Fingerprint, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
