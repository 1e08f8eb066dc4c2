// Copyright 2026 The Taches Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "taches/audio_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace taches::audio {
namespace {

namespace fs = std::filesystem;

class AudioIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("taches_audio_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

void le16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void le32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}
void tag(std::vector<unsigned char>& b, const char* t) { b.insert(b.end(), t, t + 4); }

// Hand-assembled canonical file, optionally with an odd-sized chunk before
// the data chunk.
std::vector<unsigned char> make_wav(std::uint16_t format, std::uint16_t channels,
                                    std::uint16_t bits, const std::vector<unsigned char>& data,
                                    bool extra_chunk = false) {
  std::vector<unsigned char> body;
  tag(body, "WAVE");
  tag(body, "fmt ");
  le32(body, 16);
  le16(body, format);
  le16(body, channels);
  le32(body, 8000);
  le32(body, 8000u * channels * bits / 8);
  le16(body, static_cast<std::uint16_t>(channels * bits / 8));
  le16(body, bits);
  if (extra_chunk) {
    tag(body, "LIST");
    le32(body, 3);
    body.insert(body.end(), {'a', 'b', 'c', 0});  // pad byte
  }
  tag(body, "data");
  le32(body, static_cast<std::uint32_t>(data.size()));
  body.insert(body.end(), data.begin(), data.end());
  std::vector<unsigned char> file;
  tag(file, "RIFF");
  le32(file, static_cast<std::uint32_t>(body.size()));
  file.insert(file.end(), body.begin(), body.end());
  return file;
}

void dump(const std::string& p, const std::vector<unsigned char>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

TEST_F(AudioIoTest, Pcm16FullScaleMapping) {
  std::vector<unsigned char> data;
  le16(data, 0x8000);  // -32768
  le16(data, 16384);
  le16(data, 0);
  dump(path("a.wav"), make_wav(1, 1, 16, data));
  const WavData w = read_wav(path("a.wav"));
  EXPECT_EQ(w.spec.encoding, Encoding::kPcm16);
  EXPECT_EQ(w.spec.sample_rate, 8000u);
  ASSERT_EQ(w.channels.size(), 1u);
  EXPECT_EQ(w.channels[0].vector(), (std::vector<double>{-1.0, 0.5, 0.0}));
}

TEST_F(AudioIoTest, DeinterleavesAndSkipsUnknownChunks) {
  std::vector<unsigned char> data;
  for (std::uint16_t v : {1, 2, 3, 4, 5, 6}) le16(data, static_cast<std::uint16_t>(v * 1024));
  dump(path("st.wav"), make_wav(1, 2, 16, data, true));
  const WavData w = read_wav(path("st.wav"));
  ASSERT_EQ(w.channels.size(), 2u);
  EXPECT_EQ(w.channels[0].vector(), (std::vector<double>{1.0 / 32, 3.0 / 32, 5.0 / 32}));
  EXPECT_EQ(w.channels[1].vector(), (std::vector<double>{2.0 / 32, 4.0 / 32, 6.0 / 32}));
}

TEST_F(AudioIoTest, Pcm24Negative) {
  const std::vector<unsigned char> data{0x00, 0x00, 0x80, 0xff, 0xff, 0xff};
  dump(path("n.wav"), make_wav(1, 1, 24, data));
  const WavData w = read_wav(path("n.wav"));
  EXPECT_EQ(w.channels[0].vector(), (std::vector<double>{-1.0, -1.0 / 8388608}));
}

TEST_F(AudioIoTest, Float32RoundTripIsBitExact) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
  std::vector<double> a, b;
  for (int i = 0; i < 1000; ++i) {
    a.push_back(dist(rng));
    b.push_back(dist(rng));
  }
  a[0] = 1e-40f;  // denormal survives too
  const WavSpec spec{48000, 2, Encoding::kFloat32};
  const WriteStats st = write_wav(path("f.wav"), {Signal(a, 48000), Signal(b, 48000)}, spec);
  EXPECT_EQ(st.clipped, 0u);
  const WavData w = read_wav(path("f.wav"));
  EXPECT_EQ(w.spec.encoding, Encoding::kFloat32);
  EXPECT_EQ(w.spec.sample_rate, 48000u);
  EXPECT_EQ(w.channels[0].vector(), a);
  EXPECT_EQ(w.channels[1].vector(), b);
}

TEST_F(AudioIoTest, Pcm16SaturatesAndCounts) {
  const WavSpec spec{8000, 1, Encoding::kPcm16};
  const WriteStats st = write_wav(path("c.wav"), {Signal({1.0, -1.0, 0.5}, 8000)}, spec);
  EXPECT_EQ(st.clipped, 1u);
  const auto bytes = slurp(path("c.wav"));
  ASSERT_EQ(bytes.size(), 44u + 6u);
  EXPECT_EQ(bytes[44] | (bytes[45] << 8), 32767);
  EXPECT_EQ(bytes[46] | (bytes[47] << 8), 0x8000);
  EXPECT_EQ(bytes[48] | (bytes[49] << 8), 16384);
}

TEST_F(AudioIoTest, PcmRoundsToNearestEven) {
  const WavSpec spec{8000, 1, Encoding::kPcm16};
  // 0.5 and 1.5 LSB ties.
  write_wav(path("r.wav"), {Signal({0.5 / 32768, 1.5 / 32768, -0.5 / 32768}, 8000)}, spec);
  const WavData w = read_wav(path("r.wav"));
  EXPECT_EQ(w.channels[0].vector(), (std::vector<double>{0.0, 2.0 / 32768, 0.0}));
}

TEST_F(AudioIoTest, Pcm24DyadicRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int32_t> code(-(1 << 23), (1 << 23) - 1);
  std::vector<double> v;
  for (int i = 0; i < 500; ++i) v.push_back(std::ldexp(static_cast<double>(code(rng)), -23));
  v.push_back(-1.0);
  const WavSpec spec{44100, 1, Encoding::kPcm24};
  EXPECT_EQ(write_wav(path("p24.wav"), {Signal(v)}, spec).clipped, 0u);
  EXPECT_EQ(read_wav(path("p24.wav")).channels[0].vector(), v);
}

TEST_F(AudioIoTest, WriterRejectsBadInput) {
  const WavSpec spec;
  EXPECT_THROW(write_wav(path("x.wav"), {}, spec), DomainError);
  EXPECT_THROW(write_wav(path("x.wav"), {Signal{1.0}, Signal{1.0, 2.0}}, spec), DomainError);
  EXPECT_THROW(write_wav(path("no/such/dir/x.wav"), {Signal{0.0}}, spec), IoError);
}

TEST_F(AudioIoTest, ReaderNamesOffendingChunk) {
  EXPECT_THROW(read_wav(path("missing.wav")), IoError);

  dump(path("junk.wav"), {'n', 'o', 'p', 'e'});
  try {
    read_wav(path("junk.wav"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("RIFF"), std::string::npos);
  }

  dump(path("u8.wav"), make_wav(1, 1, 8, {0x80, 0x80}));
  try {
    read_wav(path("u8.wav"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("fmt "), std::string::npos);
  }

  dump(path("ext.wav"), make_wav(0xFFFE, 1, 16, {0, 0}));
  EXPECT_THROW(read_wav(path("ext.wav")), IoError);

  auto nodata = make_wav(1, 1, 16, {});
  nodata.resize(nodata.size() - 8);  // drop the data chunk header
  dump(path("nodata.wav"), nodata);
  try {
    read_wav(path("nodata.wav"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("data"), std::string::npos);
  }
}

}  // namespace
}  // namespace taches::audio
