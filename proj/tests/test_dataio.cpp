#include <gtest/gtest.h>
#include <png.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "pathtracker/dataio.hpp"
#include "pathtracker/errors.hpp"
#include "temp_dir.hpp"

using namespace pathtracker;
namespace fs = std::filesystem;

namespace {

GenConfig small_config(Layout layout = Layout::mixed) {
  GenConfig cfg;
  cfg.frames = 32;
  cfg.distractors = 2;
  cfg.layout = layout;
  cfg.master_seed = 31337;
  return cfg;
}

DatasetManifest manifest_for(const GenConfig& cfg, int per_shard = 4) {
  DatasetManifest m;
  m.config = cfg;
  m.fold = Fold::train;
  m.layout = cfg.layout;
  m.records_per_shard = per_shard;
  return m;
}

std::vector<VideoSample> samples(const GenConfig& cfg, int n) {
  std::vector<VideoSample> out;
  for (int i = 0; i < n; ++i) out.push_back(generate_sample(cfg, Fold::train, static_cast<std::uint64_t>(i)));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void poke(const fs::path& p, std::streamoff offset, char value) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(offset);
  f.put(value);
}

char peek(const fs::path& p, std::streamoff offset) {
  std::ifstream f(p, std::ios::binary);
  f.seekg(offset);
  return static_cast<char>(f.get());
}

DataErrorKind open_error(const fs::path& dir) {
  try {
    DatasetReader r(dir);
  } catch (const DataError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "reader accepted a damaged dataset";
  return DataErrorKind::io;
}

}  // namespace

TEST(Record, SizeArithmetic) {
  EXPECT_EQ(record_bytes(32, 2), 34u + 32u * 3072u + 8u + 32u * 2u * 8u);
  EXPECT_EQ(record_bytes(32, 2), 98858u);
  EXPECT_EQ(record_bytes(128, 27), 34u + 128u * 3072u + 8u + 128u * 27u * 8u);
  const GenConfig cfg = small_config();
  EXPECT_EQ(encode_record(generate_sample(cfg, Fold::train, 0)).size(), record_bytes(32, 3));
}

TEST(Record, HeaderStartsWithMagic) {
  const auto rec = encode_record(generate_sample(small_config(), Fold::train, 1));
  EXPECT_EQ(std::memcmp(rec.data(), kRecordMagic, 4), 0);
  EXPECT_EQ(rec[4], kFormatVersion);
  EXPECT_EQ(rec[6], 32);
}

TEST(Fnv, KnownVectors) {
  Fnv1a64 empty;
  EXPECT_EQ(empty.digest(), 0xcbf29ce484222325ULL);
  Fnv1a64 a;
  const std::uint8_t byte = 'a';
  a.update({&byte, 1});
  EXPECT_EQ(a.digest(), 0xaf63dc4c8601ec8cULL);
}

TEST(Dataset, EmptyFoldRoundTrips) {
  TempDir dir("empty");
  write_dataset({}, manifest_for(small_config()), dir.path());
  auto [m, got] = read_dataset(dir.path());
  EXPECT_EQ(m.sample_count, 0u);
  EXPECT_TRUE(got.empty());
}

TEST(Dataset, RoundTripIsLossless) {
  TempDir dir("roundtrip");
  const GenConfig cfg = small_config();
  const auto src = samples(cfg, 10);
  write_dataset(src, manifest_for(cfg), dir.path());
  auto [m, got] = read_dataset(dir.path());
  ASSERT_EQ(got.size(), src.size());
  EXPECT_EQ(m.shards.size(), 3u);
  EXPECT_EQ(m.shards[0].file, "shard_00000.bin");
  EXPECT_EQ(m.config, cfg);
  for (std::size_t i = 0; i < src.size(); ++i) {
    EXPECT_EQ(got[i].video, src[i].video);
    EXPECT_EQ(got[i].label, src[i].label);
    EXPECT_EQ(got[i].start, src[i].start);
    EXPECT_EQ(got[i].finish, src[i].finish);
    EXPECT_EQ(got[i].sample_seed, src[i].sample_seed);
    EXPECT_EQ(encode_record(got[i]), encode_record(stored_form(src[i])));
    const VideoSample want = stored_form(src[i]);
    for (int d = 0; d < want.dot_count(); ++d) EXPECT_EQ(got[i].dot(d).positions, want.dot(d).positions);
  }
  DatasetReader reader(dir.path());
  std::vector<Label> want_labels;
  for (const auto& s : src) want_labels.push_back(s.label);
  EXPECT_EQ(reader.labels(), want_labels);
}

TEST(Dataset, RerunsAreByteIdentical) {
  TempDir a("rerun_a"), b("rerun_b");
  const GenConfig cfg = small_config(Layout::engineered);
  write_dataset(samples(cfg, 6), manifest_for(cfg), a.path());
  write_dataset(samples(cfg, 6), manifest_for(cfg), b.path());
  for (const char* f : {"manifest.json", "shard_00000.bin", "shard_00001.bin"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Dataset, ManifestJsonRoundTrip) {
  DatasetManifest m = manifest_for(small_config());
  m.sample_count = 3;
  m.checksum = 0x0123456789abcdefULL;
  m.shards.push_back({"shard_00000.bin", 3, 296574});
  m.flow_params = TvL1Params{};
  const DatasetManifest back = manifest_from_json(manifest_to_json(m));
  EXPECT_EQ(back.checksum, m.checksum);
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.shards[0].bytes, 296574u);
  ASSERT_TRUE(back.flow_params.has_value());
  EXPECT_EQ(back.flow_params->lambda, 0.15);
  EXPECT_NE(manifest_to_json(m).find("fnv1a64:0123456789abcdef"), std::string::npos);
}

TEST(Dataset, WriterRejectsExistingDataset) {
  TempDir dir("twice");
  const GenConfig cfg = small_config();
  write_dataset(samples(cfg, 1), manifest_for(cfg), dir.path());
  EXPECT_THROW(DatasetWriter(dir.path(), manifest_for(cfg)), DataError);
}

TEST(Dataset, WriterChecksShapeAndCount) {
  TempDir dir("shape");
  const GenConfig cfg = small_config();
  GenConfig other = cfg;
  other.distractors = 5;
  DatasetWriter w(dir.path(), manifest_for(cfg), 2);
  try {
    w.append(generate_sample(other, Fold::train, 0));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataErrorKind::dimension_mismatch);
  }
  w.append(generate_sample(cfg, Fold::train, 0));
  try {
    w.finish();
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataErrorKind::count_mismatch);
  }
}

class Corruption : public ::testing::Test {
 protected:
  void SetUp() override {
    const GenConfig cfg = small_config();
    write_dataset(samples(cfg, 5), manifest_for(cfg), dir.path());
  }
  fs::path shard() const { return dir / "shard_00001.bin"; }
  TempDir dir{"corrupt"};
};

TEST_F(Corruption, TruncatedShard) {
  fs::resize_file(shard(), fs::file_size(shard()) - 1);
  EXPECT_EQ(open_error(dir.path()), DataErrorKind::truncated);
}

TEST_F(Corruption, FlippedPayloadByte) {
  const std::streamoff at = static_cast<std::streamoff>(kRecordHeaderBytes + 500);
  poke(shard(), at, static_cast<char>(peek(shard(), at) ^ 0x01));
  EXPECT_EQ(open_error(dir.path()), DataErrorKind::checksum);
}

TEST_F(Corruption, BadMagic) {
  poke(shard(), 0, 'X');
  EXPECT_EQ(open_error(dir.path()), DataErrorKind::bad_magic);
}

TEST_F(Corruption, DimensionMismatch) {
  poke(shard(), 6, 64);
  EXPECT_EQ(open_error(dir.path()), DataErrorKind::dimension_mismatch);
}

TEST_F(Corruption, ManifestCountMismatch) {
  std::string text = slurp(dir / "manifest.json");
  const auto pos = text.find("\"sample_count\": 5");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 17, "\"sample_count\": 6");
  std::ofstream(dir / "manifest.json", std::ios::binary | std::ios::trunc) << text;
  EXPECT_EQ(open_error(dir.path()), DataErrorKind::count_mismatch);
}

TEST(Png, ExportsDecodableFrames) {
  TempDir dir("png");
  GenConfig cfg = small_config(Layout::engineered);
  const VideoSample s = generate_sample(cfg, Fold::train, 0);
  export_png(s, dir.path());
  EXPECT_TRUE(fs::exists(dir / "frame_000.png"));
  EXPECT_TRUE(fs::exists(dir / "frame_031.png"));
  EXPECT_FALSE(fs::exists(dir / "frame_032.png"));

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  const std::string path = (dir / "frame_007.png").string();
  ASSERT_NE(png_image_begin_read_from_file(&image, path.c_str()), 0);
  image.format = PNG_FORMAT_RGB;
  ASSERT_EQ(image.width, 32u);
  ASSERT_EQ(image.height, 32u);
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  ASSERT_NE(png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr), 0);
  const auto frame = s.video.frame(7);
  EXPECT_TRUE(std::equal(pixels.begin(), pixels.end(), frame.begin()));
  // Dots are green in the engineered layout.
  int green = 0;
  for (std::size_t i = 1; i < pixels.size(); i += 3) green += pixels[i] == 255;
  EXPECT_GE(green, 4);
}
