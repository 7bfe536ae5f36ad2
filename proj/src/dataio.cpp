#include "pathtracker/dataio.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Header field offsets within a record.
constexpr std::size_t kOffVersion = 4;
constexpr std::size_t kOffFrames = 6;
constexpr std::size_t kOffHeight = 8;
constexpr std::size_t kOffWidth = 10;
constexpr std::size_t kOffChannels = 12;
constexpr std::size_t kOffLabel = 14;
constexpr std::size_t kOffLayout = 15;
constexpr std::size_t kOffFinisher = 16;
constexpr std::size_t kOffSeed = 18;
constexpr std::size_t kOffDots = 26;
constexpr std::size_t kOffSpeed = 28;
constexpr std::size_t kOffResamples = 30;
constexpr std::size_t kMarkerBytes = 8;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  const auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t off) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(in[off + i]) << (8 * i));
  return static_cast<T>(u);
}

std::int32_t to_fixed(double px) { return static_cast<std::int32_t>(std::floor(px * kFixedPointScale)); }

std::string shard_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard_%05zu.bin", index);
  return buf;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct RecordShape {
  int frames;
  int dot_count;
  Layout layout;
};

// Validates the header against the manifest and returns the record's shape.
RecordShape check_header(std::span<const std::uint8_t> h, const DatasetManifest& m, const std::string& where) {
  if (std::memcmp(h.data(), kRecordMagic, 4) != 0) throw DataError(DataErrorKind::bad_magic, where);
  if (get_le<std::uint16_t>(h, kOffVersion) != kFormatVersion)
    throw DataError(DataErrorKind::malformed, where + ": unsupported record version");
  const int frames = get_le<std::uint16_t>(h, kOffFrames);
  const int height = get_le<std::uint16_t>(h, kOffHeight);
  const int width = get_le<std::uint16_t>(h, kOffWidth);
  const int channels = get_le<std::uint16_t>(h, kOffChannels);
  const int dots = get_le<std::uint16_t>(h, kOffDots);
  const auto layout = static_cast<Layout>(h[kOffLayout]);
  if (frames != m.config.frames || height != m.config.height || width != m.config.width || channels != kChannels ||
      dots != m.config.dot_count() || layout != m.layout || get_le<std::uint16_t>(h, kOffSpeed) != m.config.speed)
    throw DataError(DataErrorKind::dimension_mismatch,
                    where + ": record declares T=" + std::to_string(frames) + " H=" + std::to_string(height) +
                        " W=" + std::to_string(width) + " C=" + std::to_string(channels) +
                        " dots=" + std::to_string(dots) + ", manifest disagrees");
  if (h[kOffLabel] > 1) throw DataError(DataErrorKind::malformed, where + ": bad label byte");
  return {frames, dots, layout};
}

VideoSample decode_record(std::span<const std::uint8_t> rec, const RecordShape& shape) {
  VideoSample s;
  s.label = static_cast<Label>(rec[kOffLabel]);
  s.layout = shape.layout;
  s.finisher_index = get_le<std::uint16_t>(rec, kOffFinisher);
  s.sample_seed = get_le<std::uint64_t>(rec, kOffSeed);
  s.speed = get_le<std::uint16_t>(rec, kOffSpeed);
  s.resamples = static_cast<int>(get_le<std::uint32_t>(rec, kOffResamples));
  if (s.finisher_index >= shape.dot_count) throw DataError(DataErrorKind::malformed, "finisher index out of range");

  s.video = Video(shape.frames);
  const std::size_t frame_bytes = s.video.bytes().size();
  std::memcpy(s.video.bytes().data(), rec.data() + kRecordHeaderBytes, frame_bytes);

  std::size_t off = kRecordHeaderBytes + frame_bytes;
  const auto marker = [&](MarkerKind kind) {
    Marker mk;
    mk.cx = get_le<std::int16_t>(rec, off);
    mk.cy = get_le<std::int16_t>(rec, off + 2);
    mk.kind = kind;
    off += 4;
    return mk;
  };
  s.start = marker(MarkerKind::start);
  s.finish = marker(MarkerKind::finish);
  for (int d = 0; d < shape.dot_count; ++d) {
    Trajectory t;
    t.speed = s.speed;
    t.positions.reserve(static_cast<std::size_t>(shape.frames));
    for (int f = 0; f < shape.frames; ++f) {
      const double x = get_le<std::int32_t>(rec, off) / kFixedPointScale;
      const double y = get_le<std::int32_t>(rec, off + 4) / kFixedPointScale;
      t.positions.push_back({x, y});
      off += 8;
    }
    if (d == 0) s.target = std::move(t);
    else s.distractors.push_back(std::move(t));
  }
  return s;
}

TvL1Params flow_params_from_json(const json& j) {
  TvL1Params p;
  p.lambda = j.at("lambda").get<double>();
  p.theta = j.at("theta").get<double>();
  p.tau = j.at("tau").get<double>();
  p.warps = j.at("warps").get<int>();
  p.inner_iters = j.at("inner_iters").get<int>();
  p.pyramid_scale = j.at("pyramid_scale").get<double>();
  p.pyramid_levels = j.at("pyramid_levels").get<int>();
  p.stop_epsilon = j.at("stop_epsilon").get<double>();
  p.support_radius = j.at("support_radius").get<int>();
  return p;
}

}  // namespace

void Fnv1a64::update(std::span<const std::uint8_t> bytes) {
  for (std::uint8_t b : bytes) {
    state_ ^= b;
    state_ *= 0x100000001b3ULL;
  }
}

std::size_t record_bytes(int frames, int dot_count) {
  return kRecordHeaderBytes + static_cast<std::size_t>(frames) * kFrameBytes + kMarkerBytes +
         static_cast<std::size_t>(dot_count) * static_cast<std::size_t>(frames) * 8;
}

std::vector<std::uint8_t> encode_record(const VideoSample& s) {
  std::vector<std::uint8_t> out;
  out.reserve(record_bytes(s.frames(), s.dot_count()));
  out.insert(out.end(), kRecordMagic, kRecordMagic + 4);
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.frames()));
  put_le<std::uint16_t>(out, kCanvasHeight);
  put_le<std::uint16_t>(out, kCanvasWidth);
  put_le<std::uint16_t>(out, kChannels);
  out.push_back(static_cast<std::uint8_t>(s.label));
  out.push_back(static_cast<std::uint8_t>(s.layout));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.finisher_index));
  put_le<std::uint64_t>(out, s.sample_seed);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.dot_count()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.speed));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.resamples));
  const auto frames = s.video.bytes();
  out.insert(out.end(), frames.begin(), frames.end());
  for (const Marker* m : {&s.start, &s.finish}) {
    put_le<std::int16_t>(out, static_cast<std::int16_t>(m->cx));
    put_le<std::int16_t>(out, static_cast<std::int16_t>(m->cy));
  }
  for (int d = 0; d < s.dot_count(); ++d)
    for (const Vec2& p : s.dot(d).positions) {
      put_le<std::int32_t>(out, to_fixed(p.x));
      put_le<std::int32_t>(out, to_fixed(p.y));
    }
  return out;
}

VideoSample stored_form(const VideoSample& sample) {
  const auto rec = encode_record(sample);
  return decode_record(rec, {sample.frames(), sample.dot_count(), sample.layout});
}

std::string manifest_to_json(const DatasetManifest& m) {
  const GenConfig& c = m.config;
  json j;
  j["format"] = "pathtracker-dataset";
  j["format_version"] = m.format_version;
  j["prng_id"] = m.prng_id;
  j["fold"] = std::string(to_string(m.fold));
  j["layout"] = std::string(to_string(m.layout));
  j["sample_count"] = m.sample_count;
  j["checksum"] = "fnv1a64:" + hex64(m.checksum);
  j["records_per_shard"] = m.records_per_shard;
  j["label_order"] = "interleaved, even sample_index positive";
  j["config"] = {{"frames", c.frames},
                 {"distractors", c.distractors},
                 {"speed", c.speed},
                 {"layout", std::string(to_string(c.layout))},
                 {"height", c.height},
                 {"width", c.width},
                 {"train_count", c.train_count},
                 {"test_count", c.test_count},
                 {"master_seed", c.master_seed},
                 {"max_resample_attempts", c.max_resample_attempts}};
  json shards = json::array();
  for (const auto& s : m.shards) shards.push_back({{"file", s.file}, {"records", s.records}, {"bytes", s.bytes}});
  j["shards"] = shards;
  if (m.flow_params) {
    const TvL1Params& p = *m.flow_params;
    j["flow_params"] = {{"lambda", p.lambda},           {"theta", p.theta},
                        {"tau", p.tau},                 {"warps", p.warps},
                        {"inner_iters", p.inner_iters}, {"pyramid_scale", p.pyramid_scale},
                        {"pyramid_levels", p.pyramid_levels}, {"stop_epsilon", p.stop_epsilon},
                        {"support_radius", p.support_radius}};
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kFormatVersion)
      throw DataError(DataErrorKind::malformed, "unsupported format_version " + std::to_string(m.format_version));
    m.prng_id = j.at("prng_id").get<std::string>();
    m.fold = parse_fold(j.at("fold").get<std::string>());
    m.layout = parse_layout(j.at("layout").get<std::string>());
    m.sample_count = j.at("sample_count").get<std::uint64_t>();
    const std::string checksum = j.at("checksum").get<std::string>();
    if (checksum.rfind("fnv1a64:", 0) != 0 || checksum.size() != 8 + 16)
      throw DataError(DataErrorKind::malformed, "bad checksum field");
    m.checksum = std::stoull(checksum.substr(8), nullptr, 16);
    m.records_per_shard = j.at("records_per_shard").get<int>();
    const json& c = j.at("config");
    m.config.frames = c.at("frames").get<int>();
    m.config.distractors = c.at("distractors").get<int>();
    m.config.speed = c.at("speed").get<int>();
    m.config.layout = parse_layout(c.at("layout").get<std::string>());
    m.config.height = c.at("height").get<int>();
    m.config.width = c.at("width").get<int>();
    m.config.train_count = c.at("train_count").get<int>();
    m.config.test_count = c.at("test_count").get<int>();
    m.config.master_seed = c.at("master_seed").get<std::uint64_t>();
    m.config.max_resample_attempts = c.at("max_resample_attempts").get<int>();
    for (const json& s : j.at("shards"))
      m.shards.push_back({s.at("file").get<std::string>(), s.at("records").get<std::uint64_t>(),
                          s.at("bytes").get<std::uint64_t>()});
    if (j.contains("flow_params")) m.flow_params = flow_params_from_json(j.at("flow_params"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(DataErrorKind::malformed, std::string("manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(DataErrorKind::malformed, std::string("manifest: ") + e.what());
  }
}

DatasetWriter::DatasetWriter(fs::path dir, DatasetManifest manifest, std::optional<std::uint64_t> expected_count)
    : dir_(std::move(dir)), manifest_(std::move(manifest)), expected_(expected_count) {
  if (manifest_.records_per_shard < 1) throw ConfigError("records_per_shard must be >= 1");
  manifest_.sample_count = 0;
  manifest_.shards.clear();
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw DataError(DataErrorKind::io, "cannot create " + dir_.string() + ": " + ec.message());
  if (fs::exists(dir_ / kManifestName, ec))
    throw DataError(DataErrorKind::io, dir_.string() + " already holds a dataset");
}

void DatasetWriter::append(const VideoSample& sample) {
  if (finished_) throw DataError(DataErrorKind::io, "append after finish");
  if (sample.frames() != manifest_.config.frames || sample.dot_count() != manifest_.config.dot_count() ||
      sample.layout != manifest_.layout)
    throw DataError(DataErrorKind::dimension_mismatch, "sample shape disagrees with the manifest config");
  if (!shard_.is_open() || manifest_.shards.back().records >= static_cast<std::uint64_t>(manifest_.records_per_shard)) {
    close_shard();
    const std::string name = shard_name(manifest_.shards.size());
    shard_.open(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!shard_) throw DataError(DataErrorKind::io, "cannot open " + (dir_ / name).string());
    manifest_.shards.push_back({name, 0, 0});
  }
  const auto rec = encode_record(sample);
  shard_.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  if (!shard_) throw DataError(DataErrorKind::io, "write failed for " + manifest_.shards.back().file);
  hash_.update(rec);
  manifest_.shards.back().records += 1;
  manifest_.shards.back().bytes += rec.size();
  manifest_.sample_count += 1;
}

void DatasetWriter::close_shard() {
  if (!shard_.is_open()) return;
  shard_.close();
  if (!shard_) throw DataError(DataErrorKind::io, "close failed for " + manifest_.shards.back().file);
}

DatasetManifest DatasetWriter::finish() {
  if (finished_) return manifest_;
  close_shard();
  if (expected_ && *expected_ != manifest_.sample_count)
    throw DataError(DataErrorKind::count_mismatch, "wrote " + std::to_string(manifest_.sample_count) +
                                                       " samples, manifest expects " + std::to_string(*expected_));
  manifest_.checksum = hash_.digest();
  std::ofstream out(dir_ / kManifestName, std::ios::binary | std::ios::trunc);
  out << manifest_to_json(manifest_);
  if (!out) throw DataError(DataErrorKind::io, "cannot write manifest in " + dir_.string());
  finished_ = true;
  return manifest_;
}

void write_dataset(std::span<const VideoSample> samples, const DatasetManifest& manifest, const fs::path& dir) {
  DatasetWriter w(dir, manifest, samples.size());
  for (const auto& s : samples) w.append(s);
  w.finish();
}

DatasetReader::DatasetReader(fs::path dir) : dir_(std::move(dir)) {
  std::ifstream mf(dir_ / kManifestName, std::ios::binary);
  if (!mf) throw DataError(DataErrorKind::io, "no manifest in " + dir_.string());
  std::stringstream text;
  text << mf.rdbuf();
  manifest_ = manifest_from_json(text.str());

  std::uint64_t total = 0;
  for (const auto& s : manifest_.shards) total += s.records;
  if (total != manifest_.sample_count)
    throw DataError(DataErrorKind::count_mismatch, "shards hold " + std::to_string(total) + " records, manifest says " +
                                                       std::to_string(manifest_.sample_count));

  const std::size_t rec_size = record_bytes(manifest_.config.frames, manifest_.config.dot_count());
  Fnv1a64 hash;
  std::vector<std::uint8_t> buf(1 << 20);
  std::array<std::uint8_t, kRecordHeaderBytes> header{};
  for (const auto& s : manifest_.shards) {
    const fs::path path = dir_ / s.file;
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw DataError(DataErrorKind::io, "cannot stat " + s.file + ": " + ec.message());
    if (size < s.bytes || size < s.records * rec_size)
      throw DataError(DataErrorKind::truncated, s.file + " has " + std::to_string(size) + " bytes, expected " +
                                                    std::to_string(s.bytes));
    if (size != s.bytes || s.bytes != s.records * rec_size)
      throw DataError(DataErrorKind::malformed, s.file + " size disagrees with its record count");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(DataErrorKind::io, "cannot open " + s.file);
    for (std::uint64_t r = 0; r < s.records; ++r) {
      in.seekg(static_cast<std::streamoff>(r * rec_size));
      in.read(reinterpret_cast<char*>(header.data()), header.size());
      if (!in) throw DataError(DataErrorKind::truncated, s.file);
      check_header(header, manifest_, s.file + " record " + std::to_string(r));
    }
    in.clear();
    in.seekg(0);
    while (in) {
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      hash.update({buf.data(), static_cast<std::size_t>(in.gcount())});
    }
  }
  if (hash.digest() != manifest_.checksum)
    throw DataError(DataErrorKind::checksum, dir_.string() + ": computed " + hex64(hash.digest()) + ", manifest has " +
                                                 hex64(manifest_.checksum));
}

std::optional<VideoSample> DatasetReader::next() {
  while (shard_ < manifest_.shards.size() && record_in_shard_ >= manifest_.shards[shard_].records) {
    ++shard_;
    record_in_shard_ = 0;
    in_.close();
  }
  if (shard_ >= manifest_.shards.size()) return std::nullopt;
  const auto& s = manifest_.shards[shard_];
  if (!in_.is_open()) {
    in_.open(dir_ / s.file, std::ios::binary);
    if (!in_) throw DataError(DataErrorKind::io, "cannot open " + s.file);
  }
  std::vector<std::uint8_t> rec(record_bytes(manifest_.config.frames, manifest_.config.dot_count()));
  in_.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  if (!in_) throw DataError(DataErrorKind::truncated, s.file + " record " + std::to_string(record_in_shard_));
  const RecordShape shape = check_header(rec, manifest_, s.file + " record " + std::to_string(record_in_shard_));
  ++record_in_shard_;
  return decode_record(rec, shape);
}

std::vector<Label> DatasetReader::labels() const {
  std::vector<Label> out;
  out.reserve(manifest_.sample_count);
  const std::size_t rec_size = record_bytes(manifest_.config.frames, manifest_.config.dot_count());
  std::array<std::uint8_t, kRecordHeaderBytes> header{};
  for (const auto& s : manifest_.shards) {
    std::ifstream in(dir_ / s.file, std::ios::binary);
    if (!in) throw DataError(DataErrorKind::io, "cannot open " + s.file);
    for (std::uint64_t r = 0; r < s.records; ++r) {
      in.seekg(static_cast<std::streamoff>(r * rec_size));
      in.read(reinterpret_cast<char*>(header.data()), header.size());
      if (!in) throw DataError(DataErrorKind::truncated, s.file);
      out.push_back(static_cast<Label>(header[kOffLabel]));
    }
  }
  return out;
}

std::pair<DatasetManifest, std::vector<VideoSample>> read_dataset(const fs::path& dir) {
  DatasetReader reader(dir);
  std::vector<VideoSample> samples;
  samples.reserve(reader.manifest().sample_count);
  while (auto s = reader.next()) samples.push_back(std::move(*s));
  return {reader.manifest(), std::move(samples)};
}

void export_png(const VideoSample& sample, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(DataErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  for (int t = 0; t < sample.frames(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.png", t);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = kCanvasWidth;
    image.height = kCanvasHeight;
    image.format = PNG_FORMAT_RGB;
    const std::string path = (dir / name).string();
    if (png_image_write_to_file(&image, path.c_str(), 0, sample.video.frame(t).data(), 0, nullptr) == 0)
      throw DataError(DataErrorKind::io, "png write failed for " + path + ": " + image.message);
  }
}

}  // namespace pathtracker
