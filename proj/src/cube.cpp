#include "smsl/cube.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace smsl {

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

namespace {

constexpr const char* kCubeMagic = "smsl-cube";
constexpr const char* kScoresMagic = "smsl-scores";

struct RasterHeader {
  std::string magic;
  int bands = 0;
  int height = 0;
  int width = 0;
  std::filesystem::path payload;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string out = s.substr(first, last - first + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

int parse_dim(const std::map<std::string, std::string>& kv, const std::string& key,
              const std::filesystem::path& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError(path.string() + ": header is missing '" + key + "'");
  try {
    std::size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (used != it->second.size() || v < 1 || v > (1L << 30)) throw std::out_of_range(key);
    return static_cast<int>(v);
  } catch (const std::logic_error&) {
    throw DataError(path.string() + ": invalid value for '" + key + "': " + it->second);
  }
}

RasterHeader read_header(const std::filesystem::path& path, const std::string& expected_magic) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open header " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }

  auto require = [&](const std::string& key, const std::string& value) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError(path.string() + ": header is missing '" + key + "'");
    if (it->second != value)
      throw DataError(path.string() + ": expected " + key + "=" + value + ", got " + it->second);
  };
  require("magic", expected_magic);
  require("version", "1");
  require("dtype", "f32");
  require("layout", "bsq");
  require("byte_order", "little");

  RasterHeader h;
  h.magic = expected_magic;
  h.bands = parse_dim(kv, "bands", path);
  h.height = parse_dim(kv, "height", path);
  h.width = parse_dim(kv, "width", path);
  const auto it = kv.find("payload");
  if (it == kv.end() || it->second.empty())
    throw DataError(path.string() + ": header is missing 'payload'");
  h.payload = path.parent_path() / it->second;
  return h;
}

std::vector<double> read_payload(const RasterHeader& h) {
  const std::size_t count =
      static_cast<std::size_t>(h.bands) * static_cast<std::size_t>(h.height) * h.width;
  std::ifstream in(h.payload, std::ios::binary);
  if (!in) throw DataError("cannot open payload " + h.payload.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != 4 * count)
    throw DataError(h.payload.string() + ": payload has " + std::to_string(bytes) +
                    " bytes, expected " + std::to_string(4 * count));
  in.seekg(0);
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(4 * count));
  if (!in) throw DataError(h.payload.string() + ": short read");

  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(raw[i]))
      throw DataError(h.payload.string() + ": non-finite value at index " + std::to_string(i));
    out[i] = raw[i];
  }
  return out;
}

void write_raster(const std::filesystem::path& header_path, const std::string& magic, int bands,
                  int height, int width, std::span<const double> data) {
  std::filesystem::path payload = header_path;
  payload.replace_extension(".f32");
  if (payload == header_path) payload += ".f32";

  std::vector<float> raw(data.begin(), data.end());
  {
    std::ofstream out(payload, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + payload.string());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!out) throw DataError("write failed: " + payload.string());
  }
  std::ofstream hdr(header_path, std::ios::trunc);
  if (!hdr) throw DataError("cannot write " + header_path.string());
  hdr << "magic=" << magic << "\n"
      << "version=1\n"
      << "bands=" << bands << "\n"
      << "height=" << height << "\n"
      << "width=" << width << "\n"
      << "dtype=f32\n"
      << "layout=bsq\n"
      << "byte_order=little\n"
      << "payload=" << payload.filename().string() << "\n";
  if (!hdr) throw DataError("write failed: " + header_path.string());
}

// Reads the next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

HyperCube::HyperCube(int bands, int height, int width, std::vector<double> data)
    : bands_(bands), height_(height), width_(width), data_(std::move(data)) {
  if (bands < 1 || height < 1 || width < 1)
    throw ConfigError("cube dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(bands) * height * width)
    throw ConfigError("cube data length does not match bands*height*width");
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw ConfigError("cube contains a non-finite value at index " + std::to_string(i));
}

HyperCube HyperCube::zeros(int bands, int height, int width) {
  return HyperCube(bands, height, width,
                   std::vector<double>(static_cast<std::size_t>(std::max(bands, 0)) *
                                       std::max(height, 0) * std::max(width, 0)));
}

HyperCube HyperCube::from_matrix(const Matrix& pixels, int height, int width) {
  if (pixels.cols() != static_cast<Eigen::Index>(height) * width)
    throw ConfigError("pixel matrix has " + std::to_string(pixels.cols()) +
                      " columns, grid has " + std::to_string(height * width));
  std::vector<double> data(static_cast<std::size_t>(pixels.size()));
  Eigen::Map<Matrix>(data.data(), pixels.cols(), pixels.rows()) = pixels.transpose();
  return HyperCube(static_cast<int>(pixels.rows()), height, width, std::move(data));
}

Matrix flatten(const HyperCube& cube) {
  // BSQ storage is exactly a column-major N x L matrix.
  return Eigen::Map<const Matrix>(cube.data().data(), cube.pixels(), cube.bands()).transpose();
}

ViewSet::ViewSet(std::vector<HyperCube> views) : views_(std::move(views)) {
  if (views_.size() < 2) throw ConfigError("at least two views are required");
  const auto& f = views_.front();
  for (std::size_t s = 1; s < views_.size(); ++s) {
    const auto& v = views_[s];
    if (v.bands() != f.bands() || v.height() != f.height() || v.width() != f.width())
      throw ConfigError("view " + std::to_string(s + 1) + " has shape " +
                        std::to_string(v.bands()) + "x" + std::to_string(v.height()) + "x" +
                        std::to_string(v.width()) + ", expected " + std::to_string(f.bands()) +
                        "x" + std::to_string(f.height()) + "x" + std::to_string(f.width()));
  }
}

std::vector<Matrix> ViewSet::flattened() const {
  std::vector<Matrix> out;
  out.reserve(views_.size());
  for (const auto& v : views_) out.push_back(flatten(v));
  return out;
}

int GroundTruthMask::positives() const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void DetectionMap::validate() const {
  if (scores.size() != static_cast<std::size_t>(height) * width)
    throw DataError("score map size does not match its grid");
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i]) || scores[i] < 0.0)
      throw DataError("invalid score at pixel " + std::to_string(i));
}

DetectionMap make_detection_map(const Vector& scores, int height, int width) {
  DetectionMap m{height, width, std::vector<double>(scores.data(), scores.data() + scores.size())};
  m.validate();
  return m;
}

HyperCube load_cube(const std::filesystem::path& header_path) {
  const auto h = read_header(header_path, kCubeMagic);
  return HyperCube(h.bands, h.height, h.width, read_payload(h));
}

void save_cube(const HyperCube& cube, const std::filesystem::path& header_path) {
  write_raster(header_path, kCubeMagic, cube.bands(), cube.height(), cube.width(), cube.data());
}

DetectionMap load_scores(const std::filesystem::path& header_path) {
  const auto h = read_header(header_path, kScoresMagic);
  if (h.bands != 1) throw DataError(header_path.string() + ": score maps must have bands=1");
  DetectionMap m{h.height, h.width, read_payload(h)};
  return m;
}

void save_scores(const DetectionMap& map, const std::filesystem::path& header_path) {
  if (map.scores.size() != static_cast<std::size_t>(map.height) * map.width)
    throw DataError("score map size does not match its grid");
  write_raster(header_path, kScoresMagic, 1, map.height, map.width, map.scores);
}

GroundTruthMask load_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mask " + path.string());
  if (pgm_token(in) != "P5") throw DataError(path.string() + ": not a binary PGM (P5)");
  GroundTruthMask m;
  try {
    m.width = std::stoi(pgm_token(in));
    m.height = std::stoi(pgm_token(in));
    if (std::stoi(pgm_token(in)) != 255) throw DataError(path.string() + ": maxval must be 255");
  } catch (const std::logic_error&) {
    throw DataError(path.string() + ": malformed PGM header");
  }
  if (m.width < 1 || m.height < 1) throw DataError(path.string() + ": empty mask");
  // pgm_token consumed the single whitespace byte after maxval.
  const std::size_t n = static_cast<std::size_t>(m.width) * m.height;
  std::vector<unsigned char> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw DataError(path.string() + ": truncated mask");
  m.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] == 0) {
      m.labels[i] = 0;
    } else if (raw[i] == 255) {
      m.labels[i] = 1;
    } else {
      throw DataError(path.string() + ": mask value " + std::to_string(raw[i]) + " at pixel " +
                      std::to_string(i) + " (only 0 and 255 are allowed)");
    }
  }
  return m;
}

void save_mask(const GroundTruthMask& mask, const std::filesystem::path& path) {
  if (mask.labels.size() != static_cast<std::size_t>(mask.height) * mask.width)
    throw DataError("mask size does not match its grid");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  for (auto v : mask.labels) out.put(v ? static_cast<char>(255) : '\0');
  if (!out) throw DataError("write failed: " + path.string());
}

void save_heatmap(const DetectionMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const auto [lo, hi] = std::minmax_element(map.scores.begin(), map.scores.end());
  const double range = (lo == map.scores.end()) ? 0.0 : *hi - *lo;
  out << "P5\n" << map.width << " " << map.height << "\n255\n";
  for (double s : map.scores) {
    const double t = range > 0.0 ? (s - *lo) / range : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void validate_mask(const GroundTruthMask& mask, int height, int width) {
  if (mask.height != height || mask.width != width)
    throw DataError("mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                    ", expected " + std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace smsl
