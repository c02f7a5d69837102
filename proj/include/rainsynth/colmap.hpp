#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/geometry.hpp"

namespace rainsynth {

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct ColmapCameraRecord {
  std::int32_t camera_id = 0;
  std::string model_name;
  std::uint64_t width = 0;
  std::uint64_t height = 0;
  std::vector<double> params;

  friend bool operator==(const ColmapCameraRecord&,
                         const ColmapCameraRecord&) = default;
};

struct ImagePoint2D {
  double x = 0.0;
  double y = 0.0;
  std::int64_t point3d_id = -1;  // -1 when the feature has no 3D point

  friend bool operator==(const ImagePoint2D&, const ImagePoint2D&) = default;
};

struct ColmapImageRecord {
  std::int32_t image_id = 0;
  Eigen::Quaterniond qvec = Eigen::Quaterniond::Identity();  // w, x, y, z
  Eigen::Vector3d tvec = Eigen::Vector3d::Zero();
  std::int32_t camera_id = 0;
  std::string name;
  std::vector<ImagePoint2D> points2d;

  friend bool operator==(const ColmapImageRecord& a,
                         const ColmapImageRecord& b) {
    return a.image_id == b.image_id &&
           a.qvec.coeffs() == b.qvec.coeffs() && a.tvec == b.tvec &&
           a.camera_id == b.camera_id && a.name == b.name &&
           a.points2d == b.points2d;
  }
};

// ---------------------------------------------------------------------------
// Camera model table (COLMAP ids and parameter arities)
// ---------------------------------------------------------------------------

namespace detail {

struct ColmapModelInfo {
  int id;
  const char* name;
  std::size_t num_params;
};

inline constexpr std::array<ColmapModelInfo, 11> kColmapModels = {{
    {0, "SIMPLE_PINHOLE", 3},
    {1, "PINHOLE", 4},
    {2, "SIMPLE_RADIAL", 4},
    {3, "RADIAL", 5},
    {4, "OPENCV", 8},
    {5, "OPENCV_FISHEYE", 8},
    {6, "FULL_OPENCV", 12},
    {7, "FOV", 5},
    {8, "SIMPLE_RADIAL_FISHEYE", 4},
    {9, "RADIAL_FISHEYE", 5},
    {10, "THIN_PRISM_FISHEYE", 12},
}};

inline const ColmapModelInfo* model_by_name(std::string_view name) {
  for (const auto& m : kColmapModels)
    if (name == m.name) return &m;
  return nullptr;
}

inline const ColmapModelInfo* model_by_id(int id) {
  for (const auto& m : kColmapModels)
    if (id == m.id) return &m;
  return nullptr;
}

// Normalizes a quaternion but leaves already-unit inputs untouched, so a
// parse/serialize round trip is a bit-exact fixed point.
inline Eigen::Quaterniond normalize_quat(double w, double x, double y, double z,
                                         std::size_t line) {
  const double n2 = w * w + x * x + y * y + z * z;
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw ParseError(line, "quaternion has zero or non-finite norm");
  if (std::abs(n2 - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon())
    return Eigen::Quaterniond(w, x, y, z);
  const double inv = 1.0 / std::sqrt(n2);
  return Eigen::Quaterniond(w * inv, x * inv, y * inv, z * inv);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != '\r')
      ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, std::string("malformed ") + what + " '" +
                               std::string(field) + "'");
  return value;
}

inline std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// Little-endian primitives. Assembled bytewise so the layout is
// host-independent.

template <typename T>
T read_le(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
    throw TruncatedStreamError("stream ended mid-record");
  if constexpr (sizeof(T) == 1) {
    T v;
    std::memcpy(&v, bytes.data(), 1);
    return v;
  } else {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      acc |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(acc);
    } else {
      return static_cast<T>(acc);
    }
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint64_t acc;
  if constexpr (std::is_same_v<T, double>) {
    acc = std::bit_cast<std::uint64_t>(value);
  } else {
    acc = static_cast<std::uint64_t>(
        static_cast<std::make_unsigned_t<T>>(value));
  }
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((acc >> (8 * i)) & 0xff);
  out.write(bytes.data(), sizeof(T));
}

inline constexpr std::uint64_t kInvalidPoint3dId =
    std::numeric_limits<std::uint64_t>::max();

}  // namespace detail

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Parses COLMAP cameras.txt. Lines starting with '#' are comments. Unknown
/// camera models are kept verbatim with whatever parameters the line carries;
/// known models have their parameter count enforced.
inline std::vector<ColmapCameraRecord> parse_cameras_text(std::istream& in) {
  std::vector<ColmapCameraRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 4)
      throw ParseError(line_no, "camera line needs at least 4 fields");
    ColmapCameraRecord rec;
    rec.camera_id =
        detail::parse_number<std::int32_t>(fields[0], line_no, "camera id");
    if (rec.camera_id <= 0) throw ParseError(line_no, "camera id must be > 0");
    rec.model_name = std::string(fields[1]);
    rec.width = detail::parse_number<std::uint64_t>(fields[2], line_no, "width");
    rec.height =
        detail::parse_number<std::uint64_t>(fields[3], line_no, "height");
    if (rec.width == 0 || rec.height == 0)
      throw ParseError(line_no, "image dimensions must be positive");
    for (std::size_t i = 4; i < fields.size(); ++i)
      rec.params.push_back(
          detail::parse_number<double>(fields[i], line_no, "camera parameter"));
    if (const auto* model = detail::model_by_name(rec.model_name)) {
      if (rec.params.size() != model->num_params)
        throw ParseError(line_no, "model " + rec.model_name + " expects " +
                                      std::to_string(model->num_params) +
                                      " parameters, got " +
                                      std::to_string(rec.params.size()));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

/// Parses COLMAP images.txt: two physical lines per image, the second holding
/// the (possibly empty) 2D point list as X Y POINT3D_ID triples.
inline std::vector<ColmapImageRecord> parse_images_text(std::istream& in) {
  std::vector<ColmapImageRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 10)
      throw ParseError(line_no, "image line needs at least 10 fields");
    ColmapImageRecord rec;
    rec.image_id =
        detail::parse_number<std::int32_t>(fields[0], line_no, "image id");
    if (rec.image_id <= 0) throw ParseError(line_no, "image id must be > 0");
    const double qw = detail::parse_number<double>(fields[1], line_no, "qw");
    const double qx = detail::parse_number<double>(fields[2], line_no, "qx");
    const double qy = detail::parse_number<double>(fields[3], line_no, "qy");
    const double qz = detail::parse_number<double>(fields[4], line_no, "qz");
    rec.qvec = detail::normalize_quat(qw, qx, qy, qz, line_no);
    rec.tvec = {detail::parse_number<double>(fields[5], line_no, "tx"),
                detail::parse_number<double>(fields[6], line_no, "ty"),
                detail::parse_number<double>(fields[7], line_no, "tz")};
    rec.camera_id =
        detail::parse_number<std::int32_t>(fields[8], line_no, "camera id");
    // The name is everything after the ninth field; COLMAP names may in
    // principle contain spaces.
    {
      std::size_t pos = fields[8].data() + fields[8].size() - line.data();
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      std::size_t end = line.size();
      while (end > pos && (line[end - 1] == '\r' || line[end - 1] == ' ' ||
                           line[end - 1] == '\t'))
        --end;
      rec.name = line.substr(pos, end - pos);
    }
    if (rec.name.empty()) throw ParseError(line_no, "image name missing");

    if (!std::getline(in, line))
      throw ParseError(line_no, "missing 2D point line for image " +
                                    std::to_string(rec.image_id));
    ++line_no;
    const auto pts = detail::split_fields(line);
    if (!pts.empty() && pts[0].front() == '#')
      throw ParseError(line_no, "expected 2D point line, found comment");
    if (pts.size() % 3 != 0)
      throw ParseError(line_no, "2D point list length not a multiple of 3");
    for (std::size_t i = 0; i < pts.size(); i += 3) {
      ImagePoint2D p;
      p.x = detail::parse_number<double>(pts[i], line_no, "point x");
      p.y = detail::parse_number<double>(pts[i + 1], line_no, "point y");
      p.point3d_id = detail::parse_number<std::int64_t>(pts[i + 2], line_no,
                                                        "point3d id");
      rec.points2d.push_back(p);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void serialize_cameras_text(const std::vector<ColmapCameraRecord>& recs,
                                   std::ostream& out) {
  out << "# Camera list with one line of data per camera:\n"
         "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
         "# Number of cameras: "
      << recs.size() << "\n";
  for (const auto& rec : recs) {
    out << rec.camera_id << ' ' << rec.model_name << ' ' << rec.width << ' '
        << rec.height;
    for (double p : rec.params) out << ' ' << detail::format_double(p);
    out << '\n';
  }
}

inline void serialize_images_text(const std::vector<ColmapImageRecord>& recs,
                                  std::ostream& out) {
  out << "# Image list with two lines of data per image:\n"
         "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
         "#   POINTS2D[] as (X, Y, POINT3D_ID)\n"
         "# Number of images: "
      << recs.size() << "\n";
  for (const auto& rec : recs) {
    out << rec.image_id << ' ' << detail::format_double(rec.qvec.w()) << ' '
        << detail::format_double(rec.qvec.x()) << ' '
        << detail::format_double(rec.qvec.y()) << ' '
        << detail::format_double(rec.qvec.z()) << ' '
        << detail::format_double(rec.tvec.x()) << ' '
        << detail::format_double(rec.tvec.y()) << ' '
        << detail::format_double(rec.tvec.z()) << ' ' << rec.camera_id << ' '
        << rec.name << '\n';
    bool first = true;
    for (const auto& p : rec.points2d) {
      if (!first) out << ' ';
      out << detail::format_double(p.x) << ' ' << detail::format_double(p.y)
          << ' ' << p.point3d_id;
      first = false;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Binary format (little-endian, u64 record count header)
// ---------------------------------------------------------------------------

inline std::vector<ColmapCameraRecord> parse_cameras_binary(std::istream& in) {
  const auto count = detail::read_le<std::uint64_t>(in);
  std::vector<ColmapCameraRecord> records;
  records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ColmapCameraRecord rec;
    rec.camera_id = detail::read_le<std::int32_t>(in);
    const auto model_id = detail::read_le<std::int32_t>(in);
    const auto* model = detail::model_by_id(model_id);
    if (!model)
      throw UnknownModelError("unknown camera model id " +
                              std::to_string(model_id));
    rec.model_name = model->name;
    rec.width = detail::read_le<std::uint64_t>(in);
    rec.height = detail::read_le<std::uint64_t>(in);
    rec.params.resize(model->num_params);
    for (auto& p : rec.params) p = detail::read_le<double>(in);
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<ColmapImageRecord> parse_images_binary(std::istream& in) {
  const auto count = detail::read_le<std::uint64_t>(in);
  std::vector<ColmapImageRecord> records;
  records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ColmapImageRecord rec;
    rec.image_id = detail::read_le<std::int32_t>(in);
    const double qw = detail::read_le<double>(in);
    const double qx = detail::read_le<double>(in);
    const double qy = detail::read_le<double>(in);
    const double qz = detail::read_le<double>(in);
    rec.qvec = detail::normalize_quat(qw, qx, qy, qz, 0);
    rec.tvec.x() = detail::read_le<double>(in);
    rec.tvec.y() = detail::read_le<double>(in);
    rec.tvec.z() = detail::read_le<double>(in);
    rec.camera_id = detail::read_le<std::int32_t>(in);
    for (;;) {
      const auto c = detail::read_le<char>(in);
      if (c == '\0') break;
      rec.name.push_back(c);
    }
    const auto num_points = detail::read_le<std::uint64_t>(in);
    rec.points2d.reserve(num_points);
    for (std::uint64_t p = 0; p < num_points; ++p) {
      ImagePoint2D pt;
      pt.x = detail::read_le<double>(in);
      pt.y = detail::read_le<double>(in);
      const auto id = detail::read_le<std::uint64_t>(in);
      pt.point3d_id =
          id == detail::kInvalidPoint3dId ? -1 : static_cast<std::int64_t>(id);
      rec.points2d.push_back(pt);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void serialize_cameras_binary(const std::vector<ColmapCameraRecord>& recs,
                                     std::ostream& out) {
  detail::write_le<std::uint64_t>(out, recs.size());
  for (const auto& rec : recs) {
    const auto* model = detail::model_by_name(rec.model_name);
    if (!model)
      throw UnknownModelError("cannot serialize unknown camera model '" +
                              rec.model_name + "' to binary");
    detail::write_le<std::int32_t>(out, rec.camera_id);
    detail::write_le<std::int32_t>(out, model->id);
    detail::write_le<std::uint64_t>(out, rec.width);
    detail::write_le<std::uint64_t>(out, rec.height);
    for (double p : rec.params) detail::write_le<double>(out, p);
  }
}

inline void serialize_images_binary(const std::vector<ColmapImageRecord>& recs,
                                    std::ostream& out) {
  detail::write_le<std::uint64_t>(out, recs.size());
  for (const auto& rec : recs) {
    detail::write_le<std::int32_t>(out, rec.image_id);
    detail::write_le<double>(out, rec.qvec.w());
    detail::write_le<double>(out, rec.qvec.x());
    detail::write_le<double>(out, rec.qvec.y());
    detail::write_le<double>(out, rec.qvec.z());
    detail::write_le<double>(out, rec.tvec.x());
    detail::write_le<double>(out, rec.tvec.y());
    detail::write_le<double>(out, rec.tvec.z());
    detail::write_le<std::int32_t>(out, rec.camera_id);
    out.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
    detail::write_le<char>(out, '\0');
    detail::write_le<std::uint64_t>(out, rec.points2d.size());
    for (const auto& p : rec.points2d) {
      detail::write_le<double>(out, p.x);
      detail::write_le<double>(out, p.y);
      detail::write_le<std::uint64_t>(
          out, p.point3d_id < 0 ? detail::kInvalidPoint3dId
                                : static_cast<std::uint64_t>(p.point3d_id));
    }
  }
}

// ---------------------------------------------------------------------------
// Viewpoint matrix
// ---------------------------------------------------------------------------

struct ViewpointEntry {
  Camera camera;
  int elevation_bucket = 0;
  int azimuth_bucket = 0;
};

/// The set of per-view cameras bucketed on a uniform elevation x azimuth grid.
struct ViewpointMatrix {
  std::vector<ViewpointEntry> entries;
  int elevation_bins = 1;
  int azimuth_bins = 1;
};

inline int elevation_bucket(double elevation, int bins) {
  const double t = (elevation + std::numbers::pi / 2.0) / std::numbers::pi;
  return std::clamp(static_cast<int>(std::floor(t * bins)), 0, bins - 1);
}

inline int azimuth_bucket(double azimuth, int bins) {
  const double t = (azimuth + std::numbers::pi) / (2.0 * std::numbers::pi);
  return std::clamp(static_cast<int>(std::floor(t * bins)), 0, bins - 1);
}

/// Builds one Camera per image record. Only SIMPLE_PINHOLE and PINHOLE models
/// are accepted here; parsers keep other models, policy lives at this layer.
inline ViewpointMatrix build_viewpoint_matrix(
    const std::vector<ColmapCameraRecord>& cameras,
    const std::vector<ColmapImageRecord>& images, const Eigen::Vector3d& up,
    int elevation_bins = 1, int azimuth_bins = 1) {
  if (elevation_bins < 1 || azimuth_bins < 1)
    throw ParamOutOfRangeError("viewpoint grid needs at least 1x1 buckets");
  std::unordered_map<std::int32_t, const ColmapCameraRecord*> by_id;
  for (const auto& cam : cameras) by_id.emplace(cam.camera_id, &cam);

  ViewpointMatrix out;
  out.elevation_bins = elevation_bins;
  out.azimuth_bins = azimuth_bins;
  out.entries.reserve(images.size());
  for (const auto& img : images) {
    const auto it = by_id.find(img.camera_id);
    if (it == by_id.end())
      throw DanglingCameraIdError("image " + std::to_string(img.image_id) +
                                  " references missing camera id " +
                                  std::to_string(img.camera_id));
    const ColmapCameraRecord& cam = *it->second;
    Intrinsics k;
    k.width = static_cast<int>(cam.width);
    k.height = static_cast<int>(cam.height);
    if (cam.model_name == "SIMPLE_PINHOLE") {
      k.fx = k.fy = cam.params[0];
      k.cx = cam.params[1];
      k.cy = cam.params[2];
    } else if (cam.model_name == "PINHOLE") {
      k.fx = cam.params[0];
      k.fy = cam.params[1];
      k.cx = cam.params[2];
      k.cy = cam.params[3];
    } else {
      throw UnsupportedCameraModelError("camera model " + cam.model_name +
                                        " not supported by the rain pipeline");
    }
    Pose pose;
    pose.rotation = img.qvec;
    pose.translation = img.tvec;
    ViewpointEntry entry;
    entry.camera = make_camera(k, pose, up, img.image_id, img.name);
    entry.elevation_bucket =
        elevation_bucket(entry.camera.angles.elevation, elevation_bins);
    entry.azimuth_bucket =
        azimuth_bucket(entry.camera.angles.azimuth, azimuth_bins);
    out.entries.push_back(std::move(entry));
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const ViewpointEntry& a, const ViewpointEntry& b) {
              if (a.elevation_bucket != b.elevation_bucket)
                return a.elevation_bucket < b.elevation_bucket;
              if (a.azimuth_bucket != b.azimuth_bucket)
                return a.azimuth_bucket < b.azimuth_bucket;
              return a.camera.view_id < b.camera.view_id;
            });
  return out;
}

// ---------------------------------------------------------------------------
// Directory-level loading
// ---------------------------------------------------------------------------

struct Reconstruction {
  std::vector<ColmapCameraRecord> cameras;
  std::vector<ColmapImageRecord> images;
};

/// Loads cameras/images from a COLMAP sparse directory, preferring the binary
/// files when both representations are present.
inline Reconstruction load_reconstruction(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  Reconstruction rec;
  const fs::path cam_bin = dir / "cameras.bin";
  const fs::path img_bin = dir / "images.bin";
  const fs::path cam_txt = dir / "cameras.txt";
  const fs::path img_txt = dir / "images.txt";
  if (fs::exists(cam_bin) && fs::exists(img_bin)) {
    std::ifstream cams(cam_bin, std::ios::binary);
    std::ifstream imgs(img_bin, std::ios::binary);
    if (!cams || !imgs) throw IoError("cannot open " + dir.string());
    rec.cameras = parse_cameras_binary(cams);
    rec.images = parse_images_binary(imgs);
  } else if (fs::exists(cam_txt) && fs::exists(img_txt)) {
    std::ifstream cams(cam_txt);
    std::ifstream imgs(img_txt);
    if (!cams || !imgs) throw IoError("cannot open " + dir.string());
    rec.cameras = parse_cameras_text(cams);
    rec.images = parse_images_text(imgs);
  } else {
    throw IoError("no cameras/images files (.bin or .txt) in " + dir.string());
  }
  return rec;
}

}  // namespace rainsynth
