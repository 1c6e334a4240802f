#pragma once

// Frame directories (PNG via libpng, binary/ASCII PGM) and CSV tables.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/image_core.hpp"

namespace phasevib::io {

namespace fs = std::filesystem;

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline int depth_for_maxval(unsigned maxval) {
  int bits = 1;
  while ((1u << bits) - 1u < maxval) ++bits;
  return bits;
}

}  // namespace detail

inline bool is_frame_file(const fs::path& p) {
  const auto ext = detail::lower(p.extension().string());
  return ext == ".png" || ext == ".pgm";
}

/// Reads a grayscale PNG (colour inputs are converted to luma). Intensities
/// are divided by 2^bit_depth - 1.
inline Frame read_png(const fs::path& path) {
  const std::string name = path.filename().string();
  detail::FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw Error(name + ": cannot open", "load");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw Error(name + ": not a PNG file", "load");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(name + ": libpng init failed", "load");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(name + ": libpng init failed", "load");
  }
  std::vector<png_byte> raw;
  png_uint_32 w = 0;
  png_uint_32 h = 0;
  int depth = 0;
  std::size_t rowbytes = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(name + ": corrupt or unreadable PNG", "load");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  }
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  const int out_depth = png_get_bit_depth(png, info);
  png_destroy_read_struct(&png, &info, nullptr);

  const bool wide = out_depth == 16;
  const double scale = depth < 8 ? (1 << depth) - 1 : (wide ? 65535.0 : 255.0);
  const double step = depth < 8 ? 255.0 / scale : 1.0;  // libpng expands low depths by replication
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (png_uint_32 y = 0; y < h; ++y)
    for (png_uint_32 x = 0; x < w; ++x) {
      const png_bytep r = rows[y];
      const double v = wide ? (r[2 * x] << 8 | r[2 * x + 1]) : r[x] / step;
      px[static_cast<std::size_t>(y) * w + x] = std::clamp(v / scale, 0.0, 1.0);
    }
  return Frame(static_cast<int>(w), static_cast<int>(h), std::move(px), std::max(depth, 1));
}

/// Writes an 8-bit PNG when frame.bit_depth() <= 8, else 16-bit.
inline void write_png(const Frame& frame, const fs::path& path) {
  const std::string name = path.filename().string();
  detail::FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error(name + ": cannot create", "write");
  const bool wide = frame.bit_depth() > 8;
  const int w = frame.width();
  const int h = frame.height();
  const double maxv = wide ? 65535.0 : 255.0;
  const std::size_t bpp = wide ? 2 : 1;
  std::vector<png_byte> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * bpp);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto q = static_cast<unsigned>(std::lround(frame(x, y) * maxv));
      const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * bpp;
      if (wide) {
        raw[i] = static_cast<png_byte>(q >> 8);
        raw[i + 1] = static_cast<png_byte>(q & 0xff);
      } else {
        raw[i] = static_cast<png_byte>(q);
      }
    }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(name + ": libpng init failed", "write");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(name + ": libpng init failed", "write");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = raw.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w) * bpp;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(name + ": PNG encoding failed", "write");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), wide ? 16 : 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Reads binary (P5) or ASCII (P2) PGM; intensities divided by maxval.
inline Frame read_pgm(const fs::path& path) {
  const std::string name = path.filename().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(name + ": cannot open", "load");
  auto token = [&]() {
    std::string t;
    char c = 0;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P2") throw Error(name + ": not a grayscale PGM (P2/P5)", "load");
  long w = 0;
  long h = 0;
  long maxval = 0;
  try {
    w = std::stol(token());
    h = std::stol(token());
    maxval = std::stol(token());
  } catch (const std::exception&) {
    throw Error(name + ": malformed PGM header", "load");
  }
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw Error(name + ": malformed PGM header", "load");
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> px(n);
  if (magic == "P5") {
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(n * bpp);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw Error(name + ": truncated PGM data", "load");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bpp == 2 ? (static_cast<unsigned>(buf[2 * i]) << 8 | buf[2 * i + 1]) : buf[i];
      px[i] = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string t = token();
      if (t.empty()) throw Error(name + ": truncated PGM data", "load");
      px[i] = std::clamp(std::stod(t) / static_cast<double>(maxval), 0.0, 1.0);
    }
  }
  return Frame(static_cast<int>(w), static_cast<int>(h), std::move(px),
               detail::depth_for_maxval(static_cast<unsigned>(maxval)));
}

inline Frame read_frame(const fs::path& path) {
  const auto ext = detail::lower(path.extension().string());
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw Error(path.filename().string() + ": unsupported frame format", "load");
}

struct LoadedSequence {
  VideoSequence video;
  std::vector<std::string> names;  // file names in temporal order
};

/// Loads every PNG/PGM in `dir`; lexicographic file-name order is temporal order.
inline LoadedSequence load_sequence_named(const fs::path& dir, double frame_rate_hz) {
  if (!(frame_rate_hz > 0.0)) throw Error("frame rate must be positive", "load");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error("input directory not found: " + dir.string(), "load");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_frame_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) throw Error("no PNG/PGM frames in " + dir.string(), "load");
  if (files.size() < 2) throw Error("need >= 2 frames, found 1 in " + dir.string(), "load");

  LoadedSequence out;
  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (const auto& f : files) {
    Frame fr = read_frame(f);
    if (!frames.empty() && (fr.width() != frames[0].width() || fr.height() != frames[0].height()))
      throw Error(f.filename().string() + ": dimensions " + std::to_string(fr.width()) + "x" + std::to_string(fr.height()) +
                      " differ from " + std::to_string(frames[0].width()) + "x" + std::to_string(frames[0].height()),
                  "load");
    frames.push_back(std::move(fr));
    out.names.push_back(f.filename().string());
  }
  out.video = VideoSequence(std::move(frames), frame_rate_hz);
  return out;
}

inline VideoSequence load_sequence(const fs::path& dir, double frame_rate_hz) {
  return load_sequence_named(dir, frame_rate_hz).video;
}

inline std::string frame_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu", k);
  return buf;
}

/// Writes frames as PNG into `dir` (created if needed). `names` supplies the
/// original file names to mirror; otherwise frame_NNNNNN is used. `suffix` is
/// inserted before the extension (e.g. "_enh").
inline std::vector<fs::path> write_sequence(const VideoSequence& video, const fs::path& dir,
                                            const std::vector<std::string>& names = {}, const std::string& suffix = "") {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < video.frame_count(); ++k) {
    const std::string stem = k < names.size() ? fs::path(names[k]).stem().string() : frame_name(k);
    const fs::path p = dir / (stem + suffix + ".png");
    write_png(video[k], p);
    written.push_back(p);
  }
  return written;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trippable formatting with a fixed, locale-free layout.
inline std::string fmt(double v) {
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline void write_csv(const CsvTable& t, const fs::path& path) {
  if (t.header.size() != t.columns.size()) throw Error("CSV header/column count mismatch", "write");
  for (const auto& c : t.columns)
    if (c.size() != t.rows()) throw Error("CSV columns differ in length", "write");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.filename().string() + ": cannot create", "write");
  for (std::size_t j = 0; j < t.header.size(); ++j) out << (j ? "," : "") << t.header[j];
  out << '\n';
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << fmt(t.columns[j][i]);
    out << '\n';
  }
  if (!out) throw Error(path.filename().string() + ": write failed", "write");
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.filename().string() + ": cannot open", "load");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(path.filename().string() + ": empty CSV", "load");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  t.columns.assign(t.header.size(), {});
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= t.columns.size()) throw Error(path.filename().string() + ": too many fields on line " + std::to_string(lineno), "load");
      try {
        t.columns[j].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(path.filename().string() + ": non-numeric field on line " + std::to_string(lineno), "load");
      }
      ++j;
    }
    if (j != t.columns.size()) throw Error(path.filename().string() + ": too few fields on line " + std::to_string(lineno), "load");
  }
  return t;
}

inline std::size_t column_index(const CsvTable& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw Error("CSV has no column '" + name + "'", "load");
  return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace phasevib::io
