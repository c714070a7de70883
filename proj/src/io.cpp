#include "ghostsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ghostsim::io {

namespace {

constexpr char kMagic[4] = {'G', 'F', 'S', '1'};

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

/// Writes content to path via a sibling temp file and rename, so readers
/// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content,
                       StackError error_code = StackError::WriteFailed) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw StackIoError(error_code, "cannot open for writing: " + tmp);
    }
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw StackIoError(error_code, "write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw StackIoError(error_code,
                       "rename failed: " + tmp + " -> " + path);
  }
}

void skip_pgm_separators(std::istream& in, PgmImage& img) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      double offset = 0.0;
      double scale = 0.0;
      if (std::sscanf(line.c_str(), "# affine offset=%lf scale=%lf", &offset,
                      &scale) == 2) {
        img.offset = offset;
        img.scale = scale;
      }
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_stack(const std::string& path, const FrameStack& stack) {
  if (stack.width < 1 || stack.height < 1 || stack.frames() < 1 ||
      stack.pixels() != static_cast<Eigen::Index>(stack.width) * stack.height) {
    throw StackIoError(StackError::BadHeader, "inconsistent stack dimensions");
  }
  std::string buf;
  const std::size_t payload =
      static_cast<std::size_t>(stack.values.size()) * sizeof(double);
  buf.reserve(kStackHeaderBytes + payload);
  buf.append(kMagic, sizeof(kMagic));
  put_u16(buf, kStackVersion);
  put_u32(buf, static_cast<std::uint32_t>(stack.width));
  put_u32(buf, static_cast<std::uint32_t>(stack.height));
  put_u32(buf, static_cast<std::uint32_t>(stack.frames()));
  buf.push_back(static_cast<char>(kDtypeFloat64));
  buf.append(7, '\0');

  // Frame-major, row-major within a frame; doubles are stored as their
  // little-endian byte image.
  std::vector<double> row(static_cast<std::size_t>(stack.pixels()));
  for (Eigen::Index h = 0; h < stack.frames(); ++h) {
    for (Eigen::Index j = 0; j < stack.pixels(); ++j) {
      row[static_cast<std::size_t>(j)] = stack.values(h, j);
    }
    buf.append(reinterpret_cast<const char*>(row.data()),
               row.size() * sizeof(double));
  }
  write_file_atomic(path, buf);
}

FrameStack read_stack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StackIoError(StackError::OpenFailed, "cannot open " + path);
  unsigned char header[kStackHeaderBytes];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(header))) {
    throw StackIoError(StackError::Truncated, "truncated header: " + path);
  }
  if (std::memcmp(header, kMagic, sizeof(kMagic)) != 0) {
    throw StackIoError(StackError::BadMagic, "bad magic in " + path);
  }
  if (get_u16(header + 4) != kStackVersion) {
    throw StackIoError(StackError::BadVersion,
                       "unsupported version in " + path);
  }
  const std::uint32_t width = get_u32(header + 6);
  const std::uint32_t height = get_u32(header + 10);
  const std::uint32_t frames = get_u32(header + 14);
  if (header[18] != kDtypeFloat64) {
    throw StackIoError(StackError::BadDtype, "unsupported dtype in " + path);
  }
  if (width < 1 || height < 1 || frames < 1) {
    throw StackIoError(StackError::BadHeader, "bad dimensions in " + path);
  }

  FrameStack stack;
  stack.width = static_cast<int>(width);
  stack.height = static_cast<int>(height);
  const Eigen::Index pixels = static_cast<Eigen::Index>(width) * height;
  stack.values.resize(static_cast<Eigen::Index>(frames), pixels);
  std::vector<double> row(static_cast<std::size_t>(pixels));
  for (std::uint32_t h = 0; h < frames; ++h) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (in.gcount() !=
        static_cast<std::streamsize>(row.size() * sizeof(double))) {
      throw StackIoError(StackError::Truncated, "truncated payload: " + path);
    }
    for (Eigen::Index j = 0; j < pixels; ++j) {
      stack.values(static_cast<Eigen::Index>(h), j) =
          row[static_cast<std::size_t>(j)];
    }
  }
  return stack;
}

void export_image(const std::string& path, const Eigen::ArrayXd& values,
                  int width, int height, ImageFormat format) {
  if (values.size() != static_cast<Eigen::Index>(width) * height) {
    throw std::invalid_argument("image size does not match dimensions");
  }
  if (format == ImageFormat::Csv) {
    std::string buf;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (x) buf += ',';
        buf += format_double(values[static_cast<Eigen::Index>(y) * width + x]);
      }
      buf += '\n';
    }
    write_file_atomic(path, buf);
    return;
  }
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  double offset = lo;
  double scale = (hi - lo) / 65535.0;
  if (scale == 0.0) scale = 1.0;  // constant image: identity scale
  std::vector<std::uint16_t> codes(static_cast<std::size_t>(values.size()));
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double c = std::round((values[j] - offset) / scale);
    codes[static_cast<std::size_t>(j)] =
        static_cast<std::uint16_t>(std::clamp(c, 0.0, 65535.0));
  }
  write_pgm16(path, codes, width, height,
              "affine offset=" + format_double(offset) +
                  " scale=" + format_double(scale));
}

void write_pgm16(const std::string& path,
                 std::span<const std::uint16_t> samples, int width, int height,
                 const std::string& comment) {
  if (static_cast<std::size_t>(width) * height != samples.size()) {
    throw std::invalid_argument("sample count does not match dimensions");
  }
  std::string buf = "P5\n";
  if (!comment.empty()) buf += "# " + comment + "\n";
  buf += std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  for (const std::uint16_t s : samples) {
    // 16-bit PGM samples are big-endian by specification.
    buf.push_back(static_cast<char>(s >> 8));
    buf.push_back(static_cast<char>(s & 0xFF));
  }
  write_file_atomic(path, buf);
}

PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StackIoError(StackError::OpenFailed, "cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") {
    throw StackIoError(StackError::BadMagic, "not a PGM file: " + path);
  }
  PgmImage img;
  skip_pgm_separators(in, img);
  in >> img.width;
  skip_pgm_separators(in, img);
  in >> img.height;
  skip_pgm_separators(in, img);
  in >> img.maxval;
  if (!in || img.width < 1 || img.height < 1 || img.maxval < 1 ||
      img.maxval > 65535) {
    throw StackIoError(StackError::BadHeader, "bad PGM header: " + path);
  }
  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.samples.resize(count);
  if (magic == "P2") {
    for (std::size_t i = 0; i < count; ++i) {
      int v;
      in >> v;
      if (!in) {
        throw StackIoError(StackError::Truncated, "truncated PGM: " + path);
      }
      img.samples[i] = static_cast<std::uint16_t>(v);
    }
    return img;
  }
  in.get();  // single whitespace after maxval
  const bool wide = img.maxval > 255;
  std::vector<unsigned char> raw(count * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw StackIoError(StackError::Truncated, "truncated PGM: " + path);
  }
  for (std::size_t i = 0; i < count; ++i) {
    img.samples[i] = wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) |
                                                       raw[2 * i + 1])
                          : raw[i];
  }
  return img;
}

Eigen::ArrayXd read_image_csv(const std::string& path, int& width,
                              int& height) {
  std::ifstream in(path);
  if (!in) throw StackIoError(StackError::OpenFailed, "cannot open " + path);
  std::vector<double> values;
  std::string line;
  width = 0;
  height = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    if (width == 0) {
      width = cols;
    } else if (cols != width) {
      throw StackIoError(StackError::BadHeader, "ragged CSV image: " + path);
    }
    ++height;
  }
  Eigen::ArrayXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = values[i];
  }
  return out;
}

void write_results_table(const std::string& path,
                         std::span<const ResultRow> rows) {
  bool with_analytic = false;
  for (const auto& r : rows) with_analytic |= r.snr_analytic.has_value();
  std::string buf =
      "protocol,eta,n2,M,delta_el,N_pixels,H,epsilon,t_plus,t_minus,snr,"
      "snr_err";
  if (with_analytic) buf += ",snr_analytic";
  buf += '\n';
  for (const auto& r : rows) {
    buf += r.protocol;
    for (const double v : {r.eta, r.n2, r.modes, r.delta_el, r.n_pixels,
                           r.frames, r.epsilon, r.t_plus, r.t_minus, r.snr,
                           r.snr_err}) {
      buf += ',';
      buf += format_double(v);
    }
    if (with_analytic) {
      buf += ',';
      buf += format_double(r.snr_analytic.value_or(
          std::numeric_limits<double>::quiet_NaN()));
    }
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

std::vector<ResultRow> read_results_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StackIoError(StackError::OpenFailed, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw StackIoError(StackError::BadHeader, "missing header: " + path);
  }
  std::vector<std::string> names;
  {
    std::stringstream head(line);
    std::string cell;
    while (std::getline(head, cell, ',')) names.push_back(cell);
  }
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int c_proto = column("protocol");
  if (c_proto < 0) {
    throw StackIoError(StackError::BadHeader,
                       "missing protocol column: " + path);
  }
  const int c_analytic = column("snr_analytic");

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < names.size()) {
      throw StackIoError(StackError::Truncated, "short row in " + path);
    }
    auto num = [&](const char* name) {
      const int c = column(name);
      return c < 0 ? std::numeric_limits<double>::quiet_NaN()
                   : std::stod(cells[static_cast<std::size_t>(c)]);
    };
    ResultRow r;
    r.protocol = cells[static_cast<std::size_t>(c_proto)];
    r.eta = num("eta");
    r.n2 = num("n2");
    r.modes = num("M");
    r.delta_el = num("delta_el");
    r.n_pixels = num("N_pixels");
    r.frames = num("H");
    r.epsilon = num("epsilon");
    r.t_plus = num("t_plus");
    r.t_minus = num("t_minus");
    r.snr = num("snr");
    r.snr_err = num("snr_err");
    if (c_analytic >= 0) {
      r.snr_analytic = std::stod(cells[static_cast<std::size_t>(c_analytic)]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ghostsim::io
