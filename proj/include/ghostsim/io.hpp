#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostsim/simulator.hpp"

namespace ghostsim::io {

/// Frame-stack container format "GFS1": 26-byte little-endian header
/// (magic, u16 version, u32 width/height/frames, u8 dtype, 7 reserved
/// zero bytes) followed by frames of row-major f64 samples, frame-major.
constexpr std::uint16_t kStackVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 1;
constexpr std::size_t kStackHeaderBytes = 26;

enum class StackError {
  OpenFailed,
  BadMagic,
  BadVersion,
  BadDtype,
  BadHeader,
  Truncated,
  WriteFailed,
};

class StackIoError : public std::runtime_error {
 public:
  StackIoError(StackError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  StackError code() const { return code_; }

 private:
  StackError code_;
};

/// Writes atomically (temp file + rename); read(write(x)) is bit-exact.
void write_stack(const std::string& path, const FrameStack& stack);
FrameStack read_stack(const std::string& path);

enum class ImageFormat { Pgm16, Csv };

/// PGM-16 output linearly rescales [min, max] to [0, 65535] and records
/// the affine transform in the comment line ("# affine offset=<o>
/// scale=<s>", value = offset + scale * code); a constant image keeps an
/// identity scale. CSV output carries the raw values at full precision.
void export_image(const std::string& path, const Eigen::ArrayXd& values,
                  int width, int height, ImageFormat format);

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 65535;
  std::vector<std::uint16_t> samples;  // row-major
  // Present when the file carries an affine comment written by
  // export_image.
  std::optional<double> offset;
  std::optional<double> scale;
};

PgmImage read_pgm(const std::string& path);
void write_pgm16(const std::string& path,
                 std::span<const std::uint16_t> samples, int width, int height,
                 const std::string& comment = {});

Eigen::ArrayXd read_image_csv(const std::string& path, int& width,
                              int& height);

/// One row of the measurement table shared by the sweep, snr and fit
/// commands. Column order is fixed: protocol, eta, n2, M, delta_el,
/// N_pixels, H, epsilon, t_plus, t_minus, snr, snr_err and, when any row
/// provides it, a trailing snr_analytic overlay column.
struct ResultRow {
  std::string protocol;
  double eta = 0.0;
  double n2 = 0.0;
  double modes = 0.0;
  double delta_el = 0.0;
  double n_pixels = 0.0;
  double frames = 0.0;
  double epsilon = 0.0;
  double t_plus = 0.0;
  double t_minus = 0.0;
  double snr = 0.0;
  double snr_err = 0.0;
  std::optional<double> snr_analytic;
};

void write_results_table(const std::string& path,
                         std::span<const ResultRow> rows);
std::vector<ResultRow> read_results_table(const std::string& path);

/// Formats a double so that parsing the text recovers the identical bits.
std::string format_double(double v);

}  // namespace ghostsim::io
