#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "edgepose/point_cloud.hpp"

namespace edgepose {

/// Raised for any malformed or unsupported point-cloud input. `line()` is the
/// 1-based line number where parsing stopped (0 when not line specific).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ReadResult {
  PointCloud cloud;
  std::size_t dropped_non_finite = 0;
};

/// ASCII PCD v0.7. Rows with a non-finite x, y or z are dropped and counted.
ReadResult read_pcd(std::string_view text);
ReadResult read_pcd(std::istream& in);

/// ASCII PLY 1.0, vertex element only; extra vertex properties are ignored.
ReadResult read_ply(std::string_view text);
ReadResult read_ply(std::istream& in);

/// Dispatches on the file extension (.pcd or .ply).
ReadResult read_cloud_file(const std::string& path);

/// Per-point category for annotated output.
enum class PointLabel : std::uint8_t {
  kNonEdge,
  kEdge,
  kSegmentInlier,
  kCorner,
  kWireframe,
};

Color label_color(PointLabel label);

void write_pcd(std::ostream& out, const PointCloud& cloud);
void write_ply(std::ostream& out, const PointCloud& cloud);
void write_cloud_file(const std::string& path, const PointCloud& cloud);

/// ASCII PLY with uchar red/green/blue per vertex taken from the label.
/// Throws std::invalid_argument when `labels` and `cloud` differ in length.
void write_annotated(std::ostream& out, const PointCloud& cloud,
                     std::span<const PointLabel> labels);

/// Text form used for every serialized coordinate: at least six significant
/// digits and at least six decimal places.
std::string format_coord(double v);

}  // namespace edgepose
