#include "edgepose/pointcloud_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <vector>

namespace edgepose {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what),
      line_(line) {}

PointCloud crop(const PointCloud& cloud, const CropBox& box,
                std::vector<std::size_t>* kept) {
  PointCloud out;
  if (kept) kept->clear();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!box.contains(cloud[i])) continue;
    out.push_back(cloud[i]);
    if (kept) kept->push_back(i);
  }
  return out;
}

namespace {

// Upper bound on speculative reservation so a lying header cannot force a
// huge allocation.
constexpr std::size_t kMaxReserve = 1u << 20;

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const std::size_t end = text_.find('\n', pos_);
    const std::size_t stop = end == std::string_view::npos ? text_.size() : end;
    line = text_.substr(pos_, stop - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = stop + 1;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view tok, double& v) {
  // from_chars rejects a leading '+', which some writers emit.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec == std::errc::result_out_of_range) {
    // Overflowing literals behave like their infinite limit.
    v = (!tok.empty() && tok.front() == '-') ? -std::numeric_limits<double>::infinity()
                                             : std::numeric_limits<double>::infinity();
    return res.ptr == last;
  }
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_size(std::string_view tok, std::size_t& v) {
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string slurp(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct XyzColumns {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;
  std::size_t width = 0;  // total tokens per data row
};

void append_row(const std::vector<std::string_view>& toks, const XyzColumns& cols,
                std::size_t line_no, ReadResult& out) {
  if (toks.size() != cols.width) {
    throw ParseError(line_no, "expected " + std::to_string(cols.width) + " values, found " +
                                  std::to_string(toks.size()));
  }
  double x = 0.0, y = 0.0, z = 0.0;
  if (!parse_double(toks[cols.x], x) || !parse_double(toks[cols.y], y) ||
      !parse_double(toks[cols.z], z)) {
    throw ParseError(line_no, "non-numeric coordinate");
  }
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
    ++out.dropped_non_finite;
    return;
  }
  out.cloud.push_back(Point3(x, y, z));
}

}  // namespace

ReadResult read_pcd(std::string_view text) {
  LineReader reader(text);
  std::string_view line;

  std::vector<std::string> fields;
  std::vector<std::size_t> counts;
  std::size_t width = 0, height = 1, points = 0;
  bool have_width = false, have_points = false, have_fields = false;
  bool data_seen = false;

  while (reader.next(line)) {
    const auto toks = split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    const std::string key = lower(toks.front());
    const std::size_t ln = reader.line_no();

    if (key == "version" || key == "viewpoint" || key == "size" || key == "type") {
      continue;
    } else if (key == "fields") {
      if (toks.size() < 2) throw ParseError(ln, "FIELDS is empty");
      fields.clear();
      for (std::size_t i = 1; i < toks.size(); ++i) fields.push_back(lower(toks[i]));
      have_fields = true;
    } else if (key == "count") {
      counts.clear();
      for (std::size_t i = 1; i < toks.size(); ++i) {
        std::size_t c = 0;
        if (!parse_size(toks[i], c) || c == 0) throw ParseError(ln, "bad COUNT value");
        counts.push_back(c);
      }
    } else if (key == "width") {
      if (toks.size() != 2 || !parse_size(toks[1], width)) throw ParseError(ln, "bad WIDTH");
      have_width = true;
    } else if (key == "height") {
      if (toks.size() != 2 || !parse_size(toks[1], height)) throw ParseError(ln, "bad HEIGHT");
    } else if (key == "points") {
      if (toks.size() != 2 || !parse_size(toks[1], points)) throw ParseError(ln, "bad POINTS");
      have_points = true;
    } else if (key == "data") {
      if (toks.size() != 2) throw ParseError(ln, "bad DATA line");
      const std::string enc = lower(toks[1]);
      if (enc != "ascii") throw ParseError(ln, "unsupported DATA encoding '" + enc + "'");
      data_seen = true;
      break;
    } else {
      throw ParseError(ln, "unknown header key '" + std::string(toks.front()) + "'");
    }
  }

  if (!data_seen) throw ParseError(reader.line_no(), "missing DATA line");
  if (!have_fields) throw ParseError(reader.line_no(), "missing FIELDS");
  if (!have_width) throw ParseError(reader.line_no(), "missing WIDTH");
  if (counts.empty()) counts.assign(fields.size(), 1);
  if (counts.size() != fields.size()) {
    throw ParseError(reader.line_no(), "COUNT does not match FIELDS");
  }
  if (width != 0 && height > std::numeric_limits<std::size_t>::max() / width) {
    throw ParseError(reader.line_no(), "WIDTH*HEIGHT overflows");
  }
  const std::size_t expected = width * height;
  if (have_points && points != expected) {
    throw ParseError(reader.line_no(), "POINTS disagrees with WIDTH*HEIGHT");
  }

  XyzColumns cols;
  bool fx = false, fy = false, fz = false;
  std::size_t col = 0;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    if (fields[f] == "x") cols.x = col, fx = true;
    if (fields[f] == "y") cols.y = col, fy = true;
    if (fields[f] == "z") cols.z = col, fz = true;
    col += counts[f];
  }
  if (!(fx && fy && fz)) throw ParseError(reader.line_no(), "FIELDS lacks x y z");
  cols.width = col;

  ReadResult out;
  out.cloud.points.reserve(std::min(expected, kMaxReserve));
  std::size_t rows = 0;
  while (reader.next(line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (rows == expected) {
      throw ParseError(reader.line_no(), "more data rows than header WIDTH*HEIGHT = " +
                                             std::to_string(expected));
    }
    append_row(toks, cols, reader.line_no(), out);
    ++rows;
  }
  if (rows != expected) {
    throw ParseError(reader.line_no(), "found " + std::to_string(rows) +
                                           " data rows but header declares " +
                                           std::to_string(expected));
  }
  return out;
}

ReadResult read_pcd(std::istream& in) { return read_pcd(slurp(in)); }

ReadResult read_ply(std::string_view text) {
  LineReader reader(text);
  std::string_view line;

  if (!reader.next(line) || split_ws(line) != std::vector<std::string_view>{"ply"}) {
    throw ParseError(reader.line_no(), "missing 'ply' magic");
  }

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool format_seen = false, end_seen = false;

  while (reader.next(line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string key = lower(toks.front());
    const std::size_t ln = reader.line_no();
    if (key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      if (toks.size() != 3) throw ParseError(ln, "bad format line");
      const std::string enc = lower(toks[1]);
      if (enc != "ascii") throw ParseError(ln, "unsupported PLY encoding '" + enc + "'");
      if (toks[2] != "1.0") throw ParseError(ln, "unsupported PLY version");
      format_seen = true;
    } else if (key == "element") {
      Element e;
      if (toks.size() != 3 || !parse_size(toks[2], e.count)) throw ParseError(ln, "bad element line");
      e.name = lower(toks[1]);
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) throw ParseError(ln, "property before element");
      if (toks.size() >= 2 && lower(toks[1]) == "list") {
        if (toks.size() != 5) throw ParseError(ln, "bad list property");
        elements.back().has_list = true;
        elements.back().props.push_back(lower(toks[4]));
      } else {
        if (toks.size() != 3) throw ParseError(ln, "bad property line");
        elements.back().props.push_back(lower(toks[2]));
      }
    } else if (key == "end_header") {
      end_seen = true;
      break;
    } else {
      throw ParseError(ln, "unknown header key '" + std::string(toks.front()) + "'");
    }
  }
  if (!format_seen) throw ParseError(reader.line_no(), "missing format line");
  if (!end_seen) throw ParseError(reader.line_no(), "missing end_header");

  const auto vit = std::find_if(elements.begin(), elements.end(),
                                [](const Element& e) { return e.name == "vertex"; });
  if (vit == elements.end()) throw ParseError(reader.line_no(), "no vertex element");
  if (vit->has_list) throw ParseError(reader.line_no(), "list property in vertex element");

  XyzColumns cols;
  bool fx = false, fy = false, fz = false;
  for (std::size_t i = 0; i < vit->props.size(); ++i) {
    if (vit->props[i] == "x") cols.x = i, fx = true;
    if (vit->props[i] == "y") cols.y = i, fy = true;
    if (vit->props[i] == "z") cols.z = i, fz = true;
  }
  if (!(fx && fy && fz)) throw ParseError(reader.line_no(), "vertex element lacks x y z");
  cols.width = vit->props.size();

  ReadResult out;
  out.cloud.points.reserve(std::min(vit->count, kMaxReserve));
  for (const Element& e : elements) {
    const bool is_vertex = &e == &*vit;
    for (std::size_t row = 0; row < e.count; ++row) {
      do {
        if (!reader.next(line)) {
          throw ParseError(reader.line_no(), "unexpected end of data in element '" + e.name +
                                                 "' (row " + std::to_string(row) + " of " +
                                                 std::to_string(e.count) + ")");
        }
      } while (split_ws(line).empty());
      if (is_vertex) append_row(split_ws(line), cols, reader.line_no(), out);
    }
  }
  while (reader.next(line)) {
    if (!split_ws(line).empty()) throw ParseError(reader.line_no(), "trailing data after elements");
  }
  return out;
}

ReadResult read_ply(std::istream& in) { return read_ply(slurp(in)); }

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         lower(std::string_view(s).substr(s.size() - suffix.size())) == suffix;
}

}  // namespace

ReadResult read_cloud_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  if (ends_with(path, ".pcd")) return read_pcd(in);
  if (ends_with(path, ".ply")) return read_ply(in);
  throw ParseError(0, "unknown point cloud extension for '" + path + "'");
}

std::string format_coord(double v) {
  char buf[64];
  if (v == 0.0) return "0";
  if (std::abs(v) >= 0.1) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
  }
  return buf;
}

Color label_color(PointLabel label) {
  switch (label) {
    case PointLabel::kNonEdge: return {160, 160, 160};
    case PointLabel::kEdge: return {230, 40, 40};
    case PointLabel::kSegmentInlier: return {40, 200, 60};
    case PointLabel::kCorner: return {40, 80, 240};
    case PointLabel::kWireframe: return {250, 200, 30};
  }
  return {0, 0, 0};
}

namespace {

void write_xyz(std::ostream& out, const Point3& p) {
  out << format_coord(p.x()) << ' ' << format_coord(p.y()) << ' ' << format_coord(p.z());
}

void write_ply_header(std::ostream& out, std::size_t n, bool with_color) {
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << n << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (with_color) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
}

}  // namespace

void write_pcd(std::ostream& out, const PointCloud& cloud) {
  out << "# .PCD v0.7 - Point Cloud Data file format\n"
      << "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
      << "WIDTH " << cloud.size() << "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n"
      << "POINTS " << cloud.size() << "\nDATA ascii\n";
  for (const auto& p : cloud.points) {
    write_xyz(out, p);
    out << '\n';
  }
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  const bool with_color = cloud.colors && cloud.colors->size() == cloud.size();
  write_ply_header(out, cloud.size(), with_color);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    write_xyz(out, cloud[i]);
    if (with_color) {
      const Color c = (*cloud.colors)[i];
      out << ' ' << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b);
    }
    out << '\n';
  }
}

void write_cloud_file(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  if (ends_with(path, ".pcd")) {
    write_pcd(out, cloud);
  } else {
    write_ply(out, cloud);
  }
}

void write_annotated(std::ostream& out, const PointCloud& cloud,
                     std::span<const PointLabel> labels) {
  if (labels.size() != cloud.size()) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) +
                                " does not match cloud size " + std::to_string(cloud.size()));
  }
  write_ply_header(out, cloud.size(), true);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Color c = label_color(labels[i]);
    write_xyz(out, cloud[i]);
    out << ' ' << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b) << '\n';
  }
}

}  // namespace edgepose
