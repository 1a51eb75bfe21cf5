#include <string>
#include <unordered_map>
#include <utility>

#include "internal/text.h"
#include "obbkit/annotation_io.h"
#include "obbkit/errors.h"

namespace obb {
namespace {

using internal::format_shortest;

// RFC 4180 fields on a single line. Quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported.
std::vector<std::string> split_csv_line(std::string_view line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string_view strip_bom(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  return text;
}

double number(const std::string& field, const char* name, std::size_t line_no) {
  const auto v = internal::parse_double(field);
  if (!v) {
    throw ParseError(std::string(name) + " is not a number: '" + field + "'",
                     line_no);
  }
  return *v;
}

}  // namespace

std::vector<RawAnnotation> read_csv_raw(std::string_view text) {
  const auto lines = internal::split_lines(strip_bom(text));
  if (lines.empty() || internal::trim(lines[0]) != kCsvHeader) {
    throw FormatError("missing CSV header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<RawAnnotation> out;
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (internal::trim(lines[ln]).empty()) continue;
    const auto f = split_csv_line(lines[ln], line_no);
    if (f.size() != 9) {
      throw ParseError("expected 9 fields, found " + std::to_string(f.size()),
                       line_no);
    }
    const std::string name(internal::trim(f[0]));
    if (name.empty()) throw ParseError("empty image_name", line_no);
    const double width = number(f[1], "width", line_no);
    const double height = number(f[2], "height", line_no);
    const double x1 = number(f[3], "x1", line_no);
    const double y1 = number(f[4], "y1", line_no);
    const double x2 = number(f[5], "x2", line_no);
    const double y2 = number(f[6], "y2", line_no);
    const auto angle_class = internal::parse_integer(f[8]);
    if (!angle_class) {
      throw ParseError("angle_class is not an integer: '" + f[8] + "'", line_no);
    }

    auto [it, inserted] = by_name.emplace(name, out.size());
    if (inserted) {
      RawAnnotation rec;
      rec.image_name = name;
      rec.image_width = width;
      rec.image_height = height;
      out.push_back(std::move(rec));
    }
    RawAnnotation& rec = out[it->second];
    if (rec.image_width != width || rec.image_height != height) {
      throw FormatError("line " + std::to_string(line_no) + ": image '" + name +
                        "' size disagrees with an earlier row");
    }
    RawObject obj;
    obj.class_name = std::string(internal::trim(f[7]));
    obj.cx = (x1 + x2) / 2.0;
    obj.cy = (y1 + y2) / 2.0;
    obj.w = x2 - x1;
    obj.h = y2 - y1;
    obj.angle_class = *angle_class;
    rec.objects.push_back(std::move(obj));
  }
  return out;
}

AnnotationSet parse_csv_records(std::string_view text,
                                const ParseOptions& options,
                                std::vector<std::string>* warnings) {
  AnnotationSet set(AnnotationFormat::kCsv);
  for (const auto& raw : read_csv_raw(text)) {
    set.add(to_annotation(raw, options, warnings));
  }
  return set;
}

std::string serialize_csv_records(std::span<const Annotation> annotations,
                                  AngleScheme scheme) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& a : annotations) {
    for (const auto& obj : a.objects()) {
      const auto& b = obj.box;
      out += csv_field(a.image_name());
      out += ',' + std::to_string(a.image_width());
      out += ',' + std::to_string(a.image_height());
      out += ',' + format_shortest(b.cx() - b.w() / 2.0);
      out += ',' + format_shortest(b.cy() - b.h() / 2.0);
      out += ',' + format_shortest(b.cx() + b.w() / 2.0);
      out += ',' + format_shortest(b.cy() + b.h() / 2.0);
      out += ',';
      out += to_string(obj.label);
      out += ',' + std::to_string(bin_angle(b.theta(), scheme).index());
      out += '\n';
    }
  }
  return out;
}

std::map<std::string, ImageSize> parse_image_sizes(std::string_view text) {
  const auto lines = internal::split_lines(strip_bom(text));
  if (lines.empty() || internal::trim(lines[0]) != "image_name,width,height") {
    throw FormatError("missing header 'image_name,width,height' in " +
                      std::string(kImageSizesFile));
  }
  std::map<std::string, ImageSize> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (internal::trim(lines[ln]).empty()) continue;
    const auto f = split_csv_line(lines[ln], line_no);
    if (f.size() != 3) {
      throw ParseError("expected 3 fields, found " + std::to_string(f.size()),
                       line_no);
    }
    const auto w = internal::parse_integer(f[1]);
    const auto h = internal::parse_integer(f[2]);
    if (!w || !h || *w <= 0 || *h <= 0 || *w > INT32_MAX || *h > INT32_MAX) {
      throw ParseError("width and height must be positive integers", line_no);
    }
    ImageSize size{std::string(internal::trim(f[0])), static_cast<int>(*w),
                   static_cast<int>(*h)};
    const std::string stem = output_stem(size.image_name);
    if (!out.emplace(stem, size).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate entry for '" +
                        stem + "'");
    }
  }
  return out;
}

std::string serialize_image_sizes(std::span<const Annotation> annotations) {
  std::string out = "image_name,width,height\n";
  for (const auto& a : annotations) {
    out += csv_field(a.image_name()) + ',' + std::to_string(a.image_width()) +
           ',' + std::to_string(a.image_height()) + '\n';
  }
  return out;
}

}  // namespace obb
