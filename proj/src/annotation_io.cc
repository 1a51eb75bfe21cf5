#include "obbkit/annotation_io.h"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <climits>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unordered_set>
#include <utility>

#include "internal/text.h"
#include "obbkit/errors.h"

namespace obb {
namespace {

namespace ptree = boost::property_tree;
using internal::format_shortest;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string object_prefix(std::size_t index) {
  return "object " + std::to_string(index) + ": ";
}

ptree::ptree load_xml(std::string_view xml) {
  ptree::ptree tree;
  std::istringstream in{std::string(xml)};
  try {
    ptree::read_xml(in, tree);
  } catch (const ptree::xml_parser_error& e) {
    throw ParseError("malformed XML: " + e.message(), e.line());
  }
  return tree;
}

const ptree::ptree& annotation_root(const ptree::ptree& tree) {
  const auto root = tree.get_child_optional("annotation");
  if (!root) throw FieldError("missing <annotation> root element");
  return *root;
}

double number_field(const ptree::ptree& node, const std::string& path,
                    const std::string& prefix) {
  const auto text = node.get_optional<std::string>(path);
  if (!text) throw FieldError(prefix + "missing " + path);
  const auto value = internal::parse_double(*text);
  if (!value) {
    throw FieldError(prefix + path + " is not a number: '" +
                     std::string(internal::trim(*text)) + "'");
  }
  return *value;
}

void read_header(const ptree::ptree& root, RawAnnotation* out) {
  out->image_name =
      std::string(internal::trim(root.get<std::string>("filename", "")));
  out->image_width = number_field(root, "size.width", "");
  out->image_height = number_field(root, "size.height", "");
}

RawObject read_bndbox(const ptree::ptree& box, const std::string& prefix) {
  const double xmin = number_field(box, "xmin", prefix + "bndbox/");
  const double ymin = number_field(box, "ymin", prefix + "bndbox/");
  const double xmax = number_field(box, "xmax", prefix + "bndbox/");
  const double ymax = number_field(box, "ymax", prefix + "bndbox/");
  RawObject obj;
  obj.cx = (xmin + xmax) / 2.0;
  obj.cy = (ymin + ymax) / 2.0;
  obj.w = xmax - xmin;
  obj.h = ymax - ymin;
  obj.theta_deg = 0.0;
  return obj;
}

std::string class_name_of(const ptree::ptree& object, const std::string& prefix) {
  const auto name = object.get_optional<std::string>("name");
  if (!name) throw FieldError(prefix + "missing name");
  return std::string(internal::trim(*name));
}

std::string_view xml_class_name(WeaponClass c) {
  return c == WeaponClass::kGun ? "gun" : "pistol";
}

void write_xml_header(std::ostringstream& out, const Annotation& a) {
  out << "  <filename>" << internal::xml_escape(a.image_name()) << "</filename>\n"
      << "  <size>\n"
      << "    <width>" << a.image_width() << "</width>\n"
      << "    <height>" << a.image_height() << "</height>\n"
      << "    <depth>3</depth>\n"
      << "  </size>\n";
}

int image_dimension(double value, const std::string& what,
                    const std::string& image) {
  if (!std::isfinite(value) || value <= 0.0 || value != std::floor(value) ||
      value > INT_MAX) {
    throw FieldError("image '" + image + "': " + what +
                     " must be a positive integer, got " + format_shortest(value));
  }
  return static_cast<int>(value);
}

}  // namespace

RawAnnotation read_rolabelimg_raw(std::string_view xml) {
  const ptree::ptree tree = load_xml(xml);
  const ptree::ptree& root = annotation_root(tree);
  RawAnnotation out;
  read_header(root, &out);
  std::size_t index = 0;
  for (const auto& [key, object] : root) {
    if (key != "object") continue;
    const std::string prefix = object_prefix(index++);
    const std::string name = class_name_of(object, prefix);
    RawObject obj;
    if (const auto rbox = object.get_child_optional("robndbox")) {
      const std::string p = prefix + "robndbox/";
      obj.cx = number_field(*rbox, "cx", p);
      obj.cy = number_field(*rbox, "cy", p);
      obj.w = number_field(*rbox, "w", p);
      obj.h = number_field(*rbox, "h", p);
      obj.theta_deg = number_field(*rbox, "angle", p) * kRadToDeg;
    } else if (const auto box = object.get_child_optional("bndbox")) {
      // roLabelImg stores plain rectangles drawn without rotation this way.
      obj = read_bndbox(*box, prefix);
    } else {
      throw FieldError(prefix + "missing robndbox");
    }
    obj.class_name = name;
    out.objects.push_back(std::move(obj));
  }
  return out;
}

RawAnnotation read_voc_raw(std::string_view xml) {
  const ptree::ptree tree = load_xml(xml);
  const ptree::ptree& root = annotation_root(tree);
  RawAnnotation out;
  read_header(root, &out);
  std::size_t index = 0;
  for (const auto& [key, object] : root) {
    if (key != "object") continue;
    const std::string prefix = object_prefix(index++);
    const std::string name = class_name_of(object, prefix);
    const auto box = object.get_child_optional("bndbox");
    if (!box) throw FieldError(prefix + "missing bndbox");
    RawObject obj = read_bndbox(*box, prefix);
    obj.class_name = name;
    out.objects.push_back(std::move(obj));
  }
  return out;
}

RawAnnotation read_yolo_raw(std::string_view text, std::string image_name,
                            int image_width, int image_height,
                            std::vector<std::string>* warnings) {
  if (image_width <= 0 || image_height <= 0) {
    throw RangeError("YOLO labels need a positive image size for '" +
                     image_name + "'");
  }
  RawAnnotation out;
  out.image_name = std::move(image_name);
  out.image_width = image_width;
  out.image_height = image_height;
  const auto lines = internal::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    const auto tokens = internal::split_whitespace(lines[ln]);
    if (tokens.empty()) continue;
    if (tokens.size() != 5 && tokens.size() != 6) {
      throw ParseError("expected 5 or 6 tokens, found " +
                           std::to_string(tokens.size()),
                       line_no);
    }
    const auto cls = internal::parse_integer(tokens[0]);
    if (!cls) {
      throw ParseError("class index is not an integer: '" +
                           std::string(tokens[0]) + "'",
                       line_no);
    }
    double values[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto v = internal::parse_double(tokens[i]);
      if (!v) {
        throw ParseError("not a number: '" + std::string(tokens[i]) + "'",
                         line_no);
      }
      if (!(*v >= 0.0 && *v <= 1.0)) {
        throw RangeError("line " + std::to_string(line_no) + ": value " +
                         std::string(tokens[i]) + " outside [0, 1]");
      }
      values[i - 1] = *v;
    }
    RawObject obj;
    obj.class_name = *cls == 0   ? "gun"
                     : *cls == 1 ? "pistol"
                                 : std::string(tokens[0]);
    obj.cx = values[0] * image_width;
    obj.cy = values[1] * image_height;
    obj.w = values[2] * image_width;
    obj.h = values[3] * image_height;
    if (tokens.size() == 6) {
      const DecodedAngle angle = decode_angle_regression(values[4]);
      if (angle.wrapped && warnings) {
        warnings->push_back("line " + std::to_string(line_no) +
                            ": angle_norm wrapped into [0, 1)");
      }
      obj.theta_deg = angle.degrees;
    }
    out.objects.push_back(std::move(obj));
  }
  return out;
}

Annotation to_annotation(const RawAnnotation& raw, const ParseOptions& options,
                         std::vector<std::string>* warnings) {
  if (raw.image_name.empty()) throw FieldError("missing image name");
  const int width = image_dimension(raw.image_width, "width", raw.image_name);
  const int height = image_dimension(raw.image_height, "height", raw.image_name);
  const std::string where = "image '" + raw.image_name + "' ";

  std::vector<AnnotatedObject> objects;
  objects.reserve(raw.objects.size());
  for (std::size_t i = 0; i < raw.objects.size(); ++i) {
    const RawObject& obj = raw.objects[i];
    const auto label = parse_object_class(obj.class_name);
    if (!label) {
      const std::string msg =
          where + object_prefix(i) + "unknown class '" + obj.class_name + "'";
      if (options.strict) throw ClassError(msg);
      if (warnings) warnings->push_back(msg + " (skipped)");
      continue;
    }
    if (!(obj.w > 0.0) || !(obj.h > 0.0)) {
      throw FieldError(where + object_prefix(i) + "box width and height must be > 0 (got " +
                       format_shortest(obj.w) + "x" + format_shortest(obj.h) + ")");
    }
    double theta = obj.theta_deg;
    if (obj.angle_class) {
      if (*obj.angle_class < 0 || *obj.angle_class >= kNumAngleClasses) {
        throw RangeError(where + object_prefix(i) + "angle_class " +
                         std::to_string(*obj.angle_class) + " outside 0..7");
      }
      theta = representative_angle(
          AngleClass(AngleScheme::kModel, static_cast<int>(*obj.angle_class)));
    }
    try {
      OrientedBox box(obj.cx, obj.cy, obj.w, obj.h, theta);
      if (!overlaps_image(box, width, height)) {
        throw FieldError(where + object_prefix(i) + "box lies outside the image");
      }
      objects.push_back({*label, box});
    } catch (const std::invalid_argument& e) {
      throw FieldError(where + object_prefix(i) + e.what());
    }
  }
  return Annotation(raw.image_name, width, height, std::move(objects));
}

RawAnnotation to_raw(const Annotation& a) {
  RawAnnotation raw;
  raw.image_name = a.image_name();
  raw.image_width = a.image_width();
  raw.image_height = a.image_height();
  for (const auto& obj : a.objects()) {
    RawObject r;
    r.class_name = std::string(to_string(obj.label));
    r.cx = obj.box.cx();
    r.cy = obj.box.cy();
    r.w = obj.box.w();
    r.h = obj.box.h();
    r.theta_deg = obj.box.theta();
    raw.objects.push_back(std::move(r));
  }
  return raw;
}

Annotation parse_rolabelimg(std::string_view xml, const ParseOptions& options,
                            std::vector<std::string>* warnings) {
  return to_annotation(read_rolabelimg_raw(xml), options, warnings);
}

std::string serialize_rolabelimg(const Annotation& a) {
  std::ostringstream out;
  out << "<annotation verified=\"yes\">\n";
  write_xml_header(out, a);
  for (const auto& obj : a.objects()) {
    const double angle_rad = obj.box.theta() * kDegToRad;
    out << "  <object>\n"
        << "    <type>robndbox</type>\n"
        << "    <name>" << xml_class_name(obj.label) << "</name>\n"
        << "    <pose>Unspecified</pose>\n"
        << "    <truncated>0</truncated>\n"
        << "    <difficult>0</difficult>\n"
        << "    <robndbox>\n"
        << "      <cx>" << format_shortest(obj.box.cx()) << "</cx>\n"
        << "      <cy>" << format_shortest(obj.box.cy()) << "</cy>\n"
        << "      <w>" << format_shortest(obj.box.w()) << "</w>\n"
        << "      <h>" << format_shortest(obj.box.h()) << "</h>\n"
        << "      <angle>" << internal::format_significant(angle_rad, 9)
        << "</angle>\n"
        << "    </robndbox>\n"
        << "  </object>\n";
  }
  out << "</annotation>\n";
  return out.str();
}

Annotation parse_voc_horizontal(std::string_view xml,
                                const ParseOptions& options,
                                std::vector<std::string>* warnings) {
  return to_annotation(read_voc_raw(xml), options, warnings);
}

std::string serialize_voc(const Annotation& a) {
  std::ostringstream out;
  out << "<annotation>\n";
  write_xml_header(out, a);
  for (const auto& obj : a.objects()) {
    const HorizontalBox env = envelope(obj.box);
    out << "  <object>\n"
        << "    <name>" << xml_class_name(obj.label) << "</name>\n"
        << "    <pose>Unspecified</pose>\n"
        << "    <truncated>0</truncated>\n"
        << "    <difficult>0</difficult>\n"
        << "    <bndbox>\n"
        << "      <xmin>" << format_shortest(env.xmin()) << "</xmin>\n"
        << "      <ymin>" << format_shortest(env.ymin()) << "</ymin>\n"
        << "      <xmax>" << format_shortest(env.xmax()) << "</xmax>\n"
        << "      <ymax>" << format_shortest(env.ymax()) << "</ymax>\n"
        << "    </bndbox>\n"
        << "  </object>\n";
  }
  out << "</annotation>\n";
  return out.str();
}

Annotation parse_yolo(std::string_view text, std::string image_name,
                      int image_width, int image_height,
                      const ParseOptions& options,
                      std::vector<std::string>* warnings) {
  return to_annotation(read_yolo_raw(text, std::move(image_name), image_width,
                                     image_height, warnings),
                       options, warnings);
}

std::string serialize_yolo(const Annotation& a) {
  std::string out;
  const double iw = a.image_width();
  const double ih = a.image_height();
  for (std::size_t i = 0; i < a.objects().size(); ++i) {
    const auto& obj = a.objects()[i];
    const double values[4] = {obj.box.cx() / iw, obj.box.cy() / ih,
                              obj.box.w() / iw, obj.box.h() / ih};
    for (double v : values) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw RangeError("image '" + a.image_name() + "' " + object_prefix(i) +
                         "box does not fit YOLO normalized coordinates");
      }
    }
    out += obj.label == WeaponClass::kGun ? "0" : "1";
    for (double v : values) {
      out += ' ';
      out += format_shortest(v);
    }
    out += ' ';
    out += format_shortest(encode_angle_regression(obj.box.theta()));
    out += '\n';
  }
  return out;
}

std::string output_stem(std::string_view image_name) {
  const std::filesystem::path p{std::string(image_name)};
  std::string stem = p.filename().stem().string();
  return stem.empty() ? std::string(image_name) : stem;
}

std::vector<OutputUnit> render(const AnnotationSet& set, AnnotationFormat target,
                               AngleScheme csv_scheme) {
  std::vector<OutputUnit> units;
  if (set.empty()) return units;
  if (target == AnnotationFormat::kCsv) {
    units.push_back({"annotations.csv",
                     serialize_csv_records(set.annotations(), csv_scheme)});
    return units;
  }
  std::set<std::string> names;
  for (const auto& a : set.annotations()) {
    OutputUnit unit;
    switch (target) {
      case AnnotationFormat::kRoLabelImg:
        unit = {output_stem(a.image_name()) + ".xml", serialize_rolabelimg(a)};
        break;
      case AnnotationFormat::kVoc:
        unit = {output_stem(a.image_name()) + ".xml", serialize_voc(a)};
        break;
      case AnnotationFormat::kYolo:
        unit = {output_stem(a.image_name()) + ".txt", serialize_yolo(a)};
        break;
      case AnnotationFormat::kCsv:
        break;
    }
    if (!names.insert(unit.filename).second) {
      throw FormatError("images '" + a.image_name() +
                        "' and another image both map to " + unit.filename);
    }
    units.push_back(std::move(unit));
  }
  if (target == AnnotationFormat::kYolo) {
    units.push_back({std::string(kImageSizesFile),
                     serialize_image_sizes(set.annotations())});
  }
  return units;
}

std::vector<std::filesystem::path> write_units(std::span<const OutputUnit> units,
                                               const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  if (units.empty()) return written;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  }
  for (const auto& unit : units) {
    const auto path = out_dir / unit.filename;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << unit.contents;
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

std::vector<std::filesystem::path> convert(const AnnotationSet& set,
                                           AnnotationFormat target,
                                           const std::filesystem::path& out_dir,
                                           AngleScheme csv_scheme) {
  const auto units = render(set, target, csv_scheme);
  return write_units(units, out_dir);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kParseError:
      return "parse_error";
    case ViolationKind::kNonPositiveImageSize:
      return "non_positive_image_size";
    case ViolationKind::kNonPositiveBoxSize:
      return "non_positive_box_size";
    case ViolationKind::kNonFiniteValue:
      return "non_finite_value";
    case ViolationKind::kOutOfImage:
      return "out_of_image";
    case ViolationKind::kDuplicateImageName:
      return "duplicate_image_name";
    case ViolationKind::kAngleOutOfRange:
      return "angle_out_of_range";
    case ViolationKind::kUnknownClass:
      return "unknown_class";
  }
  return "parse_error";
}

std::map<ViolationKind, std::size_t> ValidationReport::counts() const {
  std::map<ViolationKind, std::size_t> out;
  for (const auto& v : violations) ++out[v.kind];
  return out;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << to_string(v.kind) << ' ' << v.source;
    if (v.object_index) out << " object " << *v.object_index;
    out << ": " << v.message << '\n';
  }
  for (const auto& [kind, n] : counts()) {
    out << "total " << to_string(kind) << ": " << n << '\n';
  }
  out << "violations: " << violations.size() << '\n';
  return out.str();
}

ValidationReport validate(std::span<const RawAnnotation> records) {
  ValidationReport report;
  auto add = [&report](ViolationKind kind, const std::string& source,
                       std::optional<std::size_t> object, std::string message) {
    report.violations.push_back({kind, source, object, std::move(message)});
  };

  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    const std::string& src = rec.image_name;
    if (rec.image_name.empty()) {
      add(ViolationKind::kParseError, "<unnamed>", std::nullopt, "missing image name");
    } else if (!seen.insert(rec.image_name).second) {
      add(ViolationKind::kDuplicateImageName, src, std::nullopt,
          "image name appears more than once");
    }

    bool size_ok = true;
    if (!std::isfinite(rec.image_width) || !std::isfinite(rec.image_height)) {
      add(ViolationKind::kNonFiniteValue, src, std::nullopt, "image size is not finite");
      size_ok = false;
    } else if (rec.image_width <= 0.0 || rec.image_height <= 0.0) {
      add(ViolationKind::kNonPositiveImageSize, src, std::nullopt,
          "image size " + format_shortest(rec.image_width) + "x" +
              format_shortest(rec.image_height));
      size_ok = false;
    }

    for (std::size_t i = 0; i < rec.objects.size(); ++i) {
      const RawObject& obj = rec.objects[i];
      if (!parse_object_class(obj.class_name)) {
        add(ViolationKind::kUnknownClass, src, i, "class '" + obj.class_name + "'");
      }
      const bool angle_from_class = obj.angle_class.has_value();
      if (!std::isfinite(obj.cx) || !std::isfinite(obj.cy) ||
          !std::isfinite(obj.w) || !std::isfinite(obj.h) ||
          (!angle_from_class && !std::isfinite(obj.theta_deg))) {
        add(ViolationKind::kNonFiniteValue, src, i, "non-finite box field");
        continue;
      }
      bool angle_ok = true;
      if (angle_from_class) {
        if (*obj.angle_class < 0 || *obj.angle_class >= kNumAngleClasses) {
          add(ViolationKind::kAngleOutOfRange, src, i,
              "angle_class " + std::to_string(*obj.angle_class) + " outside 0..7");
          angle_ok = false;
        }
      } else if (obj.theta_deg < 0.0 || obj.theta_deg >= 180.0) {
        add(ViolationKind::kAngleOutOfRange, src, i,
            "angle " + format_shortest(obj.theta_deg) + " deg outside [0, 180)");
      }
      if (obj.w <= 0.0 || obj.h <= 0.0) {
        add(ViolationKind::kNonPositiveBoxSize, src, i,
            "box size " + format_shortest(obj.w) + "x" + format_shortest(obj.h));
        continue;
      }
      if (!size_ok) continue;
      const double theta =
          angle_from_class
              ? (angle_ok ? static_cast<double>(*obj.angle_class) * kAngleClassWidthDeg : 0.0)
              : obj.theta_deg;
      const OrientedBox box(obj.cx, obj.cy, obj.w, obj.h, theta);
      if (!overlaps_image(box, rec.image_width, rec.image_height)) {
        add(ViolationKind::kOutOfImage, src, i, "box envelope does not overlap the image");
      }
    }
  }
  return report;
}

ValidationReport validate(const AnnotationSet& set) {
  std::vector<RawAnnotation> raw;
  raw.reserve(set.size());
  for (const auto& a : set.annotations()) raw.push_back(to_raw(a));
  return validate(raw);
}

}  // namespace obb
