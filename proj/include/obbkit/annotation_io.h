#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obbkit/angle_codec.h"
#include "obbkit/annotation.h"

namespace obb {

// Readers and writers for the supported annotation formats:
//
//   rolabelimg  XML, annotation/size{width,height} and
//               object{name, robndbox{cx, cy, w, h, angle}}, angle in radians.
//   voc         XML, object{name, bndbox{xmin, ymin, xmax, ymax}}.
//   yolo        text, "class_idx cx cy w h [angle_norm]" normalized by the
//               image size; class 0 is Gun, 1 is Pistol; angle_norm = theta/180.
//   csv         image_name,width,height,x1,y1,x2,y2,class,angle_class with one
//               row per object. (x1, y1, x2, y2) is the unrotated box and
//               angle_class is a bin index whose representative angle gives
//               the orientation.
//
// Every reader first produces a RawAnnotation that only reflects syntax, then
// to_annotation() enforces the Annotation invariants.

struct ParseOptions {
  // Unknown class names raise ClassError when strict, otherwise the object is
  // dropped with a warning.
  bool strict = true;
};

struct RawObject {
  std::string class_name;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  // Degrees as stored, not wrapped.
  double theta_deg = 0.0;
  // CSV rows carry a bin index instead of an angle.
  std::optional<long long> angle_class;
};

struct RawAnnotation {
  std::string image_name;
  double image_width = 0.0;
  double image_height = 0.0;
  std::vector<RawObject> objects;
};

// Syntax-level readers. Malformed XML raises ParseError with the line number;
// missing or non-numeric fields raise FieldError naming the object index.
RawAnnotation read_rolabelimg_raw(std::string_view xml);
RawAnnotation read_voc_raw(std::string_view xml);
// Wrong token counts raise ParseError, normalized values outside [0, 1]
// raise RangeError.
RawAnnotation read_yolo_raw(std::string_view text, std::string image_name,
                            int image_width, int image_height,
                            std::vector<std::string>* warnings = nullptr);
// Missing/incorrect header raises FormatError. Rows are grouped by image name
// in order of first appearance.
std::vector<RawAnnotation> read_csv_raw(std::string_view text);

Annotation to_annotation(const RawAnnotation& raw,
                         const ParseOptions& options = {},
                         std::vector<std::string>* warnings = nullptr);

RawAnnotation to_raw(const Annotation& a);

Annotation parse_rolabelimg(std::string_view xml, const ParseOptions& options = {},
                            std::vector<std::string>* warnings = nullptr);
std::string serialize_rolabelimg(const Annotation& a);

Annotation parse_voc_horizontal(std::string_view xml,
                                const ParseOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);
// Each object is written as its envelope.
std::string serialize_voc(const Annotation& a);

Annotation parse_yolo(std::string_view text, std::string image_name,
                      int image_width, int image_height,
                      const ParseOptions& options = {},
                      std::vector<std::string>* warnings = nullptr);
// Always writes six tokens. Throws RangeError if a box cannot be expressed in
// normalized coordinates.
std::string serialize_yolo(const Annotation& a);

inline constexpr std::string_view kCsvHeader =
    "image_name,width,height,x1,y1,x2,y2,class,angle_class";

AnnotationSet parse_csv_records(std::string_view text,
                                const ParseOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);
// Angles are binned with `scheme`; only the bin survives.
std::string serialize_csv_records(std::span<const Annotation> annotations,
                                  AngleScheme scheme = AngleScheme::kModel);

// Sidecar for YOLO directories, which carry no image names or sizes.
inline constexpr std::string_view kImageSizesFile = "image_sizes.csv";

struct ImageSize {
  std::string image_name;
  int width = 0;
  int height = 0;
};

// Header "image_name,width,height". Keyed by the image-name stem, which is
// also the label-file stem.
std::map<std::string, ImageSize> parse_image_sizes(std::string_view text);
std::string serialize_image_sizes(std::span<const Annotation> annotations);

// Stem of the image name, used to name per-image output files.
std::string output_stem(std::string_view image_name);

struct OutputUnit {
  std::string filename;
  std::string contents;

  friend bool operator==(const OutputUnit&, const OutputUnit&) = default;
};

// One unit per image for XML and YOLO (plus the size sidecar for YOLO); a
// single annotations.csv for CSV. An empty set renders nothing. Throws
// FormatError when two images map to the same output file.
std::vector<OutputUnit> render(const AnnotationSet& set, AnnotationFormat target,
                               AngleScheme csv_scheme = AngleScheme::kModel);

// Creates out_dir if needed. Throws IoError when a file cannot be written.
std::vector<std::filesystem::path> write_units(std::span<const OutputUnit> units,
                                               const std::filesystem::path& out_dir);

std::vector<std::filesystem::path> convert(const AnnotationSet& set,
                                           AnnotationFormat target,
                                           const std::filesystem::path& out_dir,
                                           AngleScheme csv_scheme = AngleScheme::kModel);

enum class ViolationKind {
  kParseError,
  kNonPositiveImageSize,
  kNonPositiveBoxSize,
  kNonFiniteValue,
  kOutOfImage,
  kDuplicateImageName,
  kAngleOutOfRange,
  kUnknownClass,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string source;  // file or image name
  std::optional<std::size_t> object_index;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::map<ViolationKind, std::size_t> counts() const;
  // One line per violation followed by per-kind totals.
  std::string to_text() const;
};

ValidationReport validate(std::span<const RawAnnotation> records);
ValidationReport validate(const AnnotationSet& set);

}  // namespace obb
