#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "obbkit/geometry.h"
#include "obbkit/weapon_class.h"

namespace obb {

enum class AnnotationFormat { kRoLabelImg, kVoc, kYolo, kCsv };

// "rolabelimg", "voc", "yolo", "csv".
std::string_view to_string(AnnotationFormat f);
std::optional<AnnotationFormat> parse_annotation_format(std::string_view name);

struct AnnotatedObject {
  WeaponClass label;
  OrientedBox box;

  friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) = default;
};

// Ground truth for one image.
// Invariants: non-empty name, positive image size, every object is Gun or
// Pistol and its envelope overlaps the image rectangle.
class Annotation {
 public:
  // Throws std::invalid_argument (naming the object index) on violation.
  Annotation(std::string image_name, int image_width, int image_height,
             std::vector<AnnotatedObject> objects);

  const std::string& image_name() const noexcept { return image_name_; }
  int image_width() const noexcept { return image_width_; }
  int image_height() const noexcept { return image_height_; }
  const std::vector<AnnotatedObject>& objects() const noexcept { return objects_; }

  friend bool operator==(const Annotation&, const Annotation&) = default;

 private:
  std::string image_name_;
  int image_width_;
  int image_height_;
  std::vector<AnnotatedObject> objects_;
};

// True when the box envelope overlaps [0, width] x [0, height] with positive
// area.
bool overlaps_image(const OrientedBox& box, double image_width,
                    double image_height);

// Annotations with unique image names, in insertion order.
class AnnotationSet {
 public:
  explicit AnnotationSet(AnnotationFormat source_format = AnnotationFormat::kRoLabelImg)
      : source_format_(source_format) {}

  // Throws InputError if the image name is already present.
  void add(Annotation a);

  const std::vector<Annotation>& annotations() const noexcept { return annotations_; }
  const Annotation* find(std::string_view image_name) const;
  AnnotationFormat source_format() const noexcept { return source_format_; }
  std::size_t size() const noexcept { return annotations_.size(); }
  bool empty() const noexcept { return annotations_.empty(); }
  std::size_t object_count() const noexcept;

 private:
  AnnotationFormat source_format_;
  std::vector<Annotation> annotations_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace obb
