#include "obbkit/annotation.h"

#include <stdexcept>
#include <utility>

#include "obbkit/errors.h"

namespace obb {

std::string_view to_string(AnnotationFormat f) {
  switch (f) {
    case AnnotationFormat::kRoLabelImg:
      return "rolabelimg";
    case AnnotationFormat::kVoc:
      return "voc";
    case AnnotationFormat::kYolo:
      return "yolo";
    case AnnotationFormat::kCsv:
      return "csv";
  }
  return "rolabelimg";
}

std::optional<AnnotationFormat> parse_annotation_format(std::string_view name) {
  if (name == "rolabelimg") return AnnotationFormat::kRoLabelImg;
  if (name == "voc") return AnnotationFormat::kVoc;
  if (name == "yolo") return AnnotationFormat::kYolo;
  if (name == "csv") return AnnotationFormat::kCsv;
  return std::nullopt;
}

bool overlaps_image(const OrientedBox& box, double image_width,
                    double image_height) {
  const HorizontalBox env = envelope(box);
  return env.xmax() > 0.0 && env.xmin() < image_width && env.ymax() > 0.0 &&
         env.ymin() < image_height;
}

Annotation::Annotation(std::string image_name, int image_width,
                       int image_height, std::vector<AnnotatedObject> objects)
    : image_name_(std::move(image_name)),
      image_width_(image_width),
      image_height_(image_height),
      objects_(std::move(objects)) {
  if (image_name_.empty()) {
    throw std::invalid_argument("annotation has an empty image name");
  }
  if (image_width_ <= 0 || image_height_ <= 0) {
    throw std::invalid_argument("image '" + image_name_ +
                                "': width and height must be positive");
  }
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    if (obj.label == WeaponClass::kBackground) {
      throw std::invalid_argument("image '" + image_name_ + "' object " +
                                  std::to_string(i) + ": Background is not an object class");
    }
    if (!overlaps_image(obj.box, image_width_, image_height_)) {
      throw std::invalid_argument("image '" + image_name_ + "' object " +
                                  std::to_string(i) + ": box lies outside the image");
    }
  }
}

void AnnotationSet::add(Annotation a) {
  const auto [it, inserted] = index_.emplace(a.image_name(), annotations_.size());
  if (!inserted) {
    throw InputError("duplicate image name '" + a.image_name() + "'");
  }
  annotations_.push_back(std::move(a));
}

const Annotation* AnnotationSet::find(std::string_view image_name) const {
  const auto it = index_.find(std::string(image_name));
  return it == index_.end() ? nullptr : &annotations_[it->second];
}

std::size_t AnnotationSet::object_count() const noexcept {
  std::size_t n = 0;
  for (const auto& a : annotations_) n += a.objects().size();
  return n;
}

}  // namespace obb
