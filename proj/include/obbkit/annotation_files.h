#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "obbkit/annotation.h"
#include "obbkit/annotation_io.h"

namespace obb {

struct LoadOptions {
  ParseOptions parse;
  // Fallback image size for YOLO label files missing from image_sizes.csv.
  std::optional<int> default_width;
  std::optional<int> default_height;
  // Files are read concurrently on up to this many threads; results are
  // always returned in sorted path order.
  unsigned jobs = 1;
};

struct LoadedFile {
  std::filesystem::path path;
  // Syntax-level records, present whenever the file could be read.
  std::vector<RawAnnotation> records;
  // Typed annotations, present only when `error` is empty.
  std::vector<Annotation> annotations;
  std::vector<std::string> warnings;
  std::string error;

  bool ok() const noexcept { return error.empty(); }
};

// Throws IoError when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

// A single file is returned as is. A directory yields its files with the
// format's extension (.xml, .txt or .csv), sorted, excluding image_sizes.csv.
// Throws IoError if `input` does not exist.
std::vector<std::filesystem::path> list_annotation_files(
    const std::filesystem::path& input, AnnotationFormat format);

std::vector<LoadedFile> load_annotation_files(const std::filesystem::path& input,
                                              AnnotationFormat format,
                                              const LoadOptions& options = {});

// All-or-nothing load: the first failing file raises its error, prefixed with
// the file path. Duplicate image names raise InputError.
AnnotationSet load_annotation_set(const std::filesystem::path& input,
                                  AnnotationFormat format,
                                  const LoadOptions& options = {});

}  // namespace obb
