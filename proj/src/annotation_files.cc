#include "obbkit/annotation_files.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "internal/text.h"
#include "obbkit/errors.h"

namespace obb {
namespace {

namespace fs = std::filesystem;

std::string_view extension_for(AnnotationFormat format) {
  switch (format) {
    case AnnotationFormat::kRoLabelImg:
    case AnnotationFormat::kVoc:
      return ".xml";
    case AnnotationFormat::kYolo:
      return ".txt";
    case AnnotationFormat::kCsv:
      return ".csv";
  }
  return ".xml";
}

std::vector<RawAnnotation> read_records(const fs::path& path,
                                        AnnotationFormat format,
                                        const std::map<std::string, ImageSize>& sizes,
                                        const LoadOptions& options,
                                        std::vector<std::string>* warnings) {
  const std::string text = read_text_file(path);
  switch (format) {
    case AnnotationFormat::kRoLabelImg:
    case AnnotationFormat::kVoc: {
      RawAnnotation rec = format == AnnotationFormat::kVoc
                              ? read_voc_raw(text)
                              : read_rolabelimg_raw(text);
      if (rec.image_name.empty()) rec.image_name = path.stem().string();
      return {std::move(rec)};
    }
    case AnnotationFormat::kYolo: {
      const std::string stem = path.stem().string();
      const auto it = sizes.find(stem);
      if (it != sizes.end()) {
        return {read_yolo_raw(text, it->second.image_name, it->second.width,
                              it->second.height, warnings)};
      }
      if (options.default_width && options.default_height) {
        return {read_yolo_raw(text, stem, *options.default_width,
                              *options.default_height, warnings)};
      }
      throw FieldError("no image size for '" + stem + "' (add it to " +
                       std::string(kImageSizesFile) + " or pass a default size)");
    }
    case AnnotationFormat::kCsv:
      return read_csv_raw(text);
  }
  return {};
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}

std::vector<fs::path> list_annotation_files(const fs::path& input,
                                            AnnotationFormat format) {
  std::error_code ec;
  if (!fs::exists(input, ec)) throw IoError(input.string() + " does not exist");
  if (!fs::is_directory(input, ec)) return {input};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input, ec)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() != extension_for(format)) continue;
    if (p.filename() == kImageSizesFile) continue;
    files.push_back(p);
  }
  if (ec) throw IoError("cannot list " + input.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<LoadedFile> load_annotation_files(const fs::path& input,
                                              AnnotationFormat format,
                                              const LoadOptions& options) {
  const auto paths = list_annotation_files(input, format);

  std::map<std::string, ImageSize> sizes;
  if (format == AnnotationFormat::kYolo) {
    const fs::path dir = fs::is_directory(input) ? input : input.parent_path();
    const fs::path sidecar = dir / kImageSizesFile;
    if (fs::exists(sidecar)) sizes = parse_image_sizes(read_text_file(sidecar));
  }

  std::vector<LoadedFile> out(paths.size());
  internal::parallel_for(paths.size(), options.jobs, [&](std::size_t i) {
    LoadedFile& file = out[i];
    file.path = paths[i];
    try {
      file.records = read_records(paths[i], format, sizes, options, &file.warnings);
      for (const auto& rec : file.records) {
        file.annotations.push_back(
            to_annotation(rec, options.parse, &file.warnings));
      }
    } catch (const std::exception& e) {
      file.annotations.clear();
      file.error = e.what();
    }
  });
  return out;
}

AnnotationSet load_annotation_set(const fs::path& input, AnnotationFormat format,
                                  const LoadOptions& options) {
  AnnotationSet set(format);
  for (auto& file : load_annotation_files(input, format, options)) {
    if (!file.ok()) throw InputError(file.path.string() + ": " + file.error);
    for (auto& a : file.annotations) set.add(std::move(a));
  }
  return set;
}

}  // namespace obb
