#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "internal/text.h"
#include "obbkit/errors.h"
#include "obbkit/evaluation.h"

namespace obb {
namespace {

using nlohmann::json;

double number_member(const json& rec, const char* key, std::size_t line_no) {
  const auto it = rec.find(key);
  if (it == rec.end()) throw ParseError(std::string("missing field '") + key + "'", line_no);
  if (!it->is_number()) {
    throw ParseError(std::string("field '") + key + "' is not a number", line_no);
  }
  return it->get<double>();
}

std::string string_member(const json& rec, const char* key, std::size_t line_no) {
  const auto it = rec.find(key);
  if (it == rec.end()) throw ParseError(std::string("missing field '") + key + "'", line_no);
  if (!it->is_string()) {
    throw ParseError(std::string("field '") + key + "' is not a string", line_no);
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<Detection> read_detections_jsonl(std::istream& in) {
  std::vector<Detection> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!rec.is_object()) throw ParseError("expected a JSON object", line_no);
    const std::string name = string_member(rec, "image_name", line_no);
    const std::string cls = string_member(rec, "class", line_no);
    const auto label = parse_object_class(cls);
    if (!label) throw ParseError("unknown class '" + cls + "'", line_no);
    const double score = number_member(rec, "score", line_no);
    const double cx = number_member(rec, "cx", line_no);
    const double cy = number_member(rec, "cy", line_no);
    const double w = number_member(rec, "w", line_no);
    const double h = number_member(rec, "h", line_no);
    const double theta = number_member(rec, "theta_deg", line_no);
    try {
      out.emplace_back(name, *label, score, OrientedBox(cx, cy, w, h, theta));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (in.bad()) throw IoError("error while reading detections");
  return out;
}

std::vector<Detection> read_detections_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return read_detections_jsonl(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_detections_jsonl(std::ostream& out, std::span<const Detection> dets) {
  for (const auto& d : dets) {
    nlohmann::ordered_json rec;
    rec["image_name"] = d.image_name();
    rec["class"] = std::string(to_string(d.label()));
    rec["score"] = d.score();
    rec["cx"] = d.box().cx();
    rec["cy"] = d.box().cy();
    rec["w"] = d.box().w();
    rec["h"] = d.box().h();
    rec["theta_deg"] = d.box().theta();
    out << rec.dump() << '\n';
  }
}

}  // namespace obb
