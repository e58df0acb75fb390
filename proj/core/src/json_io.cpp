/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "geomatch/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "geomatch/error.hpp"
#include "geomatch/rng.hpp"

namespace geomatch {

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~') {
      out += "~0";
    } else if (ch == '/') {
      out += "~1";
    } else {
      out += ch;
    }
  }
  return out;
}

const char* type_name(const Json& j) { return j.type_name(); }

// COCO ids may be numbers or strings.
std::string id_string(const JsonCursor& c) {
  const Json& v = c.value();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  c.fail("expected a string or integer id, found " + std::string(type_name(v)));
}

}  // namespace

std::string JsonCursor::where() const {
  return origin_ + ": " + (pointer_.empty() ? std::string("(root)") : pointer_);
}

void JsonCursor::fail(const std::string& problem) const {
  throw InputError(where() + ": " + problem);
}

JsonCursor JsonCursor::at(const std::string& key) const {
  if (!value_->is_object()) fail("expected an object, found " + std::string(type_name(*value_)));
  auto it = value_->find(key);
  if (it == value_->end()) fail("missing required key \"" + key + "\"");
  return {*it, origin_, pointer_ + "/" + escape_token(key)};
}

JsonCursor JsonCursor::at(std::size_t index) const {
  if (!value_->is_array()) fail("expected an array, found " + std::string(type_name(*value_)));
  if (index >= value_->size()) fail("index " + std::to_string(index) + " out of range");
  return {(*value_)[index], origin_, pointer_ + "/" + std::to_string(index)};
}

std::optional<JsonCursor> JsonCursor::find(const std::string& key) const {
  if (!value_->is_object()) fail("expected an object, found " + std::string(type_name(*value_)));
  auto it = value_->find(key);
  if (it == value_->end() || it->is_null()) return std::nullopt;
  return JsonCursor(*it, origin_, pointer_ + "/" + escape_token(key));
}

bool JsonCursor::has(const std::string& key) const { return find(key).has_value(); }

const Json::object_t& JsonCursor::object() const {
  if (!value_->is_object()) fail("expected an object, found " + std::string(type_name(*value_)));
  return value_->get_ref<const Json::object_t&>();
}

std::size_t JsonCursor::size() const {
  if (!value_->is_array()) fail("expected an array, found " + std::string(type_name(*value_)));
  return value_->size();
}

std::string JsonCursor::as_string() const {
  if (!value_->is_string()) fail("expected a string, found " + std::string(type_name(*value_)));
  return value_->get<std::string>();
}

double JsonCursor::as_number() const {
  if (!value_->is_number()) fail("expected a number, found " + std::string(type_name(*value_)));
  return value_->get<double>();
}

std::int64_t JsonCursor::as_int() const {
  if (value_->is_number_integer()) return value_->get<std::int64_t>();
  if (value_->is_number_float()) {
    const double d = value_->get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  fail("expected an integer, found " + std::string(type_name(*value_)));
}

std::uint64_t JsonCursor::as_uint() const {
  if (value_->is_number_unsigned()) return value_->get<std::uint64_t>();
  const auto v = as_int();
  if (v < 0) fail("expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

bool JsonCursor::as_bool() const {
  if (!value_->is_boolean()) fail("expected a boolean, found " + std::string(type_name(*value_)));
  return value_->get<bool>();
}

std::vector<int> JsonCursor::as_int_list() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto v = at(i).as_int();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      at(i).fail("integer out of range");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> JsonCursor::as_number_list() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).as_number());
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, dump_json(j));
}

std::string config_hash(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

Json to_json(const KeypointSet& set) {
  Json j;
  j["image"] = {{"width", set.image.width}, {"height", set.image.height}};
  if (set.bbox) j["bbox"] = {set.bbox->x, set.bbox->y, set.bbox->w, set.bbox->h};
  Json kps = Json::array();
  for (const auto& k : set.points) {
    kps.push_back({k.position.x, k.position.y, k.visible ? 1 : 0});
  }
  j["keypoints"] = std::move(kps);
  return j;
}

KeypointSet keypoint_set_from_json(const JsonCursor& c) {
  KeypointSet set;
  const auto image = c.at("image");
  set.image.width = static_cast<int>(image.at("width").as_int());
  set.image.height = static_cast<int>(image.at("height").as_int());
  if (auto bbox = c.find("bbox")) {
    if (bbox->size() != 4) bbox->fail("bbox must be [x, y, w, h]");
    set.bbox = BoundingBox{bbox->at(0).as_number(), bbox->at(1).as_number(),
                           bbox->at(2).as_number(), bbox->at(3).as_number()};
  }
  const auto kps = c.at("keypoints");
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const auto k = kps.at(i);
    if (k.size() != 3) k.fail("keypoint must be [x, y, visibility]");
    set.points.push_back({{k.at(0).as_number(), k.at(1).as_number()},
                          k.at(2).as_number() > 0.0});
  }
  try {
    set.validate();
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return set;
}

Json to_json(const SubgroupSchema& schema) {
  Json groups = Json::object();
  for (const auto& [name, members] : schema.subgroups()) groups[name] = members;
  return {{"category", schema.category()},
          {"subgroups", std::move(groups)},
          {"flip_map", schema.flip_map()}};
}

SubgroupSchema schema_from_json(const JsonCursor& c) {
  std::map<std::string, std::vector<int>> groups;
  for (const auto& [name, value] : c.at("subgroups").object()) {
    groups[name] = c.at("subgroups").at(name).as_int_list();
  }
  try {
    return SubgroupSchema(c.at("category").as_string(), std::move(groups),
                          c.at("flip_map").as_int_list());
  } catch (const ArgumentError& e) {
    c.fail(e.what());
  }
}

SchemaRegistry load_schema_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw InputError("schema directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  SchemaRegistry registry;
  for (const auto& f : files) {
    const Json j = read_json_file(f);
    SubgroupSchema s = schema_from_json(JsonCursor(j, f.string()));
    const std::string name = s.category();
    if (!registry.emplace(name, std::move(s)).second) {
      throw InputError(f.string() + ": duplicate schema for category \"" + name + "\"");
    }
  }
  return registry;
}

AnnotationCorpus corpus_from_coco(const JsonCursor& c) {
  struct Category {
    std::string species;
    std::string family;
  };
  std::map<std::string, Category> categories;
  const auto cats = c.at("categories");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const auto cat = cats.at(i);
    const auto family = cat.find("supercategory");
    categories[id_string(cat.at("id"))] = {cat.at("name").as_string(),
                                           family ? family->as_string() : std::string()};
  }

  struct ImageInfo {
    ImageSize size;
    std::optional<JsonCursor> first;
    int count = 0;
  };
  std::map<std::string, ImageInfo> images;
  std::vector<std::string> order;
  const auto imgs = c.at("images");
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const auto img = imgs.at(i);
    const std::string id = id_string(img.at("id"));
    ImageInfo info;
    info.size = {static_cast<int>(img.at("width").as_int()),
                 static_cast<int>(img.at("height").as_int())};
    if (!images.emplace(id, info).second) img.at("id").fail("duplicate image id " + id);
    order.push_back(id);
  }
  const auto anns = c.at("annotations");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const auto ann = anns.at(i);
    const std::string image_id = id_string(ann.at("image_id"));
    auto it = images.find(image_id);
    if (it == images.end()) ann.at("image_id").fail("unknown image id " + image_id);
    if (++it->second.count == 1) it->second.first = ann;
  }

  AnnotationCorpus corpus;
  std::sort(order.begin(), order.end());
  for (const auto& id : order) {
    const ImageInfo& info = images.at(id);
    if (!info.first) continue;  // unannotated image
    const JsonCursor& ann = *info.first;
    const std::string cat_id = id_string(ann.at("category_id"));
    auto cat = categories.find(cat_id);
    if (cat == categories.end()) ann.at("category_id").fail("unknown category id " + cat_id);
    CorpusImage image;
    image.id = id;
    image.species = cat->second.species;
    image.family = cat->second.family;
    image.instance_count = info.count;
    image.keypoints.image = info.size;
    const auto flat = ann.at("keypoints").as_number_list();
    if (flat.size() % 3 != 0) ann.at("keypoints").fail("length is not a multiple of 3");
    for (std::size_t k = 0; k < flat.size(); k += 3) {
      image.keypoints.points.push_back({{flat[k], flat[k + 1]}, flat[k + 2] > 0.0});
    }
    if (auto bbox = ann.find("bbox")) {
      const auto b = bbox->as_number_list();
      if (b.size() != 4) bbox->fail("bbox must be [x, y, w, h]");
      image.keypoints.bbox = BoundingBox{b[0], b[1], b[2], b[3]};
    }
    try {
      image.keypoints.validate();
    } catch (const Error& e) {
      ann.fail(e.what());
    }
    corpus.images.push_back(std::move(image));
  }
  try {
    corpus.validate();
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return corpus;
}

Json corpus_to_coco(const AnnotationCorpus& corpus) {
  std::map<std::string, std::string> family_of;
  for (const auto& img : corpus.images) family_of[img.species] = img.family;
  std::map<std::string, int> cat_id;
  Json categories = Json::array();
  for (const auto& [species, family] : family_of) {
    const int id = static_cast<int>(cat_id.size()) + 1;
    cat_id[species] = id;
    categories.push_back({{"id", id}, {"name", species}, {"supercategory", family}});
  }
  Json images = Json::array();
  Json annotations = Json::array();
  int ann_id = 0;
  for (const auto& img : corpus.images) {
    images.push_back({{"id", img.id},
                      {"width", img.keypoints.image.width},
                      {"height", img.keypoints.image.height}});
    Json flat = Json::array();
    for (const auto& k : img.keypoints.points) {
      flat.push_back(k.position.x);
      flat.push_back(k.position.y);
      flat.push_back(k.visible ? 2 : 0);
    }
    for (int n = 0; n < img.instance_count; ++n) {
      Json ann = {{"id", ++ann_id},
                  {"image_id", img.id},
                  {"category_id", cat_id.at(img.species)},
                  {"keypoints", flat}};
      if (img.keypoints.bbox) {
        const auto& b = *img.keypoints.bbox;
        ann["bbox"] = {b.x, b.y, b.w, b.h};
      }
      annotations.push_back(std::move(ann));
    }
  }
  return {{"images", std::move(images)},
          {"annotations", std::move(annotations)},
          {"categories", std::move(categories)}};
}

}  // namespace geomatch
