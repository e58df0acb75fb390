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
#pragma once

// JSON plumbing shared by every file format: typed access that reports
// failures with the JSON pointer of the offending value, canonical hashing,
// and converters for the annotation types.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geomatch/benchgen.hpp"
#include "geomatch/geoware.hpp"

namespace geomatch {

using Json = nlohmann::json;

/// Read-only view of a JSON value that remembers where it came from.
/// Accessors throw InputError("<origin>: <pointer>: <problem>").
class JsonCursor {
 public:
  JsonCursor(const Json& value, std::string origin, std::string pointer = "")
      : value_(&value), origin_(std::move(origin)), pointer_(std::move(pointer)) {}

  const Json& value() const { return *value_; }
  const std::string& pointer() const { return pointer_; }
  std::string where() const;

  JsonCursor at(const std::string& key) const;
  JsonCursor at(std::size_t index) const;
  std::optional<JsonCursor> find(const std::string& key) const;
  bool has(const std::string& key) const;

  const Json::object_t& object() const;
  std::size_t size() const;  // arrays only

  std::string as_string() const;
  double as_number() const;
  std::int64_t as_int() const;
  std::uint64_t as_uint() const;
  bool as_bool() const;
  std::vector<int> as_int_list() const;
  std::vector<double> as_number_list() const;

  [[noreturn]] void fail(const std::string& problem) const;

 private:
  const Json* value_;
  std::string origin_;
  std::string pointer_;
};

Json read_json_file(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
std::string dump_json(const Json& j);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// 16 hex digits of FNV-1a over the compact canonical (key-sorted) dump.
std::string config_hash(const Json& config);

Json to_json(const KeypointSet& set);
KeypointSet keypoint_set_from_json(const JsonCursor& c);

Json to_json(const SubgroupSchema& schema);
SubgroupSchema schema_from_json(const JsonCursor& c);
/// Every *.json file in the directory, keyed by its category.
SchemaRegistry load_schema_dir(const std::filesystem::path& dir);

/// COCO-style keypoint annotations: images {id, width, height}, annotations
/// {image_id, category_id, keypoints [x, y, v]*, bbox}, categories {id, name
/// (species), supercategory (family)}. v > 0 counts as visible. The instance
/// count of an image is its number of annotations; the first one is used.
AnnotationCorpus corpus_from_coco(const JsonCursor& c);
Json corpus_to_coco(const AnnotationCorpus& corpus);

}  // namespace geomatch
