// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include <json.hpp>
#include <rapidjson/document.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

namespace whatif {

struct SchemaViolation {
  std::string path;  // JSON pointer to the offending value, "" for the root
  std::string message;
};

namespace detail {

inline std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

inline std::string pointer_string(const rapidjson::Pointer& p) {
  rapidjson::StringBuffer buf;
  p.Stringify(buf);
  return buf.GetString();
}

}  // namespace detail

/// Validates `value` against a draft-04 JSON Schema with RapidJSON's
/// validator. Returns the first violation found while streaming the
/// document. A missing required field is reported at the field's own path.
inline std::optional<SchemaViolation> validate_json(const nlohmann::json& value, const nlohmann::json& schema) {
  rapidjson::Document schema_doc;
  schema_doc.Parse(schema.dump().c_str());
  const rapidjson::SchemaDocument compiled(schema_doc);
  rapidjson::Document doc;
  doc.Parse(value.dump().c_str());
  rapidjson::SchemaValidator validator(compiled);
  if (doc.Accept(validator)) return std::nullopt;

  const std::string keyword = validator.GetInvalidSchemaKeyword();
  std::string path = detail::pointer_string(validator.GetInvalidDocumentPointer());
  const auto schema_ptr = nlohmann::json::json_pointer(detail::pointer_string(validator.GetInvalidSchemaPointer()));
  const auto& rule = schema.at(schema_ptr);
  if (keyword == "required") {
    const auto& object = value.at(nlohmann::json::json_pointer(path));
    for (const auto& key : rule.at("required"))
      if (!object.contains(key.get<std::string>()))
        return SchemaViolation{path + "/" + detail::escape_pointer(key.get<std::string>()), "required field missing"};
  }
  std::string message = "fails '" + keyword + "'";
  if (rule.is_object() && rule.contains(keyword)) message += ": " + rule.at(keyword).dump();
  return SchemaViolation{std::move(path), std::move(message)};
}

}  // namespace whatif
