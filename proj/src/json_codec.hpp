#pragma once

// nlohmann::json codecs shared by the file formats and the experiment
// driver. Schema errors throw ParseError with a location prefix.

#include <string>

#include <json.hpp>

#include "stepsel/errors.hpp"
#include "stepsel/segmenters.hpp"
#include "stepsel/simkit.hpp"

namespace stepsel::detail {

using json = nlohmann::json;

/// Parses text, mapping syntax errors to ParseError with line and column.
json parse_json(const std::string& text, const std::string& what);

/// Typed field access; `where` prefixes error messages.
const json& require(const json& obj, const char* key, const std::string& where);
double get_real(const json& obj, const char* key, const std::string& where);
std::size_t get_count(const json& obj, const char* key, const std::string& where);
std::string get_string(const json& obj, const char* key, const std::string& where);
bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback);
double as_real(const json& v, const std::string& where);
std::size_t as_count(const json& v, const std::string& where);
void check_format(const json& doc, const char* format, const std::string& where);

ExpFamily family_from_json(const json& doc, const std::string& where);
void family_to_json(json& doc, const ExpFamily& fam);

SegmenterSpec segmenter_from_json(const json& obj, const std::string& where);
json segmenter_to_json(const SegmenterSpec& spec);

SignalSpec signal_from_json(const json& doc, const std::string& where);
json signal_to_json(const SignalSpec& spec);

}  // namespace stepsel::detail
