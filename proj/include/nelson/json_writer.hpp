#pragma once

#include "json.hpp"

#include <string>

namespace nelson {

using Json = nlohmann::ordered_json;

/// Pretty-prints with every double at 17 significant digits so values
/// round-trip exactly. Non-finite doubles become null; the caller records
/// what they meant (e.g. an infinite truncation bound sets radius_exceeded).
std::string dump_json(const Json& value, int indent = 2);

}  // namespace nelson
