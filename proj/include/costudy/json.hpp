#pragma once

#include <json.hpp>

namespace costudy {

// Insertion-ordered so that serialized events keep their field order byte for byte.
using Json = nlohmann::ordered_json;

} // namespace costudy
