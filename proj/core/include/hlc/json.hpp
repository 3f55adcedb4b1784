#pragma once

#include <nlohmann/json.hpp>

namespace hlc {

/// Insertion-ordered JSON so emitted records keep their documented field order.
using Json = nlohmann::ordered_json;

}  // namespace hlc
