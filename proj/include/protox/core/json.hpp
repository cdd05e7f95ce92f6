#pragma once

#include <json.hpp>

namespace protox {
using Json = nlohmann::json;
}
