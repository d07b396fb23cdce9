#pragma once

#include <json.hpp>

#include <ostream>
#include <string>

namespace qqr::detail {

using json = nlohmann::ordered_json;

/// "%.17g", which round-trips every finite double.
std::string format_double(double x);

/// Pretty-prints `doc`; numeric arrays stay on one line and floats use
/// format_double. Non-finite floats are written as null.
void write_json(std::ostream& os, const json& doc);

}  // namespace qqr::detail
