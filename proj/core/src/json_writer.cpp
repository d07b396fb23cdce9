#include "json_writer.hpp"

#include <cmath>
#include <cstdio>

namespace qqr::detail {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

bool is_flat(const json& j) {
  for (const auto& e : j) {
    if (e.is_structured()) return false;
  }
  return true;
}

void write_scalar(std::ostream& os, const json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    os << (std::isfinite(x) ? format_double(x) : "null");
  } else {
    os << j.dump();
  }
}

void write_value(std::ostream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ",\n";
      first = false;
      os << inner << json(it.key()).dump() << ": ";
      write_value(os, it.value(), indent + 1);
    }
    os << "\n" << pad << "}";
  } else if (j.is_array()) {
    if (is_flat(j)) {
      os << "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ", ";
        first = false;
        write_scalar(os, e);
      }
      os << "]";
      return;
    }
    os << "[\n";
    bool first = true;
    for (const auto& e : j) {
      if (!first) os << ",\n";
      first = false;
      os << inner;
      write_value(os, e, indent + 1);
    }
    os << "\n" << pad << "]";
  } else {
    write_scalar(os, j);
  }
}

}  // namespace

void write_json(std::ostream& os, const json& doc) {
  write_value(os, doc, 0);
  os << "\n";
}

}  // namespace qqr::detail
