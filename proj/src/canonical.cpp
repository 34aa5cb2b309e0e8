#include "llmscape/canonical.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace llmscape {
namespace {

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite number in canonical JSON");
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", v);
  std::string_view text(buffer);
  if (text == "-0.000000") text = "0.000000";
  out += text;
}

void write(std::string& out, const Json& value) {
  switch (value.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : value.items()) {  // std::map: sorted
        if (!first) out += ',';
        first = false;
        out += Json(key).dump(-1, ' ', false, Json::error_handler_t::replace);
        out += ':';
        write(out, item);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += ',';
        first = false;
        write(out, item);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      write_number(out, value.get<double>());
      break;
    default:
      out += value.dump(-1, ' ', false, Json::error_handler_t::replace);
  }
}

}  // namespace

std::string canonical_json(const Json& value) {
  std::string out;
  write(out, value);
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace llmscape
