#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace igo {

enum class CorrelationKind { kendall, pearson };

inline const char* to_string(CorrelationKind k) {
  return k == CorrelationKind::kendall ? "kendall" : "pearson";
}

inline CorrelationKind parse_correlation_kind(std::string_view s) {
  if (s == "kendall") return CorrelationKind::kendall;
  if (s == "pearson") return CorrelationKind::pearson;
  throw std::invalid_argument("unknown correlation kind: " + std::string(s) +
                              " (expected kendall or pearson)");
}

}  // namespace igo
