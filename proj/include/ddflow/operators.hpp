#pragma once

#include <string_view>

namespace ddflow {

// Reserved callee names for lowered operators. The angle brackets keep them
// out of the space of names a MiniLang extern can declare.
inline constexpr std::string_view kOpAssignment = "<op.assignment>";
inline constexpr std::string_view kOpBinary = "<op.binary>";
inline constexpr std::string_view kOpIndexAccess = "<op.indexAccess>";
inline constexpr std::string_view kOpFieldAccess = "<op.fieldAccess>";

inline bool is_operator_name(std::string_view fullName) {
  return fullName.starts_with("<op.");
}

}  // namespace ddflow
