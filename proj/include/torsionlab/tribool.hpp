#pragma once

#include <string>

namespace torsionlab {

// Three-valued answer. Unknown means "cannot conclude within the decidable
// fragment" and must never be collapsed to No by a consumer.
enum class TriBool { Yes, No, Unknown };

inline TriBool tri_and(TriBool a, TriBool b) {
  if (a == TriBool::No || b == TriBool::No) return TriBool::No;
  if (a == TriBool::Yes && b == TriBool::Yes) return TriBool::Yes;
  return TriBool::Unknown;
}

inline TriBool tri_or(TriBool a, TriBool b) {
  if (a == TriBool::Yes || b == TriBool::Yes) return TriBool::Yes;
  if (a == TriBool::No && b == TriBool::No) return TriBool::No;
  return TriBool::Unknown;
}

inline TriBool tri_not(TriBool a) {
  if (a == TriBool::Yes) return TriBool::No;
  if (a == TriBool::No) return TriBool::Yes;
  return TriBool::Unknown;
}

inline TriBool tri_of(bool b) { return b ? TriBool::Yes : TriBool::No; }

inline std::string to_string(TriBool t) {
  switch (t) {
    case TriBool::Yes: return "yes";
    case TriBool::No: return "no";
    default: return "unknown";
  }
}

}  // namespace torsionlab
