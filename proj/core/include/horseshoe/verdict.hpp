#pragma once

#include <string_view>

namespace horseshoe {

// Three-valued outcome of a numeric check. A check that cannot decide
// reports `unknown`; it never rounds that to a definite answer.
enum class Verdict { yes, no, unknown };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::unknown: return "unknown";
  }
  return "unknown";
}

// Order-independent aggregate: any no wins, all yes gives yes, else unknown.
constexpr Verdict meet(Verdict a, Verdict b) {
  if (a == Verdict::no || b == Verdict::no) return Verdict::no;
  if (a == Verdict::yes && b == Verdict::yes) return Verdict::yes;
  return Verdict::unknown;
}

}  // namespace horseshoe
