#pragma once

#include <stdexcept>
#include <string>

namespace secperc {

// The three percolation types the bound machinery handles directly:
// undirected (U), directed out (O) and bidirectional (B).
enum class Variant { U, O, B };

inline const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::U: return "U";
    case Variant::O: return "O";
    case Variant::B: return "B";
  }
  return "?";
}

// Per-edge open probability above which a 1-independent bond model on Z^2
// percolates, and the per-direction good-event probability whose square
// reaches it.
inline constexpr double kOneIndependentThreshold = 0.8639;
inline constexpr double kGoodEventThreshold = 0.93195;

inline Variant variant_from_string(const std::string& s) {
  if (s == "U") return Variant::U;
  if (s == "O") return Variant::O;
  if (s == "B") return Variant::B;
  throw std::invalid_argument("unknown variant: " + s + " (expected U, O or B)");
}

}  // namespace secperc
