#pragma once

#include <array>
#include <bitset>
#include <span>
#include <string>
#include <string_view>

namespace cvse::text {

/// Mutually exclusive attribute terms, one flag per term class:
///
///   0 right   1 left   2 bilateral                      (side)
///   3 small   4 great|large                              (size)
///   5 low     6 high                                     (level)
///   7 elevate|enlarge|increase|widen   8 shrink|decrease (growth)
///   9 improve|resolve|clear            10 worsen         (course)
///   11 mild   12 severe                                  (severity)
///
/// A flag is set when any token starts with one of the class stems.
/// Verb stems are truncated before their inflecting "e" ("increas",
/// "improv") so "increasing" and "improving" match as well.
inline constexpr std::size_t kMutexFlags = 13;

struct MutexPattern {
  std::bitset<kMutexFlags> flags;

  bool operator==(const MutexPattern&) const = default;
  unsigned long key() const { return flags.to_ulong(); }
  bool test(std::size_t i) const { return flags.test(i); }
  /// Flags as "0"/"1" characters in class order.
  std::string to_string() const;
};

struct MutexClass {
  std::string_view name;
  std::size_t term_set;  // 0..5
  std::array<std::string_view, 4> stems;  // unused slots are empty
};

const std::array<MutexClass, kMutexFlags>& mutex_classes();

MutexPattern mutex_pattern(std::span<const std::string> tokens);

}  // namespace cvse::text
