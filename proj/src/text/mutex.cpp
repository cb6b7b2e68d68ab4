#include "cvse/text/mutex.hpp"

#include "cvse/text/stem.hpp"

namespace cvse::text {

const std::array<MutexClass, kMutexFlags>& mutex_classes() {
  static const std::array<MutexClass, kMutexFlags> classes{{
      {"right", 0, {"right"}},
      {"left", 0, {"left"}},
      {"bilateral", 0, {"bilateral"}},
      {"small", 1, {"small"}},
      {"large", 1, {"great", "large"}},
      {"low", 2, {"low"}},
      {"high", 2, {"high"}},
      {"increase", 3, {"elevat", "enlarg", "increas", "widen"}},
      {"decrease", 3, {"shrink", "decreas"}},
      {"improve", 4, {"improv", "resolv", "clear"}},
      {"worsen", 4, {"worsen"}},
      {"mild", 5, {"mild"}},
      {"severe", 5, {"severe"}},
  }};
  return classes;
}

std::string MutexPattern::to_string() const {
  std::string s(kMutexFlags, '0');
  for (std::size_t i = 0; i < kMutexFlags; ++i) s[i] = flags.test(i) ? '1' : '0';
  return s;
}

MutexPattern mutex_pattern(std::span<const std::string> tokens) {
  MutexPattern p;
  const auto& classes = mutex_classes();
  for (const std::string& token : tokens) {
    for (std::size_t c = 0; c < kMutexFlags; ++c) {
      for (std::string_view stem : classes[c].stems) {
        if (!stem.empty() && has_stem(token, stem)) p.flags.set(c);
      }
    }
  }
  return p;
}

}  // namespace cvse::text
