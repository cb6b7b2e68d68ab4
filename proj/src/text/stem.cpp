#include "cvse/text/stem.hpp"

#include <algorithm>

namespace cvse::text {

bool has_stem(std::string_view token, std::string_view stem) { return token.starts_with(stem); }

bool stem_match(std::string_view a, std::string_view b) {
  const std::size_t shorter = std::min(a.size(), b.size());
  if (shorter < 4) return a == b;
  const std::size_t need = std::min<std::size_t>(5, shorter);
  return a.substr(0, need) == b.substr(0, need);
}

}  // namespace cvse::text
