#pragma once

#include <string_view>

namespace cvse::text {

/// True when `token` starts with `stem` (letter-prefix match).
bool has_stem(std::string_view token, std::string_view stem);

/// Loose stem equality for two arbitrary tokens: the shorter is at least four
/// letters and they share a prefix of min(5, shorter length) letters, so
/// "effusion"/"effusions" and "increased"/"increasing" match, "cat"/"cats" do not.
bool stem_match(std::string_view a, std::string_view b);

}  // namespace cvse::text
