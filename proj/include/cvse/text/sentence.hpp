#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cvse::text {

struct Sentence {
  std::uint64_t id = 0;
  std::string report_id;
  std::size_t position = 0;  // index within the report
  std::string text;
  std::vector<std::string> tokens;
};

/// Lowercases ASCII letters and treats every non-alphanumeric byte as a separator.
std::vector<std::string> tokenize(std::string_view text);

/// Splits on '.', '!' or '?' followed by whitespace or end of text, trims the
/// pieces and drops empty ones. Abbreviations such as "dr. smith" are split
/// at their period. Ids are assigned consecutively from `first_id`.
std::vector<Sentence> split_sentences(std::string_view report, std::string_view report_id = {},
                                      std::uint64_t first_id = 0);

/// Canonical "<report_id>#<position>" key, used by precomputed embedding files.
std::string sentence_key(const Sentence& s);

}  // namespace cvse::text
