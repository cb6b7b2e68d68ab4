#pragma once

#include <array>
#include <bitset>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cvse::eval {

inline constexpr std::size_t kDiseaseCount = 14;
inline constexpr std::size_t kNoFinding = 0;

/// CheXpert class order.
const std::array<std::string_view, kDiseaseCount>& disease_names();

struct DiseaseLabels {
  std::bitset<kDiseaseCount> positive;

  bool operator==(const DiseaseLabels&) const = default;
  bool operator[](std::size_t i) const { return positive.test(i); }
};

/// Trigger phrases per disease, stored tokenized.
class KeywordTable {
 public:
  KeywordTable() = default;

  /// JSON object: disease name -> list of trigger phrases. Unknown disease
  /// names raise DataError.
  static KeywordTable from_json(std::string_view json);
  static KeywordTable load(const std::filesystem::path& path);
  /// The table shipped with the project (same content as data/keywords.json).
  static const KeywordTable& builtin();

  void add(std::size_t disease, std::string_view phrase);
  const std::vector<std::vector<std::string>>& triggers(std::size_t disease) const { return triggers_[disease]; }
  bool empty() const;
  std::string to_json() const;

 private:
  std::array<std::vector<std::vector<std::string>>, kDiseaseCount> triggers_;
};

/// A disease is positive when some sentence contains one of its trigger
/// phrases as a contiguous token run, and no negation cue ("no", "without",
/// "negative for") starts within the 3 tokens before that occurrence.
/// "No Finding" is positive when the other 13 are negative and the input is
/// empty or every sentence carries a negation cue. Matching is
/// case-insensitive. Throws UsageError for an empty keyword table.
DiseaseLabels label_diseases(std::span<const std::string> sentences, const KeywordTable& table);

}  // namespace cvse::eval
