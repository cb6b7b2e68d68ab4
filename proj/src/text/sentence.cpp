#include "cvse/text/sentence.hpp"

#include <cctype>

namespace cvse::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Sentence> split_sentences(std::string_view report, std::string_view report_id, std::uint64_t first_id) {
  std::vector<Sentence> out;
  auto emit = [&](std::string_view piece) {
    piece = trim(piece);
    if (piece.empty()) return;
    Sentence s;
    s.id = first_id + out.size();
    s.report_id = std::string(report_id);
    s.position = out.size();
    s.text = std::string(piece);
    s.tokens = tokenize(piece);
    out.push_back(std::move(s));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < report.size(); ++i) {
    const char c = report[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 == report.size() || is_space(report[i + 1])) {
      emit(report.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < report.size()) emit(report.substr(start));
  return out;
}

std::string sentence_key(const Sentence& s) { return s.report_id + "#" + std::to_string(s.position); }

}  // namespace cvse::text
