#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cvse::eval {

/// Mean over studies of |top-k retrieved ∩ gold| / |gold|. Studies with an
/// empty gold set are skipped; if every gold set is empty, or a retrieved list
/// is shorter than k, throws UsageError.
double recall_at_k(std::span<const std::vector<std::uint32_t>> retrieved,
                   std::span<const std::vector<std::uint32_t>> gold, std::size_t k);

}  // namespace cvse::eval
