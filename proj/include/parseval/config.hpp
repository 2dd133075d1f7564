#pragma once

#include <cstdint>

namespace parseval {

/// Resource limits shared by the sieves and the verification drivers.
struct Budget {
  /// Upper bound on bytes a single table construction may allocate.
  std::uint64_t memory_bytes = std::uint64_t{2} << 30;
  /// Limits above this switch the sieves to the segmented path.
  std::uint64_t segment_threshold = 10'000'000;
  std::uint64_t segment_length = std::uint64_t{1} << 18;
  /// Largest shift h accepted by the correlation drivers.
  std::uint64_t max_shift = 10'000;
  unsigned threads = 1;
};

/// Name of the environment variable that overrides Budget::memory_bytes.
inline constexpr const char* kMemoryBudgetEnv = "PARSEVAL_MEMORY_BUDGET";

/// Default budget, with the memory limit taken from PARSEVAL_MEMORY_BUDGET
/// when set. Accepts a byte count with an optional K, M or G suffix.
Budget default_budget();

/// Parses "2G", "512M", "1048576" etc. Throws DomainError on malformed input.
std::uint64_t parse_byte_count(const char* text);

}  // namespace parseval
