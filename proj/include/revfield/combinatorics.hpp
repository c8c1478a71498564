#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace revfield {

/// Involution on {0, ..., k}; map[j] is the image of j. Valid instances are
/// the combinatorial invariants of generic strata.
struct Involution {
  int k = 0;
  std::vector<int> map;

  bool operator==(const Involution&) const = default;
  auto operator<=>(const Involution&) const = default;
};

enum class Step : char { Up = 'U', Down = 'D', Flat = 'F' };

/// Lattice path with unit steps (1,1), (1,-1), (1,0); Flat steps only at height 0.
struct DispersedDyckPath {
  std::vector<Step> steps;

  /// Canonical stratum identifier, e.g. "FUD".
  std::string str() const;
  /// Parses a U/D/F string. Only the alphabet is checked here.
  static DispersedDyckPath parse(std::string_view text);

  bool operator==(const DispersedDyckPath&) const = default;
};

struct StratumSignature {
  int m = 0;  // fixed points of tau (real singular points)
  int h = 0;  // homoclinic loops
  int a = 0;  // homoclinic periods
  int b = 0;  // vertical widths
  int c = 0;  // upper transversal times
  std::vector<std::vector<int>> blocks;  // ordered minimal tau-invariant intervals
};

/// Landing data inside one even block [first, last].
struct BlockAttachment {
  int first = 0;
  int last = 0;
  std::vector<std::vector<int>> classes;  // cycles of h -> tau(h-1) on {first+1, ..., last}
};

struct AttachmentData {
  std::vector<int> homoclinic_indices;  // a_2, ..., a_q: loop s_a = s_-a
  std::vector<BlockAttachment> blocks;  // even blocks only, in index order
};

inline constexpr int kDefaultMaxStrataK = 14;

/// True iff tau is an involution, non-crossing, and preserves the intervals
/// between its fixed points. Malformed input (wrong length, entry out of
/// range) throws a Validation error instead of returning false.
bool is_valid_involution(const Involution& tau);

DispersedDyckPath involution_to_dyck(const Involution& tau);
Involution dyck_to_involution(const DispersedDyckPath& path);

/// Convenience: parse a U/D/F string straight to an involution.
Involution involution_from_string(std::string_view udf);

/// All valid involutions for k, lexicographic in map.
std::vector<Involution> enumerate_strata(int k, int max_k = kDefaultMaxStrataK);

// Exact counts.
std::uint64_t count_strata(int k);           // binom(k+1, floor((k+1)/2)); k >= -1, k <= 60
std::uint64_t count_dispersed_dyck(int n);   // binom(n, floor(n/2))
std::uint64_t count_des_strata(int k);       // Catalan number C(k)
std::uint64_t binomial(int n, int r);

StratumSignature signature(const Involution& tau);
AttachmentData attachment(const Involution& tau);

}  // namespace revfield
