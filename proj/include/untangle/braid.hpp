#pragma once

#include "untangle/topology.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace untangle {

/// One Artin generator sigma_i (exponent +1) or its inverse (exponent -1).
struct BraidLetter {
  int generator = 1;
  int exponent = 1;

  bool operator==(const BraidLetter&) const = default;
  bool cancels(const BraidLetter& next) const {
    return generator == next.generator && exponent == -next.exponent;
  }
};

/// Word over the generators of the braid group on `strand_count` strands.
class BraidWord {
 public:
  BraidWord() = default;
  /// Throws std::invalid_argument for strand_count < 2, a generator outside
  /// [1, strand_count - 1] or an exponent other than +-1.
  explicit BraidWord(int strand_count, std::vector<BraidLetter> letters = {});

  /// Parses whitespace-separated `s<i>` (sigma_i) and `S<i>` (inverse)
  /// tokens. With strand_count == 0 the smallest sufficient count is used.
  static BraidWord parse(std::string_view text, int strand_count = 0);

  int strand_count() const noexcept { return strand_count_; }
  const std::vector<BraidLetter>& letters() const noexcept { return letters_; }
  std::size_t length() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }

  std::string to_string() const;
  BraidWord inverse() const;
  BraidWord concat(const BraidWord& other) const;

  bool operator==(const BraidWord&) const = default;

 private:
  int strand_count_ = 2;
  std::vector<BraidLetter> letters_;
};

/// Appends one letter per event, in time-step order (stable within a step):
/// under -> sigma_i, over -> sigma_i^-1. Throws std::invalid_argument when an
/// event's strand index is outside the word's generator range.
BraidWord append_crossings(const BraidWord& w, std::span<const CrossingEvent> events);

/// card{(k, l) | k < l, i_k > i_l} over generator indices.
std::int64_t inversion_count(const BraidWord& w);

enum class RewriteRule { cancel, commute, braid };

std::string_view to_string(RewriteRule r);

struct RewriteStep {
  RewriteRule rule = RewriteRule::cancel;
  std::size_t position = 0;
  std::size_t length_after = 0;
  std::int64_t inversions_after = 0;
};

struct RewriteTrace {
  BraidWord initial;
  BraidWord final_word;
  std::vector<RewriteStep> steps;
};

struct SimplifyResult {
  BraidWord word;
  RewriteTrace trace;
};

/// Raised when simplification exceeds its 10 * L^2 iteration cap; this can
/// only happen through a defect in the rule set.
class RewriteCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rewrites to a normal form, scanning leftmost first with rule priority
/// cancel > commute > braid:
///   cancel   s_i s_i^-1 -> e and s_i^-1 s_i -> e
///   commute  s_i^a s_j^b -> s_j^b s_i^a when i > j + 1
///   braid    s_i s_{i+1} s_i -> s_{i+1} s_i s_{i+1} (same for all-inverse
///            triples), only when the rewritten triple exposes a cancellation
///            at its boundary.
SimplifyResult simplify(const BraidWord& w);

/// Length of simplify(w).word without keeping the trace.
std::size_t simplified_length(const BraidWord& w);

/// Letters of `w` whose generator touches strand `strand` (0-based), i.e.
/// sigma_strand and sigma_{strand+1} in 1-based generator indexing.
std::size_t letters_touching_strand(const BraidWord& w, int strand);

struct ConfluenceVerdict {
  enum class Kind { confluent, divergent, inconclusive };
  Kind kind = Kind::inconclusive;
  std::vector<BraidWord> normal_forms;  // distinct terminal words found
  std::size_t nodes_explored = 0;
};

/// Exhaustive breadth-first exploration of every cancel / restricted-commute
/// application (no strategy). Confluent iff the graph has exactly one
/// terminal word; inconclusive if more than `max_nodes` words are visited.
ConfluenceVerdict confluence_oracle(const BraidWord& w, std::size_t max_nodes = 200000);

/// The same exploration with the gated braid rule added as an edge wherever
/// its gate holds.
ConfluenceVerdict confluence_oracle_with_braid_rule(const BraidWord& w,
                                                    std::size_t max_nodes = 200000);

/// Searches the unrestricted rewrite graph (cancellation, commutation in
/// both directions, braid relation in both directions for uniform
/// exponents) for the empty word. std::nullopt when the node budget runs out.
std::optional<bool> reduces_to_identity(const BraidWord& w, std::size_t max_nodes = 500000);

}  // namespace untangle
