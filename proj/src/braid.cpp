#include "untangle/braid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_set>

namespace untangle {

BraidWord::BraidWord(int strand_count, std::vector<BraidLetter> letters)
    : strand_count_(strand_count), letters_(std::move(letters)) {
  if (strand_count_ < 2) throw std::invalid_argument("braid needs at least two strands");
  for (const auto& l : letters_) {
    if (l.generator < 1 || l.generator >= strand_count_) {
      throw std::invalid_argument("generator index " + std::to_string(l.generator) +
                                  " out of range for " + std::to_string(strand_count_) +
                                  " strands");
    }
    if (l.exponent != 1 && l.exponent != -1) {
      throw std::invalid_argument("braid exponent must be +1 or -1");
    }
  }
}

BraidWord BraidWord::parse(std::string_view text, int strand_count) {
  std::vector<BraidLetter> letters;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == text.size()) break;
    const char head = text[i];
    if (head != 's' && head != 'S') {
      throw std::invalid_argument("braid token must start with 's' or 'S'");
    }
    ++i;
    int g = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), g);
    if (ec != std::errc{} || ptr == text.data() + i) {
      throw std::invalid_argument("braid token needs a generator index");
    }
    i = static_cast<std::size_t>(ptr - text.data());
    if (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
      throw std::invalid_argument("unexpected character in braid token");
    }
    letters.push_back({g, head == 's' ? 1 : -1});
  }
  if (strand_count == 0) {
    int max_g = 1;
    for (const auto& l : letters) max_g = std::max(max_g, l.generator);
    strand_count = max_g + 1;
  }
  return BraidWord(strand_count, std::move(letters));
}

std::string BraidWord::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < letters_.size(); ++k) {
    if (k) out += ' ';
    out += letters_[k].exponent > 0 ? 's' : 'S';
    out += std::to_string(letters_[k].generator);
  }
  return out;
}

BraidWord BraidWord::inverse() const {
  std::vector<BraidLetter> inv(letters_.rbegin(), letters_.rend());
  for (auto& l : inv) l.exponent = -l.exponent;
  return BraidWord(strand_count_, std::move(inv));
}

BraidWord BraidWord::concat(const BraidWord& other) const {
  std::vector<BraidLetter> all = letters_;
  all.insert(all.end(), other.letters_.begin(), other.letters_.end());
  return BraidWord(std::max(strand_count_, other.strand_count_), std::move(all));
}

BraidWord append_crossings(const BraidWord& w, std::span<const CrossingEvent> events) {
  std::vector<const CrossingEvent*> ordered;
  ordered.reserve(events.size());
  for (const auto& e : events) {
    if (e.strand_index < 1 || e.strand_index >= w.strand_count()) {
      throw std::invalid_argument("crossing strand index " + std::to_string(e.strand_index) +
                                  " out of range");
    }
    ordered.push_back(&e);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const CrossingEvent* a, const CrossingEvent* b) {
                     return a->time_step < b->time_step;
                   });
  std::vector<BraidLetter> letters = w.letters();
  for (const auto* e : ordered) {
    letters.push_back({e->strand_index, e->sign == CrossingSign::under ? 1 : -1});
  }
  return BraidWord(w.strand_count(), std::move(letters));
}

std::int64_t inversion_count(const BraidWord& w) {
  // Counts, for each letter, earlier letters with a strictly larger index.
  std::vector<std::int64_t> seen(static_cast<std::size_t>(w.strand_count()) + 1, 0);
  std::int64_t total = 0;
  for (const auto& l : w.letters()) {
    for (int g = l.generator + 1; g < w.strand_count(); ++g) total += seen[g];
    ++seen[l.generator];
  }
  return total;
}

std::string_view to_string(RewriteRule r) {
  switch (r) {
    case RewriteRule::cancel: return "cancel";
    case RewriteRule::commute: return "commute";
    case RewriteRule::braid: return "braid";
  }
  return "unknown";
}

namespace {

using Letters = std::vector<BraidLetter>;

bool commutes_down(const BraidLetter& a, const BraidLetter& b) {
  return a.generator > b.generator + 1;
}

bool is_braid_redex(const Letters& w, std::size_t p) {
  if (p + 2 >= w.size()) return false;
  const auto& a = w[p];
  const auto& b = w[p + 1];
  const auto& c = w[p + 2];
  return a.exponent == b.exponent && b.exponent == c.exponent &&
         a.generator == c.generator && b.generator == a.generator + 1;
}

// Rewrites s_i s_{i+1} s_i at p into s_{i+1} s_i s_{i+1} in place.
void apply_braid(Letters& w, std::size_t p) {
  const int i = w[p].generator;
  w[p].generator = i + 1;
  w[p + 1].generator = i;
  w[p + 2].generator = i + 1;
}

bool braid_gate(const Letters& w, std::size_t p) {
  if (!is_braid_redex(w, p)) return false;
  const int e = w[p].exponent;
  const BraidLetter outer{w[p].generator + 1, e};
  const bool left = p > 0 && w[p - 1].cancels(outer);
  const bool right = p + 3 < w.size() && outer.cancels(w[p + 3]);
  return left || right;
}

std::int64_t inversions(const Letters& w, int strands) {
  return inversion_count(BraidWord(strands, w));
}

struct SimplifyCore {
  Letters w;
  int strands;
  bool keep_trace;
  std::vector<RewriteStep> steps;

  void run() {
    const std::size_t L = w.size();
    const std::size_t cap = std::max<std::size_t>(10 * L * L, 10);
    std::size_t iter = 0;
    while (true) {
      if (++iter > cap) {
        throw RewriteCapExceeded("braid simplification exceeded its iteration cap");
      }
      if (step_cancel() || step_commute() || step_braid()) continue;
      break;
    }
  }

  void record(RewriteRule r, std::size_t p) {
    if (keep_trace) steps.push_back({r, p, w.size(), inversions(w, strands)});
  }

  bool step_cancel() {
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
      if (w[k].cancels(w[k + 1])) {
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(k),
                w.begin() + static_cast<std::ptrdiff_t>(k) + 2);
        record(RewriteRule::cancel, k);
        return true;
      }
    }
    return false;
  }

  bool step_commute() {
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
      if (commutes_down(w[k], w[k + 1])) {
        std::swap(w[k], w[k + 1]);
        record(RewriteRule::commute, k);
        return true;
      }
    }
    return false;
  }

  bool step_braid() {
    for (std::size_t k = 0; k + 2 < w.size(); ++k) {
      if (braid_gate(w, k)) {
        apply_braid(w, k);
        record(RewriteRule::braid, k);
        return true;
      }
    }
    return false;
  }
};

// Compact encoding for graph search: one char per letter.
using Key = std::string;

Key encode(const Letters& w) {
  Key k;
  k.reserve(w.size());
  for (const auto& l : w) k.push_back(static_cast<char>(l.generator * 2 + (l.exponent > 0)));
  return k;
}

Letters decode(const Key& k) {
  Letters w;
  w.reserve(k.size());
  for (char c : k) w.push_back({c / 2, (c % 2) ? 1 : -1});
  return w;
}

enum class EdgeSet { restricted, restricted_with_braid, unrestricted };

template <typename Visit>
void for_each_successor(const Letters& w, EdgeSet edges, Visit&& visit) {
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    if (w[k].cancels(w[k + 1])) {
      Letters n = w;
      n.erase(n.begin() + static_cast<std::ptrdiff_t>(k),
              n.begin() + static_cast<std::ptrdiff_t>(k) + 2);
      visit(std::move(n));
    }
    const bool down = commutes_down(w[k], w[k + 1]);
    const bool up = commutes_down(w[k + 1], w[k]);
    if (down || (edges == EdgeSet::unrestricted && up)) {
      Letters n = w;
      std::swap(n[k], n[k + 1]);
      visit(std::move(n));
    }
  }
  if (edges == EdgeSet::restricted) return;
  for (std::size_t k = 0; k + 2 < w.size(); ++k) {
    const bool forward = edges == EdgeSet::unrestricted ? is_braid_redex(w, k) : braid_gate(w, k);
    if (forward) {
      Letters n = w;
      apply_braid(n, k);
      visit(std::move(n));
    }
    if (edges == EdgeSet::unrestricted) {
      // s_{i+1} s_i s_{i+1} -> s_i s_{i+1} s_i
      const auto& a = w[k];
      const auto& b = w[k + 1];
      const auto& c = w[k + 2];
      if (a.exponent == b.exponent && b.exponent == c.exponent && a.generator == c.generator &&
          b.generator + 1 == a.generator) {
        Letters n = w;
        n[k].generator = b.generator;
        n[k + 1].generator = a.generator;
        n[k + 2].generator = b.generator;
        visit(std::move(n));
      }
    }
  }
}

ConfluenceVerdict explore(const BraidWord& w, std::size_t max_nodes, EdgeSet edges) {
  ConfluenceVerdict v;
  std::unordered_set<Key> seen;
  std::set<Key> terminals;
  std::deque<Key> queue;
  const Key start = encode(w.letters());
  seen.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    if (seen.size() > max_nodes) {
      v.kind = ConfluenceVerdict::Kind::inconclusive;
      v.nodes_explored = seen.size();
      return v;
    }
    const Letters cur = decode(queue.front());
    queue.pop_front();
    bool any = false;
    for_each_successor(cur, edges, [&](Letters n) {
      any = true;
      Key k = encode(n);
      if (seen.insert(k).second) queue.push_back(std::move(k));
    });
    if (!any) terminals.insert(encode(cur));
  }
  v.nodes_explored = seen.size();
  for (const auto& t : terminals) v.normal_forms.emplace_back(w.strand_count(), decode(t));
  v.kind = terminals.size() == 1 ? ConfluenceVerdict::Kind::confluent
                                 : ConfluenceVerdict::Kind::divergent;
  return v;
}

}  // namespace

SimplifyResult simplify(const BraidWord& w) {
  SimplifyCore core{w.letters(), w.strand_count(), true, {}};
  core.run();
  SimplifyResult r;
  r.word = BraidWord(w.strand_count(), std::move(core.w));
  r.trace.initial = w;
  r.trace.final_word = r.word;
  r.trace.steps = std::move(core.steps);
  return r;
}

std::size_t simplified_length(const BraidWord& w) {
  SimplifyCore core{w.letters(), w.strand_count(), false, {}};
  core.run();
  return core.w.size();
}

std::size_t letters_touching_strand(const BraidWord& w, int strand) {
  const int lo = strand;      // sigma_strand crosses strands strand-1 and strand (0-based)
  const int hi = strand + 1;  // sigma_{strand+1} crosses strand and strand+1
  return static_cast<std::size_t>(std::count_if(
      w.letters().begin(), w.letters().end(),
      [&](const BraidLetter& l) { return l.generator == lo || l.generator == hi; }));
}

ConfluenceVerdict confluence_oracle(const BraidWord& w, std::size_t max_nodes) {
  return explore(w, max_nodes, EdgeSet::restricted);
}

ConfluenceVerdict confluence_oracle_with_braid_rule(const BraidWord& w, std::size_t max_nodes) {
  return explore(w, max_nodes, EdgeSet::restricted_with_braid);
}

std::optional<bool> reduces_to_identity(const BraidWord& w, std::size_t max_nodes) {
  if (w.empty()) return true;
  std::unordered_set<Key> seen;
  std::deque<Key> queue;
  const Key start = encode(w.letters());
  seen.insert(start);
  queue.push_back(start);
  // Visit shorter words first: cancellations only ever shorten.
  while (!queue.empty()) {
    if (seen.size() > max_nodes) return std::nullopt;
    const Letters cur = decode(queue.front());
    queue.pop_front();
    bool found = false;
    for_each_successor(cur, EdgeSet::unrestricted, [&](Letters n) {
      if (n.empty()) found = true;
      Key k = encode(n);
      if (seen.insert(k).second) {
        if (k.size() < cur.size()) {
          queue.push_front(std::move(k));
        } else {
          queue.push_back(std::move(k));
        }
      }
    });
    if (found) return true;
  }
  return false;
}

}  // namespace untangle
