#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lmlab::bpe {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

inline constexpr TokenId kByteTokens = 256;

struct Merge {
  TokenId left = 0;
  TokenId right = 0;
  TokenId id = 0;

  bool operator==(const Merge&) const = default;
};

/// Byte-level vocabulary: ids 0..255 are the raw bytes, every later id is the
/// result of one merge, in training order.
class Vocabulary {
 public:
  Vocabulary() : Vocabulary(kByteTokens, {}) {}

  /// Builds from a merge list; ids must be dense starting at 256 and refer only
  /// to earlier tokens. Throws ValidationError otherwise.
  Vocabulary(std::size_t target_size, std::vector<Merge> merges);

  std::size_t size() const { return kByteTokens + merges_.size(); }
  std::size_t target_size() const { return target_size_; }
  const std::vector<Merge>& merges() const { return merges_; }

  /// Byte payload of a token. Throws ValidationError on an unknown id.
  const std::string& bytes(TokenId id) const;

  /// Rank (merge index) for a pair, or -1.
  long rank(TokenId left, TokenId right) const;

  /// Copy truncated to the first `count` merges.
  Vocabulary prefix(std::size_t count) const;

  bool operator==(const Vocabulary& o) const {
    return target_size_ == o.target_size_ && merges_ == o.merges_;
  }

 private:
  void rebuild();

  std::size_t target_size_ = kByteTokens;
  std::vector<Merge> merges_;
  std::vector<std::string> payload_;
  std::unordered_map<std::uint64_t, std::size_t> rank_;
};

/// Greedy merge learning: count all adjacent pairs, merge the most frequent
/// (smallest (left, right) on ties) left to right, repeat until the vocabulary
/// has `target_size` entries or no pair occurs at least twice.
Vocabulary train(std::string_view corpus, std::size_t target_size);

/// Applies merges in rank order until no mergeable pair remains.
TokenSequence encode(const Vocabulary& vocab, std::string_view text);

/// Concatenated byte payloads, no UTF-8 interpretation.
std::string decode_bytes(const Vocabulary& vocab, const TokenSequence& seq);

struct Decoded {
  std::string text;
  bool lossy = false;  // invalid UTF-8 was replaced with U+FFFD
};

/// decode_bytes followed by UTF-8 validation; invalid sequences become U+FFFD.
Decoded decode(const Vocabulary& vocab, const TokenSequence& seq);

bool is_valid_utf8(std::string_view s);

/// Replaces each maximal invalid subsequence with U+FFFD.
std::string sanitize_utf8(std::string_view s, bool* replaced = nullptr);

// JSON-lines file: {"format":"lmlab.bpe","version":1,"target_size":N} on the
// first line, then one [left_id, right_id, new_id] array per merge.
void write_vocabulary(std::ostream& os, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& is);
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace lmlab::bpe
