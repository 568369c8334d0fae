#include "lmlab/bpe.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lmlab/error.hpp"

namespace lmlab::bpe {
namespace {

constexpr std::uint64_t pair_key(TokenId l, TokenId r) {
  return (static_cast<std::uint64_t>(l) << 32) | r;
}

// Replaces every non-overlapping occurrence of (l, r), scanning left to right.
// Returns the number of replacements.
std::size_t merge_pair(TokenSequence& seq, TokenId l, TokenId r, TokenId id) {
  std::size_t out = 0, count = 0;
  for (std::size_t i = 0; i < seq.size();) {
    if (i + 1 < seq.size() && seq[i] == l && seq[i + 1] == r) {
      seq[out++] = id;
      i += 2;
      ++count;
    } else {
      seq[out++] = seq[i++];
    }
  }
  seq.resize(out);
  return count;
}

// Length of the valid UTF-8 prefix of s starting at i: the full sequence length
// if valid, otherwise the length of the maximal valid subpart (>= 1) negated.
int utf8_step(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return 1;
  int len;
  unsigned char lo = 0x80, hi = 0xBF;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    len = 2;
  } else if (b0 == 0xE0) {
    len = 3, lo = 0xA0;
  } else if ((b0 >= 0xE1 && b0 <= 0xEC) || b0 == 0xEE || b0 == 0xEF) {
    len = 3;
  } else if (b0 == 0xED) {
    len = 3, hi = 0x9F;  // no surrogates
  } else if (b0 == 0xF0) {
    len = 4, lo = 0x90;
  } else if (b0 >= 0xF1 && b0 <= 0xF3) {
    len = 4;
  } else if (b0 == 0xF4) {
    len = 4, hi = 0x8F;
  } else {
    return -1;
  }
  for (int k = 1; k < len; ++k) {
    if (i + k >= s.size()) return -k;
    const auto b = static_cast<unsigned char>(s[i + k]);
    const unsigned char l = (k == 1) ? lo : 0x80;
    const unsigned char h = (k == 1) ? hi : 0xBF;
    if (b < l || b > h) return -k;
  }
  return len;
}

}  // namespace

Vocabulary::Vocabulary(std::size_t target_size, std::vector<Merge> merges)
    : target_size_(target_size), merges_(std::move(merges)) {
  if (target_size_ < kByteTokens) throw ValidationError("vocabulary target_size must be >= 256");
  if (size() > target_size_) throw ValidationError("vocabulary exceeds its target_size");
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const auto& m = merges_[i];
    const auto expected = static_cast<TokenId>(kByteTokens + i);
    if (m.id != expected) {
      throw ValidationError("merge " + std::to_string(i) + " has id " + std::to_string(m.id) +
                            ", expected " + std::to_string(expected));
    }
    if (m.left >= expected || m.right >= expected) {
      throw ValidationError("merge " + std::to_string(i) + " refers to a later token");
    }
  }
  rebuild();
}

void Vocabulary::rebuild() {
  payload_.clear();
  payload_.reserve(size());
  for (unsigned b = 0; b < kByteTokens; ++b) payload_.emplace_back(1, static_cast<char>(b));
  rank_.clear();
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    payload_.push_back(payload_[merges_[i].left] + payload_[merges_[i].right]);
    rank_.emplace(pair_key(merges_[i].left, merges_[i].right), i);
  }
}

const std::string& Vocabulary::bytes(TokenId id) const {
  if (id >= payload_.size()) {
    throw ValidationError("unknown token id " + std::to_string(id) + " (vocabulary size " +
                          std::to_string(size()) + ")");
  }
  return payload_[id];
}

long Vocabulary::rank(TokenId left, TokenId right) const {
  const auto it = rank_.find(pair_key(left, right));
  return it == rank_.end() ? -1 : static_cast<long>(it->second);
}

Vocabulary Vocabulary::prefix(std::size_t count) const {
  count = std::min(count, merges_.size());
  return Vocabulary(target_size_,
                    std::vector<Merge>(merges_.begin(), merges_.begin() + count));
}

Vocabulary train(std::string_view corpus, std::size_t target_size) {
  if (target_size < kByteTokens) throw DomainError("bpe train: target_size must be >= 256");
  if (corpus.empty()) throw DomainError("bpe train: corpus must be non-empty");
  TokenSequence seq(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) seq[i] = static_cast<unsigned char>(corpus[i]);

  std::vector<Merge> merges;
  std::unordered_map<std::uint64_t, std::size_t> counts;
  while (kByteTokens + merges.size() < target_size) {
    counts.clear();
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[pair_key(seq[i], seq[i + 1])];
    std::uint64_t best = 0;
    std::size_t best_count = 0;
    for (const auto& [key, c] : counts) {
      if (c > best_count || (c == best_count && key < best)) {
        best = key;
        best_count = c;
      }
    }
    if (best_count < 2) break;
    const Merge m{static_cast<TokenId>(best >> 32), static_cast<TokenId>(best & 0xffffffffu),
                  static_cast<TokenId>(kByteTokens + merges.size())};
    merge_pair(seq, m.left, m.right, m.id);
    merges.push_back(m);
  }
  return Vocabulary(target_size, std::move(merges));
}

TokenSequence encode(const Vocabulary& vocab, std::string_view text) {
  TokenSequence seq(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) seq[i] = static_cast<unsigned char>(text[i]);
  while (seq.size() >= 2) {
    long best = -1;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const long r = vocab.rank(seq[i], seq[i + 1]);
      if (r >= 0 && (best < 0 || r < best)) best = r;
    }
    if (best < 0) break;
    const auto& m = vocab.merges()[static_cast<std::size_t>(best)];
    merge_pair(seq, m.left, m.right, m.id);
  }
  return seq;
}

std::string decode_bytes(const Vocabulary& vocab, const TokenSequence& seq) {
  std::string out;
  for (auto id : seq) out += vocab.bytes(id);
  return out;
}

Decoded decode(const Vocabulary& vocab, const TokenSequence& seq) {
  Decoded d;
  d.text = sanitize_utf8(decode_bytes(vocab, seq), &d.lossy);
  return d;
}

bool is_valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const int n = utf8_step(s, i);
    if (n < 0) return false;
    i += static_cast<std::size_t>(n);
  }
  return true;
}

std::string sanitize_utf8(std::string_view s, bool* replaced) {
  std::string out;
  out.reserve(s.size());
  bool any = false;
  for (std::size_t i = 0; i < s.size();) {
    const int n = utf8_step(s, i);
    if (n > 0) {
      out.append(s.substr(i, static_cast<std::size_t>(n)));
      i += static_cast<std::size_t>(n);
    } else {
      out += "\xEF\xBF\xBD";
      i += static_cast<std::size_t>(-n);
      any = true;
    }
  }
  if (replaced) *replaced = any;
  return out;
}

void write_vocabulary(std::ostream& os, const Vocabulary& vocab) {
  nlohmann::ordered_json header;
  header["format"] = "lmlab.bpe";
  header["version"] = 1;
  header["target_size"] = vocab.target_size();
  os << header.dump() << '\n';
  for (const auto& m : vocab.merges()) {
    os << '[' << m.left << ',' << m.right << ',' << m.id << "]\n";
  }
}

Vocabulary read_vocabulary(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("vocabulary: missing header line");
  std::size_t target = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("version").get<int>() != 1) throw FormatError("vocabulary: unsupported version");
    target = header.at("target_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocabulary header: ") + e.what());
  }
  std::vector<Merge> merges;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto arr = nlohmann::json::parse(line);
      if (!arr.is_array() || arr.size() != 3) throw FormatError("expected [left, right, id]");
      merges.push_back({arr[0].get<TokenId>(), arr[1].get<TokenId>(), arr[2].get<TokenId>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("vocabulary line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return Vocabulary(target, std::move(merges));
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  write_vocabulary(os, vocab);
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  return read_vocabulary(is);
}

}  // namespace lmlab::bpe
