#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace k2sql::schema_link {

// Sparse real vector: (index, value) pairs sorted by index, no duplicate indices.
// Dense embeddings simply list every coordinate.
struct Embedding {
  std::vector<std::pair<std::uint64_t, double>> entries;
};

// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero magnitude.
double cosine(const Embedding& a, const Embedding& b);

// Text-to-vector capability. The same text must always map to the same vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::uint64_t dimension() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
  // False for single-flight providers: callers then serialise embed() calls.
  virtual bool concurrent_safe() const { return true; }
};

// Lowercased alphanumeric tokens ([a-z0-9] plus non-ASCII bytes) counted into a
// sparse vector. Tokens are indexed by a 64-bit FNV-1a hash, so distinct tokens
// collide with negligible probability.
class TokenOverlapEmbedder final : public Embedder {
 public:
  std::string name() const override { return "token-overlap"; }
  std::uint64_t dimension() const override { return UINT64_MAX; }
  Embedding embed(std::string_view text) const override;
};

std::vector<std::string> tokenize(std::string_view text);

}  // namespace k2sql::schema_link
