#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace ews {

// A word over the alphabet {1..w}; the empty word is the level-0 basis
// element. Letters are 1-based to match the usual channel numbering.
using Word = std::vector<int>;

// Number of words of length k over w letters (w^k), with an overflow guard.
std::size_t level_size(int w, int k);

// 1 + w + ... + w^n: dimension of the flattened truncated algebra.
std::size_t total_dim(int w, int n);

// Index of a word within its own level, leftmost letter most significant
// (grade-lexicographic order within the level).
std::size_t word_to_index(const Word& word, int w);

Word index_to_word(int w, int level, std::size_t index);

// Exact integer shuffle of two basis words: the multiset of (u, v)
// interleavings, computed with the last-letter recursion
//   u.a sh v.b = (u sh v.b).a + (u.a sh v).b
// Coefficients are exact 64-bit integers.
std::map<Word, std::int64_t> shuffle_words(const Word& u, const Word& v);

// A finite linear combination of words (an element of the dual space).
struct DualElement {
  std::map<Word, double> terms;

  DualElement() = default;
  explicit DualElement(const Word& word, double coeff = 1.0) { terms[word] = coeff; }

  void add(const Word& word, double coeff);
};

bool operator==(const DualElement& a, const DualElement& b);

// Bilinear extension of the word shuffle. The combinatorial kernel stays in
// integer arithmetic; real coefficients enter only through the bilinearity.
DualElement shuffle_product(const DualElement& a, const DualElement& b);

}  // namespace ews
