#include "ews/words.hpp"

#include <limits>

#include "ews/errors.hpp"

namespace ews {

std::size_t level_size(int w, int k) {
  require(w >= 1 && k >= 0, "level_size: need w >= 1, k >= 0");
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) {
    require(s <= std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(w),
            "level_size: w^k overflows");
    s *= static_cast<std::size_t>(w);
  }
  return s;
}

std::size_t total_dim(int w, int n) {
  std::size_t total = 0;
  for (int k = 0; k <= n; ++k) {
    std::size_t s = level_size(w, k);
    require(total <= std::numeric_limits<std::size_t>::max() - s, "total_dim: overflow");
    total += s;
  }
  return total;
}

std::size_t word_to_index(const Word& word, int w) {
  std::size_t idx = 0;
  for (int letter : word) {
    require(letter >= 1 && letter <= w, "word_to_index: letter out of range");
    idx = idx * static_cast<std::size_t>(w) + static_cast<std::size_t>(letter - 1);
  }
  return idx;
}

Word index_to_word(int w, int level, std::size_t index) {
  require(index < level_size(w, level), "index_to_word: index out of range");
  Word word(static_cast<std::size_t>(level));
  for (int pos = level - 1; pos >= 0; --pos) {
    word[static_cast<std::size_t>(pos)] = static_cast<int>(index % static_cast<std::size_t>(w)) + 1;
    index /= static_cast<std::size_t>(w);
  }
  return word;
}

namespace {

void shuffle_rec(const Word& u, std::size_t nu, const Word& v, std::size_t nv, Word& tail,
                 std::map<Word, std::int64_t>& out) {
  if (nu == 0 || nv == 0) {
    // Only one interleaving remains: the untouched prefix then the tail
    // (which was built back-to-front).
    Word word;
    word.reserve(nu + nv + tail.size());
    word.insert(word.end(), u.begin(), u.begin() + static_cast<std::ptrdiff_t>(nu));
    word.insert(word.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(nv));
    word.insert(word.end(), tail.rbegin(), tail.rend());
    out[word] += 1;
    return;
  }
  tail.push_back(u[nu - 1]);
  shuffle_rec(u, nu - 1, v, nv, tail, out);
  tail.back() = v[nv - 1];
  shuffle_rec(u, nu, v, nv - 1, tail, out);
  tail.pop_back();
}

}  // namespace

std::map<Word, std::int64_t> shuffle_words(const Word& u, const Word& v) {
  std::map<Word, std::int64_t> out;
  Word tail;
  shuffle_rec(u, u.size(), v, v.size(), tail, out);
  return out;
}

void DualElement::add(const Word& word, double coeff) {
  auto it = terms.find(word);
  if (it == terms.end()) {
    if (coeff != 0.0) terms[word] = coeff;
    return;
  }
  it->second += coeff;
  if (it->second == 0.0) terms.erase(it);
}

bool operator==(const DualElement& a, const DualElement& b) { return a.terms == b.terms; }

DualElement shuffle_product(const DualElement& a, const DualElement& b) {
  DualElement out;
  for (const auto& [wa, ca] : a.terms) {
    for (const auto& [wb, cb] : b.terms) {
      const double c = ca * cb;
      if (c == 0.0) continue;
      for (const auto& [word, mult] : shuffle_words(wa, wb))
        out.add(word, c * static_cast<double>(mult));
    }
  }
  return out;
}

}  // namespace ews
