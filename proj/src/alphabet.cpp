#include "lemma/alphabet.hpp"

#include "lemma/tensor.hpp"

namespace lemma {

namespace alphabet {

int index_of(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c >= '0' && c <= '9') return 26 + (c - '0');
  fail(std::string("alphabet: symbol '") + c + "' not in a-z0-9");
}

char char_of(int index) {
  if (index >= 0 && index < 26) return static_cast<char>('a' + index);
  if (index >= 26 && index < 36) return static_cast<char>('0' + (index - 26));
  fail("alphabet: index " + std::to_string(index) + " is not a printable symbol");
}

bool is_valid_text(const std::string& text) {
  for (char c : text)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
  return true;
}

}  // namespace alphabet

std::vector<int> Label::encode(int t_max) const {
  if (static_cast<int>(text.size()) > t_max - 1)
    fail("Label: text '" + text + "' longer than T-1=" + std::to_string(t_max - 1));
  std::vector<int> out;
  out.reserve(static_cast<size_t>(t_max));
  for (char c : text) out.push_back(alphabet::index_of(c));
  out.push_back(alphabet::kEos);
  while (static_cast<int>(out.size()) < t_max) out.push_back(alphabet::kPad);
  return out;
}

Label Label::decode(const std::vector<int>& indices) {
  Label l;
  for (int idx : indices) {
    if (idx == alphabet::kEos || idx == alphabet::kPad) break;
    l.text.push_back(alphabet::char_of(idx));
  }
  return l;
}

int Label::valid_length(const std::vector<int>& argmax_indices) {
  for (size_t i = 0; i < argmax_indices.size(); ++i)
    if (argmax_indices[i] == alphabet::kEos) return static_cast<int>(i) + 1;
  return static_cast<int>(argmax_indices.size());
}

}  // namespace lemma
