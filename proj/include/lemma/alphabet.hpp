#pragma once

#include <string>
#include <vector>

namespace lemma {

// Symbol set: 'a'-'z' -> 0..25, '0'-'9' -> 26..35, EOS = 36, PAD = 37.
namespace alphabet {

constexpr int kSize = 38;
constexpr int kEos = 36;
constexpr int kPad = 37;
constexpr int kCharCount = 36;  // non-special symbols

int index_of(char c);        // fails on symbols outside the set
char char_of(int index);     // non-special indices only
bool is_valid_text(const std::string& text);

}  // namespace alphabet

// Character sequence plus its fixed-length encoded form: indices
// terminated by EOS and PAD-filled to length T.
struct Label {
  std::string text;

  std::vector<int> encode(int t_max) const;
  static Label decode(const std::vector<int>& indices);

  // first EOS position + 1; T when no EOS appears
  static int valid_length(const std::vector<int>& argmax_indices);
};

}  // namespace lemma
