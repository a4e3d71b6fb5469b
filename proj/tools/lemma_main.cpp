#include <cstdio>

int main() {
  std::printf("lemma CLI placeholder\n");
  return 0;
}
