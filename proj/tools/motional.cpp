#include <cstdio>

int main() {
  std::puts("motional: placeholder");
  return 0;
}
