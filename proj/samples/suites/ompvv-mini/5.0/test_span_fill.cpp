#include <cstdio>
#include <vector>

int main() {
  std::vector<double> v(2048, 0.0);
  int errors = 0;
#pragma omp parallel for
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * static_cast<double>(i);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.5 * static_cast<double>(i)) errors++;
  std::printf("errors=%d\n", errors);
  return errors;
}
