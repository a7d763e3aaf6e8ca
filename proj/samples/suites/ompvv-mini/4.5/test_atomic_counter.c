#include <stdio.h>

int main(void) {
  int counter = 0;
  int errors = 0;
#pragma omp parallel for
  for (int i = 0; i < 512; ++i) {
#pragma omp atomic
    counter++;
  }
  if (counter != 512) errors++;
  printf("counter=%d errors=%d\n", counter, errors);
  return errors;
}
