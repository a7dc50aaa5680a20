#include "polyrefute/hermite.hpp"

namespace polyrefute {

double hermite_eval(unsigned k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (unsigned j = 1; j < k; ++j) {
    double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_all(unsigned kmax, double x) {
  std::vector<double> h(kmax + 1);
  h[0] = 1.0;
  if (kmax >= 1) h[1] = x;
  for (unsigned j = 1; j < kmax; ++j) h[j + 1] = x * h[j] - j * h[j - 1];
  return h;
}

double double_factorial(int k) {
  double r = 1.0;
  for (int j = k; j > 1; j -= 2) r *= j;
  return r;
}

double factorial(unsigned k) {
  double r = 1.0;
  for (unsigned j = 2; j <= k; ++j) r *= j;
  return r;
}

double hermite_at_zero(unsigned k) {
  if (k % 2) return 0.0;
  double v = double_factorial(static_cast<int>(k) - 1);
  return (k / 2) % 2 ? -v : v;
}

}  // namespace polyrefute
