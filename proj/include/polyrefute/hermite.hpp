#pragma once

#include <vector>

namespace polyrefute {

// Probabilists' Hermite polynomial h_k(x), h_{k+1} = x h_k - k h_{k-1}.
double hermite_eval(unsigned k, double x);

// h_0(x), ..., h_kmax(x).
std::vector<double> hermite_all(unsigned kmax, double x);

// (k-1)!! with (-1)!! = 0!! = 1.
double double_factorial(int k);

double factorial(unsigned k);

// Closed form of h_k(0): 0 for odd k, (-1)^{k/2} (k-1)!! for even k.
double hermite_at_zero(unsigned k);

}  // namespace polyrefute
