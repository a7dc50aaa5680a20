#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyrefute/rational.hpp"
#include "polyrefute/rng.hpp"
#include "polyrefute/tensor.hpp"

namespace polyrefute {

// Numerator uniform on [-2^B, 2^B] over the fixed denominator 2^B.
struct NiceRationalSpec {
  unsigned B = 32;
  // Mass of a single atom, 1/(2^{B+1}+1).
  double atom_mass() const;
};

Rational sample_nice_rational(const NiceRationalSpec& spec, Rng& rng);

enum class ProvenanceKind { Null, Planted, Custom };

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::Custom;
  std::vector<double> z;  // planted only
  double scaling = 0.0;   // planted only
};

// m equations <G^{(s)}, x^{(x)D}> = b_s.
template <class T>
struct PolynomialSystem {
  std::size_t n = 0, m = 0;
  unsigned D = 0;
  std::vector<CoefficientTensor<T>> tensors;
  std::vector<T> rhs;
  Provenance provenance;

  void validate() const {
    if (tensors.size() != m || rhs.size() != m) throw std::invalid_argument("system: expected m tensors and m rhs values");
    for (const auto& G : tensors)
      if (G.order != D || G.dim != n) throw std::invalid_argument("system: tensor shape mismatch");
  }

  std::vector<HomogeneousPolynomial<T>> polynomials() const {
    std::vector<HomogeneousPolynomial<T>> out;
    out.reserve(m);
    for (const auto& G : tensors) out.push_back(tensor_to_poly(G));
    return out;
  }
};

using RationalSystem = PolynomialSystem<Rational>;
using RealSystem = PolynomialSystem<double>;

struct PlantedWitness {
  std::vector<double> z;
  double scaling = 0.0;
};

RationalSystem sample_null_rational_system(std::size_t n, std::size_t m, unsigned D, const NiceRationalSpec& spec,
                                           Rng& rng);
RealSystem sample_null_gaussian_system(std::size_t n, std::size_t m, unsigned D, Rng& rng);

// z uniform on {+-1/sqrt n}^n, b ~ N(0,1), and each tensor is a standard
// Gaussian conditioned on <G, z^{(x)D}> = c b via a rank-one correction.
std::pair<RealSystem, PlantedWitness> sample_planted_system(std::size_t n, std::size_t m, unsigned D, double scaling,
                                                            Rng& rng);

// Uniform sign vector scaled to the unit sphere.
std::vector<double> sample_hypercube_point(std::size_t n, Rng& rng);

// x = z / c^{1/D}. Throws when c = 0 unless every rhs is zero, in which case
// z itself is returned.
std::vector<double> solve_planted(const RealSystem& sys);

// Largest |g_s(x) - b_s| / max(1, |b_s|).
double max_relative_residual(const RealSystem& sys, const std::vector<double>& x);

// Default planted scaling 1/(10 d sqrt(m) log(n+1)).
double default_scaling(std::size_t n, std::size_t m, unsigned d);

nlohmann::json system_to_json(const RationalSystem& sys);
nlohmann::json system_to_json(const RealSystem& sys);
RationalSystem rational_system_from_json(const nlohmann::json& j);
RealSystem real_system_from_json(const nlohmann::json& j);

}  // namespace polyrefute
