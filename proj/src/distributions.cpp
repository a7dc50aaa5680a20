#include "polyrefute/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace polyrefute {

double NiceRationalSpec::atom_mass() const { return 1.0 / (std::ldexp(1.0, static_cast<int>(B) + 1) + 1.0); }

Rational sample_nice_rational(const NiceRationalSpec& spec, Rng& rng) {
  if (spec.B < 8 || spec.B > 62) throw std::invalid_argument("sample_nice_rational: B must lie in [8, 62]");
  const std::int64_t bound = std::int64_t{1} << spec.B;
  std::uniform_int_distribution<std::int64_t> dist(-bound, bound);
  mpz_class num(static_cast<long>(dist(rng)));
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, spec.B);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

RationalSystem sample_null_rational_system(std::size_t n, std::size_t m, unsigned D, const NiceRationalSpec& spec,
                                           Rng& rng) {
  if (n < 1 || m < 1 || D < 2) throw std::invalid_argument("sample_null_rational_system: need n,m >= 1 and D >= 2");
  RationalSystem sys;
  sys.n = n;
  sys.m = m;
  sys.D = D;
  sys.provenance.kind = ProvenanceKind::Null;
  for (std::size_t s = 0; s < m; ++s) {
    CoefficientTensor<Rational> G(D, n);
    for (auto& e : G.entries) e = sample_nice_rational(spec, rng);
    sys.tensors.push_back(std::move(G));
    sys.rhs.push_back(sample_nice_rational(spec, rng));
  }
  return sys;
}

RealSystem sample_null_gaussian_system(std::size_t n, std::size_t m, unsigned D, Rng& rng) {
  if (n < 1 || m < 1 || D < 2) throw std::invalid_argument("sample_null_gaussian_system: need n,m >= 1 and D >= 2");
  std::normal_distribution<double> normal;
  RealSystem sys;
  sys.n = n;
  sys.m = m;
  sys.D = D;
  sys.provenance.kind = ProvenanceKind::Null;
  for (std::size_t s = 0; s < m; ++s) {
    CoefficientTensor<double> G(D, n);
    for (auto& e : G.entries) e = normal(rng);
    sys.tensors.push_back(std::move(G));
    sys.rhs.push_back(normal(rng));
  }
  return sys;
}

std::vector<double> sample_hypercube_point(std::size_t n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  const double v = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> z(n);
  for (auto& zi : z) zi = coin(rng) ? v : -v;
  return z;
}

std::pair<RealSystem, PlantedWitness> sample_planted_system(std::size_t n, std::size_t m, unsigned D, double scaling,
                                                            Rng& rng) {
  if (n < 1 || m < 1 || D < 2) throw std::invalid_argument("sample_planted_system: need n,m >= 1 and D >= 2");
  if (!(scaling >= 0.0)) throw std::invalid_argument("sample_planted_system: scaling must be >= 0");
  std::normal_distribution<double> normal;
  PlantedWitness w{sample_hypercube_point(n, rng), scaling};

  // z^{(x)D} as a flat array.
  CoefficientTensor<double> zt(D, n);
  for (std::size_t off = 0; off < zt.size(); ++off) {
    double v = 1.0;
    for (std::size_t i : zt.tuple(off)) v *= w.z[i];
    zt.entries[off] = v;
  }

  RealSystem sys;
  sys.n = n;
  sys.m = m;
  sys.D = D;
  sys.provenance = {ProvenanceKind::Planted, w.z, scaling};
  for (std::size_t s = 0; s < m; ++s) {
    const double b = normal(rng);
    CoefficientTensor<double> G(D, n);
    double dot = 0.0;
    for (std::size_t off = 0; off < G.size(); ++off) {
      G.entries[off] = normal(rng);
      dot += G.entries[off] * zt.entries[off];
    }
    const double shift = scaling * b - dot;
    for (std::size_t off = 0; off < G.size(); ++off) G.entries[off] += shift * zt.entries[off];
    sys.tensors.push_back(std::move(G));
    sys.rhs.push_back(b);
  }
  return {std::move(sys), std::move(w)};
}

std::vector<double> solve_planted(const RealSystem& sys) {
  if (sys.provenance.kind != ProvenanceKind::Planted) throw std::invalid_argument("solve_planted: system is not planted");
  const auto& z = sys.provenance.z;
  const double c = sys.provenance.scaling;
  if (c == 0.0) {
    for (double b : sys.rhs)
      if (b != 0.0) throw std::invalid_argument("solve_planted: scaling is zero and the rhs is nonzero");
    return z;
  }
  const double f = 1.0 / std::pow(c, 1.0 / sys.D);
  std::vector<double> x(z);
  for (auto& xi : x) xi *= f;
  return x;
}

double max_relative_residual(const RealSystem& sys, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t s = 0; s < sys.m; ++s) {
    const double r = std::abs(tensor_contract(sys.tensors[s], x) - sys.rhs[s]);
    worst = std::max(worst, r / std::max(1.0, std::abs(sys.rhs[s])));
  }
  return worst;
}

double default_scaling(std::size_t n, std::size_t m, unsigned d) {
  return 1.0 / (10.0 * d * std::sqrt(static_cast<double>(m)) * std::log(static_cast<double>(n) + 1.0));
}

namespace {

nlohmann::json provenance_json(const Provenance& p) {
  switch (p.kind) {
    case ProvenanceKind::Null:
      return {{"kind", "null"}};
    case ProvenanceKind::Planted:
      return {{"kind", "planted"}, {"z", p.z}, {"scaling", p.scaling}};
    case ProvenanceKind::Custom:
      break;
  }
  return {{"kind", "custom"}};
}

Provenance provenance_from(const nlohmann::json& j) {
  Provenance p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "null") {
    p.kind = ProvenanceKind::Null;
  } else if (kind == "planted") {
    p.kind = ProvenanceKind::Planted;
    p.z = j.at("z").get<std::vector<double>>();
    p.scaling = j.at("scaling").get<double>();
  } else {
    p.kind = ProvenanceKind::Custom;
  }
  return p;
}

template <class T, class F>
nlohmann::json to_json_impl(const PolynomialSystem<T>& sys, F&& conv) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& G : sys.tensors) {
    nlohmann::json flat = nlohmann::json::array();
    for (const auto& e : G.entries) flat.push_back(conv(e));
    tensors.push_back(std::move(flat));
  }
  nlohmann::json rhs = nlohmann::json::array();
  for (const auto& b : sys.rhs) rhs.push_back(conv(b));
  return {{"n", sys.n},       {"m", sys.m},     {"D", sys.D},
          {"tensors", tensors}, {"rhs", rhs}, {"provenance", provenance_json(sys.provenance)}};
}

template <class T, class F>
PolynomialSystem<T> from_json_impl(const nlohmann::json& j, F&& conv) {
  PolynomialSystem<T> sys;
  sys.n = j.at("n").get<std::size_t>();
  sys.m = j.at("m").get<std::size_t>();
  sys.D = j.at("D").get<unsigned>();
  for (const auto& flat : j.at("tensors")) {
    CoefficientTensor<T> G(sys.D, sys.n);
    if (flat.size() != G.size()) throw std::invalid_argument("system json: tensor has wrong entry count");
    for (std::size_t k = 0; k < G.size(); ++k) G.entries[k] = conv(flat[k]);
    sys.tensors.push_back(std::move(G));
  }
  for (const auto& b : j.at("rhs")) sys.rhs.push_back(conv(b));
  if (j.contains("provenance")) sys.provenance = provenance_from(j.at("provenance"));
  sys.validate();
  return sys;
}

}  // namespace

nlohmann::json system_to_json(const RationalSystem& sys) {
  return to_json_impl(sys, [](const Rational& q) { return to_string(q); });
}

nlohmann::json system_to_json(const RealSystem& sys) {
  return to_json_impl(sys, [](double v) { return v; });
}

RationalSystem rational_system_from_json(const nlohmann::json& j) {
  return from_json_impl<Rational>(j, [](const nlohmann::json& v) {
    return v.is_string() ? parse_rational(v.get<std::string>()) : Rational(v.get<long>());
  });
}

RealSystem real_system_from_json(const nlohmann::json& j) {
  return from_json_impl<double>(j, [](const nlohmann::json& v) {
    return v.is_string() ? parse_rational(v.get<std::string>()).get_d() : v.get<double>();
  });
}

}  // namespace polyrefute
