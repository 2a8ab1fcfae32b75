#pragma once

// Gaussian entropy vectors: g_s = (1/T) ln det R_s and the normalized joint
// entropy h_s = g_s/2 + (|s|/2) log 2*pi*e. Natural log internally; base
// conversion only at the g <-> h interface.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gentropy/matrices.hpp"

namespace gentropy {

enum class EntropyKind { g, h_normalized };

struct EntropyVector {
  EntropyKind kind = EntropyKind::g;
  SubsetVector data;
};

struct NonPositiveMinor : std::runtime_error {
  SubsetMask subset;
  explicit NonPositiveMinor(SubsetMask s)
      : std::runtime_error("non-positive principal minor for subset " +
                           subset_to_string(s)),
        subset(s) {}
};

inline EntropyVector entropy_g(const BlockCovariance& r) {
  EntropyVector g{EntropyKind::g, SubsetVector(r.n)};
  for (SubsetMask s : enumerate_subsets(r.n)) {
    const double det = principal_minor(r, s);
    if (det <= 0.0) throw NonPositiveMinor(s);
    g.data[s] = std::log(det) / r.T;
  }
  return g;
}

inline EntropyVector entropy_g(const SymmetricMatrix& a) {
  return entropy_g(BlockCovariance::from_scalar(a));
}

inline double two_pi_e() { return 2.0 * std::numbers::pi * std::numbers::e; }

inline EntropyVector g_to_h(const EntropyVector& g, double log_base = std::numbers::e) {
  if (g.kind != EntropyKind::g) throw std::invalid_argument("g_to_h: kind must be g");
  if (!(log_base > 1.0)) throw std::invalid_argument("g_to_h: log base must exceed 1");
  const double lb = std::log(log_base);
  EntropyVector h{EntropyKind::h_normalized, SubsetVector(g.data.n)};
  for (SubsetMask s : enumerate_subsets(g.data.n))
    h.data[s] = 0.5 * g.data[s] / lb + 0.5 * cardinality(s) * std::log(two_pi_e()) / lb;
  return h;
}

inline EntropyVector h_to_g(const EntropyVector& h, double log_base = std::numbers::e) {
  if (h.kind != EntropyKind::h_normalized)
    throw std::invalid_argument("h_to_g: kind must be h_normalized");
  if (!(log_base > 1.0)) throw std::invalid_argument("h_to_g: log base must exceed 1");
  const double lb = std::log(log_base);
  EntropyVector g{EntropyKind::g, SubsetVector(h.data.n)};
  for (SubsetMask s : enumerate_subsets(h.data.n))
    g.data[s] = 2.0 * h.data[s] * lb - cardinality(s) * std::log(two_pi_e());
  return g;
}

}  // namespace gentropy
