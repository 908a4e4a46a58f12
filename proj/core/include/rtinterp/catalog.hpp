#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtinterp/field.hpp"
#include "rtinterp/poly.hpp"

namespace rtinterp {

struct CatalogOptions {
  int dim = 3;
  std::uint64_t seed = 1;
  /// Layer width of smooth-exp-layer.
  double eps = 0.1;
};

struct CatalogEntry {
  std::string name;
  int dim = 3;
  AnalyticField field;
  int max_order = kUnlimitedOrder;
  std::string smoothness;
};

/// Registered names: paper-2d-example, counterexample-k<K>, poly-deg<D>,
/// smooth-trig, smooth-exp-layer. Throws ValidationError for anything else
/// or when the divergence self-check fails.
CatalogEntry catalog_lookup(const std::string& name, const CatalogOptions& options = {});

std::vector<std::string> catalog_names();

/// Uniform on [-1, 1): mt19937_64 output u, ((u >> 11) * 2^-53) * 2 - 1.
double catalog_uniform(std::uint64_t raw);

/// Each component in turn, coefficients drawn in multi_indices_up_to order.
VectorPoly random_vector_poly(int dim, int degree, std::uint64_t seed);

/// Largest |div u - trace J| over a fixed set of sample points in [0, 1]^dim.
double divergence_self_check(const AnalyticField& u);

}  // namespace rtinterp
