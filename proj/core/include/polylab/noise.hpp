#pragma once

// Quenched space-time white noise on a lattice, generated on demand.
//
// Cell (j, k) covers the time slab [j dt, (j+1) dt) and the lattice point
// y_k = offset + h k. Its white-noise mass is sqrt(dt h^d) * Z(j, k) with
// Z(j, k) a standard normal that depends only on (master_seed, j, k).

#include <cstdint>
#include <span>
#include <vector>

#include "polylab/counter_rng.hpp"
#include "polylab/kernels.hpp"

namespace polylab {

struct VirtualNoiseField {
  std::uint64_t master_seed = 0;
  double dt = 0.05;
  double h = 0.25;
  int dim = 3;
  std::vector<double> offset;  // grid phase, each component in [0, h)
};

VirtualNoiseField make_noise_field(std::uint64_t master_seed, double dt, double h, int dim,
                                   std::vector<double> offset = {});

// Same geometry, different realization.
VirtualNoiseField with_seed(VirtualNoiseField field, std::uint64_t master_seed);

// 64-bit hash of a cell key before the normal sampler. Exposed for
// avalanche testing.
std::uint64_t cell_hash(std::uint64_t master_seed, std::int64_t j, std::span<const std::int64_t> k);

double gaussian_at(const VirtualNoiseField& field, std::int64_t j, std::span<const std::int64_t> k);

struct PairingResult {
  double value = 0.0;     // sum_k phi(y_k - x) sqrt(dt h^d) Z(j, k)
  double local_v0 = 0.0;  // sum_k phi(y_k - x)^2 h^d over the same cells
};

// Throws GeometryMismatch unless dims agree and h <= K/2.
void check_geometry(const VirtualNoiseField& field, const MollifierSpec& spec);

PairingResult pair_with_kernel(const VirtualNoiseField& field, const MollifierSpec& spec,
                               std::span<const double> x, std::int64_t j);

// Instrumented variant: calls on_cell(k, phi_value, z) for every lattice
// point inside the open support ball around x.
struct CellVisit {
  std::vector<std::int64_t> k;
  double phi = 0.0;
  double z = 0.0;
};
PairingResult pair_with_kernel_logged(const VirtualNoiseField& field, const MollifierSpec& spec,
                                      std::span<const double> x, std::int64_t j,
                                      std::vector<CellVisit>& log);

}  // namespace polylab
