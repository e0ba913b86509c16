#include "polylab/noise.hpp"

#include <array>
#include <cmath>
#include <string>

#include "polylab/error.hpp"

namespace polylab {
namespace {

constexpr int kMaxDim = 16;

std::uint64_t time_prefix(std::uint64_t master_seed, std::int64_t j) {
  return rng::absorb(rng::domain_seed(rng::kNoiseDomain, master_seed), static_cast<std::uint64_t>(j));
}

struct NoLog {
  void operator()(const std::array<std::int64_t, kMaxDim>&, int, double, double) const noexcept {}
};

struct VectorLog {
  std::vector<CellVisit>* out;
  void operator()(const std::array<std::int64_t, kMaxDim>& idx, int d, double phi_value, double z) const {
    out->push_back(CellVisit{{idx.begin(), idx.begin() + d}, phi_value, z});
  }
};

// Walks the lattice points strictly inside the support ball around x, one
// axis at a time; the hash prefix is extended as each coordinate is fixed.
template <class Log>
class BallWalker {
 public:
  BallWalker(const VirtualNoiseField& field, const MollifierSpec& spec, std::span<const double> x,
             Log log)
      : field_(field), spec_(spec), x_(x), log_(log), d_(field.dim) {
    k2_ = spec.radius * spec.radius;
    inv_k2_ = 1.0 / k2_;
  }

  void walk(std::uint64_t prefix) { visit(0, 0.0, prefix); }

  double weighted_sum() const { return sum_; }
  double squared_sum() const { return sum_sq_; }
  long visited() const { return visited_; }

 private:
  void axis_range(int axis, double remaining2, std::int64_t& lo, std::int64_t& hi) const {
    const double reach = std::sqrt(remaining2);
    const double base = x_[axis] - field_.offset[axis];
    lo = static_cast<std::int64_t>(std::ceil((base - reach) / field_.h));
    hi = static_cast<std::int64_t>(std::floor((base + reach) / field_.h));
  }

  void visit(int axis, double partial, std::uint64_t prefix) {
    const double remaining = k2_ - partial;
    if (remaining <= 0.0) return;
    std::int64_t lo = 0, hi = 0;
    axis_range(axis, remaining, lo, hi);
    const double origin = field_.offset[axis] - x_[axis];
    if (axis + 1 < d_) {
      for (std::int64_t k = lo; k <= hi; ++k) {
        const double dy = origin + field_.h * static_cast<double>(k);
        const double r2 = partial + dy * dy;
        if (r2 >= k2_) continue;
        idx_[axis] = k;
        visit(axis + 1, r2, rng::absorb(prefix, static_cast<std::uint64_t>(k)));
      }
      return;
    }
    std::int64_t cached_pair = lo - 2;  // never equal to a real pair index
    double z_even = 0.0, z_odd = 0.0;
    bool have_pair = false;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double dy = origin + field_.h * static_cast<double>(k);
      const double r2 = partial + dy * dy;
      if (r2 >= k2_) continue;
      const double phi_value = spec_.norm_const * std::exp(-1.0 / (1.0 - r2 * inv_k2_));
      const std::int64_t pair = k >> 1;
      if (!have_pair || pair != cached_pair) {
        const auto [c, s] = rng::normal_pair(rng::absorb(prefix, static_cast<std::uint64_t>(pair)));
        z_even = c;
        z_odd = s;
        cached_pair = pair;
        have_pair = true;
      }
      const double z = (k & 1) ? z_odd : z_even;
      sum_ += phi_value * z;
      sum_sq_ += phi_value * phi_value;
      ++visited_;
      idx_[axis] = k;
      log_(idx_, d_, phi_value, z);
    }
  }

  const VirtualNoiseField& field_;
  const MollifierSpec& spec_;
  std::span<const double> x_;
  Log log_;
  int d_;
  double k2_ = 0.0;
  double inv_k2_ = 0.0;
  std::array<std::int64_t, kMaxDim> idx_{};
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  long visited_ = 0;
};

template <class Log>
PairingResult pair_impl(const VirtualNoiseField& field, const MollifierSpec& spec,
                        std::span<const double> x, std::int64_t j, Log log) {
  check_geometry(field, spec);
  if (static_cast<int>(x.size()) != field.dim) {
    throw GeometryMismatch("point dimension does not match noise field dimension");
  }
  BallWalker<Log> walker(field, spec, x, log);
  walker.walk(time_prefix(field.master_seed, j));
  if (walker.visited() == 0) {
    throw GeometryMismatch("no lattice point inside the mollifier support");
  }
  const double cell_volume = std::pow(field.h, field.dim);
  return PairingResult{walker.weighted_sum() * std::sqrt(field.dt * cell_volume),
                       walker.squared_sum() * cell_volume};
}

}  // namespace

VirtualNoiseField make_noise_field(std::uint64_t master_seed, double dt, double h, int dim,
                                   std::vector<double> offset) {
  if (!(dt > 0.0)) throw InvalidArgument("noise time step dt must be positive");
  if (!(h > 0.0)) throw InvalidArgument("noise lattice spacing h must be positive");
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("noise dimension out of range");
  if (offset.empty()) offset.assign(dim, 0.0);
  if (static_cast<int>(offset.size()) != dim) throw InvalidArgument("offset dimension mismatch");
  for (double o : offset) {
    if (!(o >= 0.0 && o < h)) throw InvalidArgument("grid offset components must lie in [0, h)");
  }
  return VirtualNoiseField{master_seed, dt, h, dim, std::move(offset)};
}

VirtualNoiseField with_seed(VirtualNoiseField field, std::uint64_t master_seed) {
  field.master_seed = master_seed;
  return field;
}

std::uint64_t cell_hash(std::uint64_t master_seed, std::int64_t j, std::span<const std::int64_t> k) {
  std::uint64_t state = time_prefix(master_seed, j);
  for (std::size_t a = 0; a + 1 < k.size(); ++a) state = rng::absorb(state, static_cast<std::uint64_t>(k[a]));
  if (!k.empty()) state = rng::absorb(state, static_cast<std::uint64_t>(k.back() >> 1));
  return state;
}

double gaussian_at(const VirtualNoiseField& field, std::int64_t j, std::span<const std::int64_t> k) {
  if (static_cast<int>(k.size()) != field.dim) throw InvalidArgument("cell index dimension mismatch");
  const auto [c, s] = rng::normal_pair(cell_hash(field.master_seed, j, k));
  return (k.back() & 1) ? s : c;
}

void check_geometry(const VirtualNoiseField& field, const MollifierSpec& spec) {
  if (field.dim != spec.dim) {
    throw GeometryMismatch("noise field dimension " + std::to_string(field.dim) +
                           " differs from mollifier dimension " + std::to_string(spec.dim));
  }
  if (field.h > 0.5 * spec.radius) {
    throw GeometryMismatch("lattice spacing h=" + std::to_string(field.h) +
                           " exceeds K/2 for K=" + std::to_string(spec.radius));
  }
}

PairingResult pair_with_kernel(const VirtualNoiseField& field, const MollifierSpec& spec,
                               std::span<const double> x, std::int64_t j) {
  return pair_impl(field, spec, x, j, NoLog{});
}

PairingResult pair_with_kernel_logged(const VirtualNoiseField& field, const MollifierSpec& spec,
                                      std::span<const double> x, std::int64_t j,
                                      std::vector<CellVisit>& log) {
  return pair_impl(field, spec, x, j, VectorLog{&log});
}

}  // namespace polylab
