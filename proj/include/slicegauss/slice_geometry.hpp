#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "slicegauss/integrands.hpp"
#include "slicegauss/vectors.hpp"

namespace slicegauss {

inline constexpr std::size_t kMaxAmbientDimension = std::size_t{1} << 20;

// The slice S^{n-1}(sqrt n) ∩ {x : <x, (u_i)_(n)> = p_i}, observed through
// its first k coordinates.
struct SliceSpec {
  OrthonormalFamily family;
  std::vector<double> p;
  std::size_t n = 0;
  std::size_t k = 1;
};

struct SliceGeometry {
  std::size_t n = 0;
  FiniteFrame frame;        // truncations and their orthonormal basis z
  std::vector<double> p;
  Vector center;            // least-norm point of the affine subspace
  Vector q;                 // coordinates of center in the basis z
  double radius = 0.0;      // sqrt(n - |q|^2)
  double scale_ratio = 0.0; // radius / sqrt(n)

  std::size_t gamma() const noexcept { return static_cast<std::size_t>(frame.basis.cols()); }
};

// Throws DegenerateFrame when the truncations have separation < 1e-10 and
// EmptySlice when the sphere misses the affine subspace.
SliceGeometry build_geometry(const SliceSpec& spec);
// Same construction from explicit constraint vectors (columns of an n x gamma matrix).
SliceGeometry build_geometry(const Matrix& constraints, std::span<const double> p);

// sum_i (p_i / ||(u_i)_(n)||^2) (u_i)_(n). Coincides with the least-norm
// center only when the truncations are mutually orthogonal.
Vector summed_center(const SliceSpec& spec);

struct SphereArea {
  double value = 0.0;  // may overflow to +inf for large d; log_value stays finite
  double log_value = 0.0;
};

// Surface area of S^d(a) = c_d a^d with c_d = 2 pi^((d+1)/2) / Gamma((d+1)/2).
SphereArea sphere_surface_area(std::size_t d, double a);

// Visits points of the uniform slice sampler for indices [begin, end).
// Point i is center + radius * w / |w| where w is the standard normal
// n-vector of stream (seed, i) with its span(z) component removed.
using SliceVisitor = std::function<void(std::size_t index, std::span<const double> point)>;
void visit_slice_samples(const SliceGeometry& geometry, std::size_t begin, std::size_t end,
                         std::uint64_t seed, const SliceVisitor& visit);

// count x n matrix of slice samples (intended for moderate count * n).
Matrix sample_slice(const SliceGeometry& geometry, std::size_t count, std::uint64_t seed,
                    unsigned threads = 1);

struct SliceEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

// Per-sample values f(pi_k(x_i)) for i in [0, count), in index order.
std::vector<double> slice_integrand_values(const SliceGeometry& geometry, const Integrand& f,
                                           std::size_t count, std::uint64_t seed,
                                           unsigned threads = 1);

// Monte Carlo estimate of the normalized surface integral of f over the slice.
SliceEstimate slice_integral_mc(const SliceGeometry& geometry, const Integrand& f,
                                std::size_t count, std::uint64_t seed, unsigned threads = 1);
SliceEstimate slice_integral_mc(const SliceSpec& spec, const Integrand& f, std::size_t count,
                                std::uint64_t seed, unsigned threads = 1);

}  // namespace slicegauss
