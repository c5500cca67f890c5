#pragma once

// Orthogonal mirrored-direction sampling: d Gaussian vectors are drawn,
// orthonormalized, and rescaled to their original norms, so each direction
// keeps a chi-distributed length while the set is exactly orthogonal.

#include <cstddef>
#include <vector>

#include "hees/errors.hpp"
#include "hees/linalg.hpp"
#include "hees/rng.hpp"

namespace hees {

/// d mutually orthogonal directions b_i with ||b_i|| equal to the norm n_i of
/// the i-th raw Gaussian draw.
struct OrthogonalSampleBlock {
  std::size_t dim = 0;
  std::vector<Vector> directions;
  std::vector<double> norms;
};

inline Vector standard_normal_vector(RngStream& rng, std::size_t d) {
  Vector z(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = rng.next_gaussian();
  return z;
}

/// Draws exactly d Gaussian vectors, orthonormalizes them by Gram-Schmidt and
/// restores the raw norms. The measure-zero degenerate draw is retried with
/// the next stream values.
inline OrthogonalSampleBlock sample_orthogonal(RngStream& rng, std::size_t d) {
  for (;;) {
    std::vector<Vector> z;
    z.reserve(d);
    for (std::size_t i = 0; i < d; ++i) z.push_back(standard_normal_vector(rng, d));

    std::vector<double> norms(d);
    for (std::size_t i = 0; i < d; ++i) norms[i] = norm(z[i]);

    std::vector<Vector> q;
    try {
      q = gram_schmidt(z);
    } catch (const DegenerateInput&) {
      continue;
    }

    OrthogonalSampleBlock block;
    block.dim = d;
    block.norms = std::move(norms);
    block.directions.reserve(d);
    for (std::size_t i = 0; i < d; ++i) block.directions.push_back(block.norms[i] * q[i]);
    return block;
  }
}

}  // namespace hees
