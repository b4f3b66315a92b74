#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dgm/points.hpp"
#include "dgm/random.hpp"

namespace dgm {

/// Fixed collocation set: uniform interior points in (0,1)^d and uniform
/// points on the open faces of the cube (corners and edges are never hit).
struct Dataset {
  PointSet interior;
  PointSet boundary;
  std::uint64_t seed = 0;
  std::size_t total = 0;
  double boundary_fraction = 0.2;

  std::size_t dim() const { return interior.dim(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// ceil(fraction * total) boundary points, the rest interior.
Dataset sample_dataset(std::size_t dim, std::size_t total, double boundary_fraction, std::uint64_t seed);

/// Number of boundary points sample_dataset allocates.
std::size_t boundary_count(std::size_t total, double boundary_fraction);

void sample_interior_point(Rng& rng, std::span<double> out);
/// Picks one of the 2d faces uniformly (all faces of the unit cube have equal area).
void sample_boundary_point(Rng& rng, std::span<double> out);

/// Face index of a boundary point: 2*axis + (coordinate == 1). Throws DomainError off the boundary.
std::size_t face_of(std::span<const double> x);

/// Epoch-wise without-replacement minibatches over one point pool.
class BatchStream {
 public:
  BatchStream(const PointSet& pool, std::size_t batch_size, std::uint64_t seed);

  PointSet next();
  /// Indices into the pool of the batch `next()` would return; advances the stream.
  std::vector<std::size_t> next_indices();

  std::size_t batch_size() const { return batch_; }
  std::string state() const;
  void set_state(const std::string& text);

 private:
  void reshuffle();

  const PointSet* pool_;
  std::size_t batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct Batch {
  PointSet interior;
  PointSet boundary;
};

enum class SamplingMode { fixed, fresh };

/// Produces the per-iteration samples: minibatches of a fixed dataset, or
/// freshly drawn points every call.
class BatchSampler {
 public:
  BatchSampler(const Dataset& dataset, std::size_t interior_batch, std::size_t boundary_batch,
               std::uint64_t seed, SamplingMode mode = SamplingMode::fixed);

  Batch next();
  std::string state() const;
  void set_state(const std::string& text);

 private:
  const Dataset* dataset_;
  std::size_t interior_batch_;
  std::size_t boundary_batch_;
  SamplingMode mode_;
  BatchStream interior_;
  BatchStream boundary_;
  Rng fresh_;
};

}  // namespace dgm
