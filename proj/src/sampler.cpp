#include "dgm/sampler.hpp"

#include <cmath>
#include <sstream>

#include "dgm/errors.hpp"

namespace dgm {

std::size_t boundary_count(std::size_t total, double boundary_fraction) {
  // Guard against products such as 0.2 * 1000 landing a hair above an integer.
  const double raw = boundary_fraction * static_cast<double>(total);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

void sample_interior_point(Rng& rng, std::span<double> out) {
  for (double& v : out) v = rng.uniform_open();
}

void sample_boundary_point(Rng& rng, std::span<double> out) {
  const std::size_t d = out.size();
  const std::size_t face = rng.below(2 * d);
  for (double& v : out) v = rng.uniform_open();
  out[face / 2] = (face % 2 == 0) ? 0.0 : 1.0;
}

std::size_t face_of(std::span<const double> x) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] == 0.0) return 2 * j;
    if (x[j] == 1.0) return 2 * j + 1;
  }
  throw DomainError("face_of: point is not on a face of the unit cube");
}

Dataset sample_dataset(std::size_t dim, std::size_t total, double boundary_fraction, std::uint64_t seed) {
  if (dim < 2) throw ConfigError("dataset dimension must be >= 2");
  if (total < 2) throw ConfigError("dataset total must be >= 2");
  if (!(boundary_fraction > 0.0 && boundary_fraction < 1.0))
    throw ConfigError("boundary_fraction must lie in (0, 1)");
  const std::size_t nb = std::min(boundary_count(total, boundary_fraction), total - 1);
  const std::size_t ni = total - nb;

  Dataset ds;
  ds.seed = seed;
  ds.total = total;
  ds.boundary_fraction = boundary_fraction;
  ds.interior = PointSet(dim);
  ds.boundary = PointSet(dim);
  ds.interior.reserve(ni);
  ds.boundary.reserve(nb);

  std::vector<double> x(dim);
  Rng interior_rng(mix_seed(seed, 21));
  for (std::size_t i = 0; i < ni; ++i) {
    sample_interior_point(interior_rng, x);
    ds.interior.push_back(x);
  }
  Rng boundary_rng(mix_seed(seed, 22));
  for (std::size_t i = 0; i < nb; ++i) {
    sample_boundary_point(boundary_rng, x);
    ds.boundary.push_back(x);
  }
  return ds;
}

BatchStream::BatchStream(const PointSet& pool, std::size_t batch_size, std::uint64_t seed)
    : pool_(&pool), batch_(batch_size), rng_(seed) {
  if (pool.empty()) throw ConfigError("cannot draw batches from an empty point set");
  if (batch_size == 0 || batch_size > pool.size())
    throw ConfigError("batch size " + std::to_string(batch_size) + " must lie in [1, " +
                      std::to_string(pool.size()) + "]");
  order_.resize(pool.size());
  reshuffle();
}

void BatchStream::reshuffle() {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
  cursor_ = 0;
}

std::vector<std::size_t> BatchStream::next_indices() {
  if (cursor_ + batch_ > order_.size()) reshuffle();
  std::vector<std::size_t> out(order_.begin() + cursor_, order_.begin() + cursor_ + batch_);
  cursor_ += batch_;
  return out;
}

PointSet BatchStream::next() {
  PointSet out(pool_->dim());
  out.reserve(batch_);
  for (std::size_t idx : next_indices()) out.push_back((*pool_)[idx]);
  return out;
}

std::string BatchStream::state() const {
  std::ostringstream os;
  os << cursor_ << ' ' << order_.size();
  for (std::size_t v : order_) os << ' ' << v;
  os << ' ' << rng_.state();
  return os.str();
}

void BatchStream::set_state(const std::string& text) {
  std::istringstream is(text);
  std::size_t cursor = 0, n = 0;
  is >> cursor >> n;
  if (!is || n != pool_->size()) throw ConfigError("batch stream state does not match the dataset");
  std::vector<std::size_t> order(n);
  for (auto& v : order) is >> v;
  std::string rest;
  std::getline(is >> std::ws, rest);
  if (!is && !is.eof()) throw ConfigError("malformed batch stream state");
  rng_.set_state(rest);
  order_ = std::move(order);
  cursor_ = cursor;
}

BatchSampler::BatchSampler(const Dataset& dataset, std::size_t interior_batch, std::size_t boundary_batch,
                           std::uint64_t seed, SamplingMode mode)
    : dataset_(&dataset),
      interior_batch_(interior_batch),
      boundary_batch_(boundary_batch),
      mode_(mode),
      interior_(dataset.interior, std::min(interior_batch, std::max<std::size_t>(dataset.interior.size(), 1)),
                mix_seed(seed, 31)),
      boundary_(dataset.boundary, std::min(boundary_batch, std::max<std::size_t>(dataset.boundary.size(), 1)),
                mix_seed(seed, 32)),
      fresh_(mix_seed(seed, 33)) {
  if (mode == SamplingMode::fixed &&
      (interior_batch > dataset.interior.size() || boundary_batch > dataset.boundary.size()))
    throw ConfigError("batch sizes exceed the dataset (" + std::to_string(dataset.interior.size()) +
                      " interior, " + std::to_string(dataset.boundary.size()) + " boundary points)");
}

Batch BatchSampler::next() {
  if (mode_ == SamplingMode::fixed) return {interior_.next(), boundary_.next()};
  const std::size_t d = dataset_->dim();
  Batch b{PointSet(d), PointSet(d)};
  b.interior.reserve(interior_batch_);
  b.boundary.reserve(boundary_batch_);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < interior_batch_; ++i) {
    sample_interior_point(fresh_, x);
    b.interior.push_back(x);
  }
  for (std::size_t i = 0; i < boundary_batch_; ++i) {
    sample_boundary_point(fresh_, x);
    b.boundary.push_back(x);
  }
  return b;
}

std::string BatchSampler::state() const {
  return interior_.state() + "\n" + boundary_.state() + "\n" + fresh_.state();
}

void BatchSampler::set_state(const std::string& text) {
  std::istringstream is(text);
  std::string a, b, c;
  std::getline(is, a);
  std::getline(is, b);
  std::getline(is, c, '\0');
  interior_.set_state(a);
  boundary_.set_state(b);
  fresh_.set_state(c);
}

}  // namespace dgm
