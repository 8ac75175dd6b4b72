#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace slowlight {

/// Row-major (zeta outer, tau inner) array over a lattice.
template <class T>
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::size_t n_zeta, std::size_t n_tau, T fill = T{})
      : n_zeta_(n_zeta), n_tau_(n_tau), data_(n_zeta * n_tau, fill) {}

  std::size_t n_zeta() const { return n_zeta_; }
  std::size_t n_tau() const { return n_tau_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t iz, std::size_t it) { return data_[iz * n_tau_ + it]; }
  const T& operator()(std::size_t iz, std::size_t it) const { return data_[iz * n_tau_ + it]; }

  std::span<T> row(std::size_t iz) { return {data_.data() + iz * n_tau_, n_tau_}; }
  std::span<const T> row(std::size_t iz) const { return {data_.data() + iz * n_tau_, n_tau_}; }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  friend bool operator==(const Field2D&, const Field2D&) = default;

 private:
  std::size_t n_zeta_ = 0;
  std::size_t n_tau_ = 0;
  std::vector<T> data_;
};

/// Runs fn(begin, end) over [0, n) in fixed-size chunks. Chunk boundaries do
/// not depend on `threads`, so per-chunk reductions combined in chunk order
/// are bitwise independent of the degree of parallelism.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunk, int threads, const Fn& fn) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  const auto run_chunk = [&](std::size_t c) { fn(c, c * chunk, std::min(n, (c + 1) * chunk)); };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }
  // The failure from the lowest-numbered chunk is rethrown after all workers
  // finish, so the reported error does not depend on scheduling.
  std::vector<std::exception_ptr> errors(n_chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n_chunks; c += workers) {
          try {
            run_chunk(c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Element-wise map over [0, n); each index is written by exactly one worker.
template <class Fn>
void parallel_for(std::size_t n, int threads, const Fn& fn) {
  parallel_chunks(n, 256, threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace slowlight
