#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <type_traits>

#include "swann/nn/mlp.hpp"

namespace swann::nn {

// Execution mode for the data-parallel batch kernels. Every kernel has a
// serial reference path and an OpenMP path that must produce bit-identical
// results: per-element work is the same code either way, and reductions
// run in a fixed order independent of thread count.
enum class ExecMode { Serial, OpenMP };

namespace detail {
void omp_for(int n, void* ctx, void (*fn)(void*, int));
}

template <class F>
void for_each_index(ExecMode mode, int n, F&& f) {
  using Fn = std::remove_reference_t<F>;
  if (mode == ExecMode::OpenMP) {
    auto thunk = [](void* ctx, int i) { (*static_cast<Fn*>(ctx))(i); };
    detail::omp_for(n, std::addressof(f), thunk);
  } else {
    for (int i = 0; i < n; ++i) f(i);
  }
}

// out[p] = sum over rows of rows[r*stride + p], accumulated in ascending
// row order for every p (thread-count invariant); parallel over p.
void reduce_rows(ExecMode mode, const double* rows, int n_rows, size_t stride,
                 size_t n_cols, double* out);

// Batched inference: inputs is B x input_size row-major, outputs B x output.
void batch_forward(ExecMode mode, const Mlp& net,
                   std::span<const double> inputs, int batch,
                   std::span<double> outputs);

}  // namespace swann::nn
