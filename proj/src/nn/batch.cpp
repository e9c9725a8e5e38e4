#include "swann/nn/batch.hpp"

#include <exception>
#include <stdexcept>

namespace swann::nn {

namespace detail {

void omp_for(int n, void* ctx, void (*fn)(void*, int)) {
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      fn(ctx, i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

void reduce_rows(ExecMode mode, const double* rows, int n_rows, size_t stride,
                 size_t n_cols, double* out) {
  auto col_sum = [&](int p) {
    double acc = 0.0;
    for (int r = 0; r < n_rows; ++r) acc += rows[r * stride + p];
    out[p] = acc;
  };
  for_each_index(mode, static_cast<int>(n_cols), col_sum);
}

void batch_forward(ExecMode mode, const Mlp& net,
                   std::span<const double> inputs, int batch,
                   std::span<double> outputs) {
  const size_t in = net.input_size();
  const size_t out = net.output_size();
  if (inputs.size() != in * batch || outputs.size() != out * batch)
    throw std::invalid_argument("batch_forward: size mismatch");
  for_each_index(mode, batch, [&](int e) {
    FwdCache cache;
    forward(net, inputs.subspan(e * in, in), cache);
    const auto& y = cache.act.back();
    for (size_t j = 0; j < out; ++j) outputs[e * out + j] = y[j];
  });
}

}  // namespace swann::nn
