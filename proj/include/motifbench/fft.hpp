#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "motifbench/dataset.hpp"

namespace motifbench {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);

// Iterative radix-2 Cooley-Tukey. The inverse transform is scaled by 1/n.
// Throws InvalidArgument unless the length is a power of two.
std::vector<Complex> fft(std::span<const Complex> input, bool inverse = false);

struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> data;  // row-major

  Complex at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Row transforms followed by column transforms.
ComplexMatrix fft2d(const ComplexMatrix& m, bool inverse = false);
ComplexMatrix fft2d(const Matrix& m, bool inverse = false);

// Interleaved (re, im) tensors: shape [n, 2] or [rows, cols, 2].
Tensor to_tensor(std::span<const Complex> values);
Tensor to_tensor(const ComplexMatrix& m);
std::vector<Complex> complex_sequence(const Tensor& t);
ComplexMatrix complex_matrix(const Tensor& t);

}  // namespace motifbench
