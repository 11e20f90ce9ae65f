#include "motifbench/fft.hpp"

#include <cmath>
#include <numbers>

#include "motifbench/error.hpp"

namespace motifbench {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<Complex> fft(std::span<const Complex> input, bool inverse) {
  const std::size_t n = input.size();
  if (!is_power_of_two(n)) {
    throw InvalidArgument("fft: length " + std::to_string(n) + " is not a power of two");
  }
  std::vector<Complex> a(input.begin(), input.end());

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles are evaluated directly rather than by repeated multiplication
    // so error does not accumulate across a stage.
    std::vector<Complex> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      w[k] = Complex(std::cos(angle), std::sin(angle));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= scale;
  }
  return a;
}

ComplexMatrix fft2d(const ComplexMatrix& m, bool inverse) {
  if (!is_power_of_two(m.rows) || !is_power_of_two(m.cols)) {
    throw InvalidArgument("fft2d: dimensions " + std::to_string(m.rows) + "x" +
                          std::to_string(m.cols) + " are not powers of two");
  }
  ComplexMatrix out{m.rows, m.cols, std::vector<Complex>(m.data.size())};
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = fft(std::span<const Complex>(m.data).subspan(r * m.cols, m.cols), inverse);
    std::copy(row.begin(), row.end(), out.data.begin() + r * m.cols);
  }
  std::vector<Complex> col(m.rows);
  for (std::size_t c = 0; c < m.cols; ++c) {
    for (std::size_t r = 0; r < m.rows; ++r) col[r] = out.data[r * m.cols + c];
    auto t = fft(col, inverse);
    for (std::size_t r = 0; r < m.rows; ++r) out.data[r * m.cols + c] = t[r];
  }
  return out;
}

ComplexMatrix fft2d(const Matrix& m, bool inverse) {
  ComplexMatrix c{m.rows(), m.cols(), {}};
  c.data.assign(m.data().begin(), m.data().end());
  return fft2d(c, inverse);
}

Tensor to_tensor(std::span<const Complex> values) {
  std::vector<double> data;
  data.reserve(2 * values.size());
  for (auto v : values) {
    data.push_back(v.real());
    data.push_back(v.imag());
  }
  return Tensor({values.size(), 2}, std::move(data));
}

Tensor to_tensor(const ComplexMatrix& m) {
  std::vector<double> data;
  data.reserve(2 * m.data.size());
  for (auto v : m.data) {
    data.push_back(v.real());
    data.push_back(v.imag());
  }
  return Tensor({m.rows, m.cols, 2}, std::move(data));
}

std::vector<Complex> complex_sequence(const Tensor& t) {
  const auto data = t.data();
  if (t.rank() == 1) return std::vector<Complex>(data.begin(), data.end());
  if (t.rank() == 2 && t.shape()[1] == 2) {
    std::vector<Complex> out(t.shape()[0]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {data[2 * i], data[2 * i + 1]};
    return out;
  }
  throw InvalidArgument("complex sequence needs a tensor of shape [n] or [n,2]");
}

ComplexMatrix complex_matrix(const Tensor& t) {
  if (t.rank() != 3 || t.shape()[2] != 2) {
    throw InvalidArgument("complex matrix needs a tensor of shape [rows,cols,2]");
  }
  ComplexMatrix m{t.shape()[0], t.shape()[1], {}};
  const auto data = t.data();
  m.data.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = {data[2 * i], data[2 * i + 1]};
  return m;
}

}  // namespace motifbench
