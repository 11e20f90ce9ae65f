// Matrix, Sampling and Transform motifs.

#include <algorithm>
#include <cmath>

#include "motifbench/error.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/rng.hpp"

namespace motifbench::kernels {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: dimension mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " * " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()));
  }
  const std::size_t n = a.rows(), m = b.cols(), inner = a.cols();
  std::vector<double> c(n * m, 0.0);
  const auto ad = a.data();
  const auto bd = b.data();
  // i-k-j order: the inner loop streams rows of b.
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c.data() + i * m;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = ad[i * inner + k];
      const double* brow = bd.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
  return Matrix(n, m, std::move(c));
}

Matrix mat_elementwise(const Matrix& a, const Matrix& b, ElementwiseOp op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("elementwise: shape mismatch");
  }
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (op) {
      case ElementwiseOp::Add: out[i] = x[i] + y[i]; break;
      case ElementwiseOp::Subtract: out[i] = x[i] - y[i]; break;
      case ElementwiseOp::Hadamard: out[i] = x[i] * y[i]; break;
    }
  }
  return Matrix(a.rows(), a.cols(), std::move(out));
}

Tensor fully_connected(const Tensor& x, const Matrix& w, const Tensor& bias) {
  if (x.rank() < 2) throw InvalidArgument("fully_connected: input must be [batch, features]");
  const std::size_t batch = x.shape()[0];
  const std::size_t in = x.size() / batch;
  if (in != w.rows()) {
    throw InvalidArgument("fully_connected: input features " + std::to_string(in) +
                          " != weight rows " + std::to_string(w.rows()));
  }
  if (bias.rank() != 1 || bias.shape()[0] != w.cols()) {
    throw InvalidArgument("fully_connected: bias must have shape [" +
                          std::to_string(w.cols()) + "]");
  }
  const Matrix flat(batch, in, std::vector<double>(x.data().begin(), x.data().end()));
  const Matrix y = matmul(flat, w);
  std::vector<double> out(y.data().begin(), y.data().end());
  const auto b = bias.data();
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) out[r * w.cols() + c] += b[c];
  }
  return Tensor({batch, w.cols()}, std::move(out));
}

namespace {

void check_fraction(double f, std::string_view what) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw InvalidArgument(std::string(what) + " must be in [0, 1]");
  }
}

template <typename T>
std::vector<T> sample_records(const std::vector<T>& in, double fraction, std::uint64_t seed) {
  check_fraction(fraction, "random_sample: fraction");
  SplitMix64 rng(seed);
  std::vector<T> out;
  for (const auto& rec : in) {
    if (rng.bernoulli(fraction)) out.push_back(rec);
  }
  return out;
}

}  // namespace

TextCorpus random_sample(const TextCorpus& input, double fraction, std::uint64_t seed) {
  return TextCorpus(sample_records(input.documents(), fraction, seed));
}

Table random_sample(const Table& input, double fraction, std::uint64_t seed) {
  return Table(input.schema(), sample_records(input.rows(), fraction, seed));
}

Tensor pool(const Tensor& x, std::size_t window, std::size_t stride, PoolMode mode) {
  if (x.rank() != 4) throw InvalidArgument("pool: input must be [batch, h, w, c]");
  if (window < 1 || stride < 1) throw InvalidArgument("pool: window and stride must be >= 1");
  const auto& s = x.shape();
  const std::size_t batch = s[0], h = s[1], w = s[2], c = s[3];
  if (window > h || window > w) {
    throw InvalidArgument("pool: window " + std::to_string(window) +
                          " larger than input " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::size_t oh = (h - window) / stride + 1;
  const std::size_t ow = (w - window) / stride + 1;
  const auto in = x.data();
  std::vector<double> out(batch * oh * ow * c);
  const double area = static_cast<double>(window * window);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          double acc = mode == PoolMode::Max ? -INFINITY : 0.0;
          for (std::size_t di = 0; di < window; ++di) {
            for (std::size_t dj = 0; dj < window; ++dj) {
              const double v = in[((b * h + i * stride + di) * w + j * stride + dj) * c + ch];
              acc = mode == PoolMode::Max ? std::max(acc, v) : acc + v;
            }
          }
          out[((b * oh + i) * ow + j) * c + ch] = mode == PoolMode::Max ? acc : acc / area;
        }
      }
    }
  }
  return Tensor({batch, oh, ow, c}, std::move(out));
}

Matrix downsample(const Matrix& m, std::size_t factor) {
  if (factor < 1) throw InvalidArgument("downsample: factor must be >= 1");
  const std::size_t rows = (m.rows() + factor - 1) / factor;
  const std::size_t cols = (m.cols() + factor - 1) / factor;
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t r = 0; r < m.rows(); r += factor) {
    for (std::size_t c = 0; c < m.cols(); c += factor) out.push_back(m.at(r, c));
  }
  return Matrix(rows, cols, std::move(out));
}

Tensor dropout(const Tensor& x, double p, std::uint64_t seed) {
  check_fraction(p, "dropout: p");
  const auto in = x.data();
  std::vector<double> out(in.size(), 0.0);
  if (p >= 1.0) return Tensor(x.shape(), std::move(out));
  const double scale = 1.0 / (1.0 - p);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!rng.bernoulli(p)) out[i] = p == 0.0 ? in[i] : in[i] * scale;
  }
  return Tensor(x.shape(), std::move(out));
}

Tensor convolution(const Tensor& x, const Tensor& k, std::size_t stride, Padding padding) {
  if (x.rank() != 4) throw InvalidArgument("convolution: input must be [batch, h, w, c_in]");
  if (k.rank() != 4) throw InvalidArgument("convolution: kernel must be [kh, kw, c_in, c_out]");
  if (stride < 1) throw InvalidArgument("convolution: stride must be >= 1");
  const std::size_t batch = x.shape()[0], h = x.shape()[1], w = x.shape()[2],
                    cin = x.shape()[3];
  const std::size_t kh = k.shape()[0], kw = k.shape()[1], cout = k.shape()[3];
  if (k.shape()[2] != cin) {
    throw InvalidArgument("convolution: kernel expects " + std::to_string(k.shape()[2]) +
                          " input channels, input has " + std::to_string(cin));
  }
  std::size_t oh, ow, pad_top = 0, pad_left = 0;
  if (padding == Padding::Valid) {
    if (kh > h || kw > w) throw InvalidArgument("convolution: kernel larger than input");
    oh = (h - kh) / stride + 1;
    ow = (w - kw) / stride + 1;
  } else {
    oh = (h + stride - 1) / stride;
    ow = (w + stride - 1) / stride;
    const std::size_t need_h = (oh - 1) * stride + kh;
    const std::size_t need_w = (ow - 1) * stride + kw;
    pad_top = need_h > h ? (need_h - h) / 2 : 0;
    pad_left = need_w > w ? (need_w - w) / 2 : 0;
  }
  const auto in = x.data();
  const auto kd = k.data();
  std::vector<double> out(batch * oh * ow * cout, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double* o = out.data() + ((b * oh + i) * ow + j) * cout;
        for (std::size_t di = 0; di < kh; ++di) {
          const auto y = static_cast<std::ptrdiff_t>(i * stride + di) -
                         static_cast<std::ptrdiff_t>(pad_top);
          if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t dj = 0; dj < kw; ++dj) {
            const auto xx = static_cast<std::ptrdiff_t>(j * stride + dj) -
                            static_cast<std::ptrdiff_t>(pad_left);
            if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(w)) continue;
            const double* px = in.data() + ((b * h + y) * w + xx) * cin;
            const double* pk = kd.data() + (di * kw + dj) * cin * cout;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              for (std::size_t co = 0; co < cout; ++co) o[co] += px[ci] * pk[ci * cout + co];
            }
          }
        }
      }
    }
  }
  return Tensor({batch, oh, ow, cout}, std::move(out));
}

void lowpass(std::vector<std::complex<double>>& plane, std::size_t rows, std::size_t cols,
             std::size_t cutoff) {
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t fr = std::min(r, rows - r);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t fc = std::min(c, cols - c);
      if (fr > cutoff || fc > cutoff) plane[r * cols + c] = 0.0;
    }
  }
}

}  // namespace motifbench::kernels
