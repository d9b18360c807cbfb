#include "tg/ndnet/layers.hpp"

#include <algorithm>

#include "tg/errors.hpp"

namespace tg::nn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Index = Eigen::Index;
using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;
using MutVecMap = Eigen::Map<Vector>;

constexpr Index kKernel = 3;
constexpr Index kTaps = kKernel * kKernel;

Index shared_row(const Matrix& in, Index b) { return in.rows() == 1 ? 0 : b; }

void check_rows(const Matrix& in, const Matrix& d_out) {
  if (in.rows() != d_out.rows() && in.rows() != 1) {
    throw ShapeError("backward: cached input has " + std::to_string(in.rows()) + " rows, cotangent has " +
                     std::to_string(d_out.rows()));
  }
}

// col is [C*9 x H*W]; row c*9 + ky*3 + kx holds the input shifted by (ky-1, kx-1).
void im2col(const double* src, Index channels, Index height, Index width, Matrix& col) {
  col.resize(channels * kTaps, height * width);
  for (Index c = 0; c < channels; ++c) {
    const double* plane = src + c * height * width;
    for (Index ky = 0; ky < kKernel; ++ky) {
      for (Index kx = 0; kx < kKernel; ++kx) {
        double* dst = col.row(c * kTaps + ky * kKernel + kx).data();
        for (Index y = 0; y < height; ++y) {
          const Index sy = y + ky - 1;
          double* out = dst + y * width;
          if (sy < 0 || sy >= height) {
            std::fill(out, out + width, 0.0);
            continue;
          }
          const double* in_row = plane + sy * width;
          for (Index x = 0; x < width; ++x) {
            const Index sx = x + kx - 1;
            out[x] = (sx < 0 || sx >= width) ? 0.0 : in_row[sx];
          }
        }
      }
    }
  }
}

void col2im_add(const Matrix& col, Index channels, Index height, Index width, double* dst) {
  for (Index c = 0; c < channels; ++c) {
    double* plane = dst + c * height * width;
    for (Index ky = 0; ky < kKernel; ++ky) {
      for (Index kx = 0; kx < kKernel; ++kx) {
        const double* src = col.row(c * kTaps + ky * kKernel + kx).data();
        for (Index y = 0; y < height; ++y) {
          const Index sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          double* out_row = plane + sy * width;
          const double* in = src + y * width;
          for (Index x = 0; x < width; ++x) {
            const Index sx = x + kx - 1;
            if (sx >= 0 && sx < width) out_row[sx] += in[x];
          }
        }
      }
    }
  }
}

void dense_forward(const Dense& l, std::span<const double> p, const Matrix& in, Matrix& out) {
  const Index n_in = static_cast<Index>(l.in), n_out = static_cast<Index>(l.out);
  ConstMap w(p.data(), n_out, n_in);
  ConstVecMap bias(p.data() + n_out * n_in, n_out);
  out.noalias() = in * w.transpose();
  out.rowwise() += bias.transpose();
}

void dense_backward(const Dense& l, std::span<const double> p, const Matrix& in, const Matrix& d_out, Matrix* d_in,
                    const ParamGradSink& sink) {
  const Index n_in = static_cast<Index>(l.in), n_out = static_cast<Index>(l.out);
  ConstMap w(p.data(), n_out, n_in);
  if (sink.grads) {
    if (sink.per_sample) {
      for (Index b = 0; b < d_out.rows(); ++b) {
        double* g = sink.row(b);
        MutMap dw(g, n_out, n_in);
        dw.noalias() += d_out.row(b).transpose() * in.row(shared_row(in, b));
        MutVecMap(g + n_out * n_in, n_out) += d_out.row(b).transpose();
      }
    } else {
      double* g = sink.row(0);
      MutMap dw(g, n_out, n_in);
      if (in.rows() == d_out.rows()) {
        dw.noalias() += d_out.transpose() * in;
      } else {
        dw.noalias() += d_out.colwise().sum().transpose() * in.row(0);
      }
      MutVecMap(g + n_out * n_in, n_out) += d_out.colwise().sum().transpose();
    }
  }
  if (d_in) d_in->noalias() = d_out * w;
}

void conv_forward(const Conv2d& l, std::span<const double> p, const Matrix& in, Matrix& out) {
  const Index cin = static_cast<Index>(l.in_channels), cout = static_cast<Index>(l.out_channels);
  const Index h = static_cast<Index>(l.height), w = static_cast<Index>(l.width);
  ConstMap weights(p.data(), cout, cin * kTaps);
  ConstVecMap bias(p.data() + cout * cin * kTaps, cout);
  out.resize(in.rows(), cout * h * w);
  Matrix col;
  for (Index b = 0; b < in.rows(); ++b) {
    im2col(in.row(b).data(), cin, h, w, col);
    MutMap y(out.row(b).data(), cout, h * w);
    y.noalias() = weights * col;
    y.colwise() += bias;
  }
}

void conv_backward(const Conv2d& l, std::span<const double> p, const Matrix& in, const Matrix& d_out, Matrix* d_in,
                   const ParamGradSink& sink) {
  const Index cin = static_cast<Index>(l.in_channels), cout = static_cast<Index>(l.out_channels);
  const Index h = static_cast<Index>(l.height), w = static_cast<Index>(l.width);
  ConstMap weights(p.data(), cout, cin * kTaps);
  if (d_in) d_in->setZero(d_out.rows(), cin * h * w);
  Matrix col, d_col;
  Index col_row = -1;
  for (Index b = 0; b < d_out.rows(); ++b) {
    ConstMap dy(d_out.row(b).data(), cout, h * w);
    if (sink.grads) {
      const Index r = shared_row(in, b);
      if (r != col_row) {
        im2col(in.row(r).data(), cin, h, w, col);
        col_row = r;
      }
      double* g = sink.row(b);
      MutMap dw(g, cout, cin * kTaps);
      dw.noalias() += dy * col.transpose();
      MutVecMap(g + cout * cin * kTaps, cout) += dy.rowwise().sum();
    }
    if (d_in) {
      d_col.noalias() = weights.transpose() * dy;
      col2im_add(d_col, cin, h, w, d_in->row(b).data());
    }
  }
}

void pool_forward(const MaxPool2& l, const Matrix& in, Matrix& out) {
  const Index c = static_cast<Index>(l.channels), h = static_cast<Index>(l.height), w = static_cast<Index>(l.width);
  const Index oh = h / 2, ow = w / 2;
  out.resize(in.rows(), c * oh * ow);
  for (Index b = 0; b < in.rows(); ++b) {
    const double* src = in.row(b).data();
    double* dst = out.row(b).data();
    for (Index ch = 0; ch < c; ++ch) {
      const double* plane = src + ch * h * w;
      for (Index i = 0; i < oh; ++i) {
        const double* r0 = plane + (2 * i) * w;
        const double* r1 = r0 + w;
        for (Index j = 0; j < ow; ++j) {
          *dst++ = std::max(std::max(r0[2 * j], r0[2 * j + 1]), std::max(r1[2 * j], r1[2 * j + 1]));
        }
      }
    }
  }
}

void pool_backward(const MaxPool2& l, const Matrix& in, const Matrix& d_out, Matrix* d_in) {
  if (!d_in) return;
  const Index c = static_cast<Index>(l.channels), h = static_cast<Index>(l.height), w = static_cast<Index>(l.width);
  const Index oh = h / 2, ow = w / 2;
  d_in->setZero(d_out.rows(), c * h * w);
  for (Index b = 0; b < d_out.rows(); ++b) {
    const double* src = in.row(shared_row(in, b)).data();
    const double* g = d_out.row(b).data();
    double* dst = d_in->row(b).data();
    for (Index ch = 0; ch < c; ++ch) {
      const Index base = ch * h * w;
      for (Index i = 0; i < oh; ++i) {
        for (Index j = 0; j < ow; ++j) {
          // first maximum in scan order receives the gradient
          const Index cand[4] = {base + 2 * i * w + 2 * j, base + 2 * i * w + 2 * j + 1,
                                 base + (2 * i + 1) * w + 2 * j, base + (2 * i + 1) * w + 2 * j + 1};
          Index best = cand[0];
          for (int k = 1; k < 4; ++k) {
            if (src[cand[k]] > src[best]) best = cand[k];
          }
          dst[best] += *g++;
        }
      }
    }
  }
}

void relu_backward(const Matrix& in, const Matrix& d_out, Matrix* d_in) {
  if (!d_in) return;
  if (in.rows() == d_out.rows()) {
    *d_in = (in.array() > 0.0).select(d_out, 0.0);
  } else {
    const auto mask = (in.row(0).array() > 0.0).cast<double>().matrix();
    *d_in = d_out.array().rowwise() * mask.array();
  }
}

void gap_forward(const GlobalAvgPool& l, const Matrix& in, Matrix& out) {
  const Index c = static_cast<Index>(l.channels), hw = static_cast<Index>(l.height * l.width);
  out.resize(in.rows(), c);
  for (Index b = 0; b < in.rows(); ++b) {
    ConstMap planes(in.row(b).data(), c, hw);
    out.row(b) = planes.rowwise().mean().transpose();
  }
}

void gap_backward(const GlobalAvgPool& l, const Matrix& d_out, Matrix* d_in) {
  if (!d_in) return;
  const Index c = static_cast<Index>(l.channels), hw = static_cast<Index>(l.height * l.width);
  d_in->resize(d_out.rows(), c * hw);
  const double scale = 1.0 / static_cast<double>(hw);
  for (Index b = 0; b < d_out.rows(); ++b) {
    MutMap planes(d_in->row(b).data(), c, hw);
    planes = (d_out.row(b).transpose() * scale).replicate(1, hw);
  }
}

}  // namespace

Shape layer_input_shape(const Layer& layer) {
  return std::visit(overloaded{
                        [](const Dense& l) { return Shape{l.in}; },
                        [](const Conv2d& l) { return Shape{l.in_channels, l.height, l.width}; },
                        [](const MaxPool2& l) { return Shape{l.channels, l.height, l.width}; },
                        [](const Relu& l) { return Shape{l.size}; },
                        [](const GlobalAvgPool& l) { return Shape{l.channels, l.height, l.width}; },
                    },
                    layer);
}

Shape layer_output_shape(const Layer& layer) {
  return std::visit(overloaded{
                        [](const Dense& l) { return Shape{l.out}; },
                        [](const Conv2d& l) { return Shape{l.out_channels, l.height, l.width}; },
                        [](const MaxPool2& l) { return Shape{l.channels, l.height / 2, l.width / 2}; },
                        [](const Relu& l) { return Shape{l.size}; },
                        [](const GlobalAvgPool& l) { return Shape{l.channels}; },
                    },
                    layer);
}

std::size_t layer_param_count(const Layer& layer) {
  return std::visit(overloaded{
                        [](const Dense& l) { return l.out * l.in + l.out; },
                        [](const Conv2d& l) { return l.out_channels * l.in_channels * 9 + l.out_channels; },
                        [](const auto&) { return std::size_t{0}; },
                    },
                    layer);
}

std::pair<std::size_t, std::size_t> layer_fans(const Layer& layer) {
  return std::visit(overloaded{
                        [](const Dense& l) { return std::pair{l.in, l.out}; },
                        [](const Conv2d& l) { return std::pair{l.in_channels * 9, l.out_channels * 9}; },
                        [](const auto&) { return std::pair{std::size_t{0}, std::size_t{0}}; },
                    },
                    layer);
}

void layer_forward(const Layer& layer, std::span<const double> params, const Matrix& in, Matrix& out) {
  const auto expected = static_cast<Index>(shape_size(layer_input_shape(layer)));
  if (in.cols() != expected) {
    throw ShapeError("layer expects " + std::to_string(expected) + " inputs, got " + std::to_string(in.cols()));
  }
  std::visit(overloaded{
                 [&](const Dense& l) { dense_forward(l, params, in, out); },
                 [&](const Conv2d& l) { conv_forward(l, params, in, out); },
                 [&](const MaxPool2& l) { pool_forward(l, in, out); },
                 [&](const Relu&) { out = in.cwiseMax(0.0); },
                 [&](const GlobalAvgPool& l) { gap_forward(l, in, out); },
             },
             layer);
}

void layer_backward(const Layer& layer, std::span<const double> params, const Matrix& in, const Matrix& d_out,
                    Matrix* d_in, const ParamGradSink& sink) {
  check_rows(in, d_out);
  std::visit(overloaded{
                 [&](const Dense& l) { dense_backward(l, params, in, d_out, d_in, sink); },
                 [&](const Conv2d& l) { conv_backward(l, params, in, d_out, d_in, sink); },
                 [&](const MaxPool2& l) { pool_backward(l, in, d_out, d_in); },
                 [&](const Relu&) { relu_backward(in, d_out, d_in); },
                 [&](const GlobalAvgPool& l) { gap_backward(l, d_out, d_in); },
             },
             layer);
}

}  // namespace tg::nn
