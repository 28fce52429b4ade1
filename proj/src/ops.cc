// src/ops.cc


// Copyright 2026  The SAEP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "saep/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "saep/error.hpp"

namespace saep {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap AsMat(const Tensor& t, std::size_t offset, std::size_t rows,
                  std::size_t cols) {
  return ConstMatMap(t.ptr() + offset, static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

MatMap AsMat(Tensor& t, std::size_t offset, std::size_t rows,
             std::size_t cols) {
  return MatMap(t.ptr() + offset, static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

[[noreturn]] void ShapeError(const char* op, const Shape& a, const Shape& b) {
  Fail(ErrorCode::kDimension, std::string(op) + ": incompatible shapes " +
                                  ShapeToString(a) + " and " +
                                  ShapeToString(b));
}

std::size_t LastDim(const Tensor& t, const char* op) {
  if (t.rank() == 0)
    Fail(ErrorCode::kDimension, std::string(op) + ": needs rank >= 1");
  return t.shape().back();
}

}  // namespace

void SoftmaxInPlace(std::span<float> row) {
  if (row.empty()) return;
  Eigen::Map<Eigen::ArrayXf> r(row.data(), static_cast<Eigen::Index>(row.size()));
  r = (r - r.maxCoeff()).exp();
  r *= 1.0f / r.sum();
}

Var MatMul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() < 2 || bv.rank() != 2 || av.shape().back() != bv.dim(0))
    ShapeError("matmul", av.shape(), bv.shape());
  const std::size_t k = av.shape().back(), m = av.size() / k, n = bv.dim(1);
  Shape out_shape = av.shape();
  out_shape.back() = n;
  Tensor out(std::move(out_shape));
  AsMat(out, 0, m, n).noalias() = AsMat(av, 0, m, k) * AsMat(bv, 0, k, n);
  return a.tape()->Record(
      std::move(out), {a, b}, [a, b, m, k, n](const Tensor&, const Tensor& g, Tape& tape) {
        if (Tensor* ga = tape.GradFor(a))
          AsMat(*ga, 0, m, k).noalias() +=
              AsMat(g, 0, m, n) * AsMat(b.value(), 0, k, n).transpose();
        if (Tensor* gb = tape.GradFor(b))
          AsMat(*gb, 0, k, n).noalias() +=
              AsMat(a.value(), 0, m, k).transpose() * AsMat(g, 0, m, n);
      });
}

Var BatchMatMul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0) ||
      av.dim(2) != bv.dim(1))
    ShapeError("batch_matmul", av.shape(), bv.shape());
  const std::size_t batch = av.dim(0), m = av.dim(1), k = av.dim(2),
                    n = bv.dim(2);
  Tensor out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i)
    AsMat(out, i * m * n, m, n).noalias() =
        AsMat(av, i * m * k, m, k) * AsMat(bv, i * k * n, k, n);
  return a.tape()->Record(
      std::move(out), {a, b},
      [a, b, batch, m, k, n](const Tensor&, const Tensor& g, Tape& tape) {
        Tensor* ga = tape.GradFor(a);
        Tensor* gb = tape.GradFor(b);
        for (std::size_t i = 0; i < batch; ++i) {
          if (ga)
            AsMat(*ga, i * m * k, m, k).noalias() +=
                AsMat(g, i * m * n, m, n) *
                AsMat(b.value(), i * k * n, k, n).transpose();
          if (gb)
            AsMat(*gb, i * k * n, k, n).noalias() +=
                AsMat(a.value(), i * m * k, m, k).transpose() *
                AsMat(g, i * m * n, m, n);
        }
      });
}

Var Transpose(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 && xv.rank() != 3)
    Fail(ErrorCode::kDimension,
         "transpose: needs rank 2 or 3, got " + ShapeToString(xv.shape()));
  const std::size_t batch = xv.rank() == 3 ? xv.dim(0) : 1;
  const std::size_t r = xv.shape()[xv.rank() - 2], c = xv.shape().back();
  Shape shape = xv.shape();
  std::swap(shape[shape.size() - 2], shape[shape.size() - 1]);
  Tensor out(shape);
  for (std::size_t i = 0; i < batch; ++i)
    AsMat(out, i * r * c, c, r) = AsMat(xv, i * r * c, r, c).transpose();
  return x.tape()->Record(std::move(out), {x},
                          [x, batch, r, c](const Tensor&, const Tensor& g, Tape& tape) {
                            Tensor* gx = tape.GradFor(x);
                            for (std::size_t i = 0; i < batch; ++i)
                              AsMat(*gx, i * r * c, r, c) +=
                                  AsMat(g, i * r * c, c, r).transpose();
                          });
}

Var Add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) ShapeError("add", av.shape(), bv.shape());
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape()->Record(std::move(out), {a, b},
                          [a, b](const Tensor&, const Tensor& g, Tape& tape) {
                            for (Var v : {a, b})
                              if (Tensor* gv = tape.GradFor(v))
                                for (std::size_t i = 0; i < g.size(); ++i)
                                  (*gv)[i] += g[i];
                          });
}

Var AddBias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  const std::size_t d = LastDim(xv, "add_bias");
  if (bv.size() != d || bv.rank() != 1)
    ShapeError("add_bias", xv.shape(), bv.shape());
  Tensor out = xv;
  const std::size_t rows = d ? out.size() / d : 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] += bv[j];
  return x.tape()->Record(
      std::move(out), {x, bias}, [x, bias, rows, d](const Tensor&, const Tensor& g,
                                                    Tape& tape) {
        if (Tensor* gx = tape.GradFor(x))
          for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
        if (Tensor* gb = tape.GradFor(bias))
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g[r * d + j];
      });
}

Var Scale(Var x, float factor) {
  Tensor out = x.value();
  for (float& v : out.data()) v *= factor;
  return x.tape()->Record(std::move(out), {x},
                          [x, factor](const Tensor&, const Tensor& g, Tape& tape) {
                            Tensor* gx = tape.GradFor(x);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              (*gx)[i] += factor * g[i];
                          });
}

Var Relu(Var x) {
  Tensor out = x.value();
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  return x.tape()->Record(std::move(out), {x}, [x](const Tensor&, const Tensor& g,
                                                   Tape& tape) {
    Tensor* gx = tape.GradFor(x);
    const Tensor& xv = x.value();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0f) (*gx)[i] += g[i];
  });
}

Var SoftmaxRows(Var x) {
  const Tensor& xv = x.value();
  const std::size_t d = LastDim(xv, "softmax_rows");
  xv.CheckFinite("softmax_rows input");
  Tensor out = xv;
  const std::size_t rows = d ? out.size() / d : 0;
  for (std::size_t r = 0; r < rows; ++r)
    SoftmaxInPlace(out.data().subspan(r * d, d));
  return x.tape()->Record(std::move(out), {x}, [x, rows, d](const Tensor& yv,
                                                          const Tensor& g,
                                                          Tape& tape) {
    Tensor* gx = tape.GradFor(x);
    for (std::size_t r = 0; r < rows; ++r) {
      const float* yr = yv.ptr() + r * d;
      const float* gr = g.ptr() + r * d;
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += double(gr[j]) * yr[j];
      float* out_r = gx->ptr() + r * d;
      for (std::size_t j = 0; j < d; ++j)
        out_r[j] += yr[j] * (gr[j] - static_cast<float>(dot));
    }
  });
}

Var LayerNorm(Var x, Var gain, Var bias, float eps) {
  const Tensor& xv = x.value();
  const std::size_t d = LastDim(xv, "layer_norm");
  if (gain.value().shape() != Shape{d} || bias.value().shape() != Shape{d})
    ShapeError("layer_norm", xv.shape(), gain.value().shape());
  const std::size_t rows = d ? xv.size() / d : 0;
  Tensor normed(xv.shape());
  std::vector<float> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = xv.ptr() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = static_cast<float>(is);
    float* nr = normed.ptr() + r * d;
    for (std::size_t j = 0; j < d; ++j)
      nr[j] = static_cast<float>((xr[j] - mean) * is);
  }
  Tensor out = normed;
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d; ++j)
      out[r * d + j] = gv[j] * normed[r * d + j] + bv[j];
  return x.tape()->Record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, rows, d, normed = std::move(normed),
       inv_std = std::move(inv_std)](const Tensor&, const Tensor& g, Tape& tape) {
        const Tensor& gv = gain.value();
        if (Tensor* gg = tape.GradFor(gain))
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j)
              (*gg)[j] += g[r * d + j] * normed[r * d + j];
        if (Tensor* gb = tape.GradFor(bias))
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g[r * d + j];
        Tensor* gx = tape.GradFor(x);
        if (!gx) return;
        std::vector<double> dn(d);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dn = 0.0, mean_dn_n = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            dn[j] = double(g[r * d + j]) * gv[j];
            mean_dn += dn[j];
            mean_dn_n += dn[j] * normed[r * d + j];
          }
          mean_dn /= static_cast<double>(d);
          mean_dn_n /= static_cast<double>(d);
          for (std::size_t j = 0; j < d; ++j)
            (*gx)[r * d + j] += static_cast<float>(
                inv_std[r] *
                (dn[j] - mean_dn - normed[r * d + j] * mean_dn_n));
        }
      });
}

Var Dropout(Var x, float rate, bool training, Rng& rng) {
  if (rate < 0.0f || rate >= 1.0f)
    Fail(ErrorCode::kInvalidArgument,
         "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0f) return x;
  const float keep = 1.0f - rate;
  const float scale = 1.0f / keep;
  Tensor mask(x.value().shape());
  for (float& m : mask.data()) m = rng.Uniform() < keep ? scale : 0.0f;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return x.tape()->Record(std::move(out), {x},
                          [x, mask = std::move(mask)](const Tensor&, const Tensor& g,
                                                      Tape& tape) {
                            Tensor* gx = tape.GradFor(x);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              (*gx)[i] += mask[i] * g[i];
                          });
}

Var Reshape(Var x, Shape shape) {
  Tensor out = x.value().Reshaped(std::move(shape));
  return x.tape()->Record(std::move(out), {x},
                          [x](const Tensor&, const Tensor& g, Tape& tape) {
                            Tensor* gx = tape.GradFor(x);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              (*gx)[i] += g[i];
                          });
}

Var CrossEntropy(Var logits, std::span<const int> labels) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 2 || lv.dim(0) != labels.size())
    Fail(ErrorCode::kDimension,
         "cross_entropy: logits " + ShapeToString(lv.shape()) + " vs " +
             std::to_string(labels.size()) + " labels");
  const std::size_t batch = lv.dim(0), classes = lv.dim(1);
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      Fail(ErrorCode::kIndex, "cross_entropy: label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(classes) +
                                  ")");
  Tensor probs = lv;
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const float* row = lv.ptr() + b * classes;
    const float mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(double(row[c]) - mx);
    total += std::log(z) + mx - row[labels[b]];
    SoftmaxInPlace(probs.data().subspan(b * classes, classes));
  }
  std::vector<int> targets(labels.begin(), labels.end());
  return logits.tape()->Record(
      Tensor::Scalar(static_cast<float>(total / double(batch))), {logits},
      [logits, batch, classes, probs = std::move(probs),
       targets = std::move(targets)](const Tensor&, const Tensor& g, Tape& tape) {
        Tensor* gl = tape.GradFor(logits);
        const float s = g[0] / static_cast<float>(batch);
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t c = 0; c < classes; ++c) {
            const float onehot =
                static_cast<int>(c) == targets[b] ? 1.0f : 0.0f;
            (*gl)[b * classes + c] += s * (probs[b * classes + c] - onehot);
          }
      });
}

Var Sum(Var x) {
  double total = 0.0;
  for (float v : x.value().data()) total += v;
  return x.tape()->Record(Tensor::Scalar(static_cast<float>(total)), {x},
                          [x](const Tensor&, const Tensor& g, Tape& tape) {
                            Tensor* gx = tape.GradFor(x);
                            for (float& v : gx->data()) v += g[0];
                          });
}

namespace {

constexpr double kNormFloor = 1e-12;

// Normalises `count` vectors of length `len` laid out with the given strides.
Var NormalizeStrided(Var x, std::size_t count, std::size_t len,
                     std::size_t vec_stride, std::size_t elem_stride) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  std::vector<float> inv_norm(count);
  for (std::size_t v = 0; v < count; ++v) {
    double ss = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      const double e = xv[v * vec_stride + j * elem_stride];
      ss += e * e;
    }
    const double inv = 1.0 / std::max(std::sqrt(ss), kNormFloor);
    inv_norm[v] = static_cast<float>(inv);
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t i = v * vec_stride + j * elem_stride;
      out[i] = static_cast<float>(xv[i] * inv);
    }
  }
  return x.tape()->Record(
      std::move(out), {x},
      [x, count, len, vec_stride, elem_stride,
       inv_norm = std::move(inv_norm)](const Tensor& y, const Tensor& g,
                                       Tape& tape) {
        Tensor* gx = tape.GradFor(x);
        for (std::size_t v = 0; v < count; ++v) {
          double dot = 0.0;
          for (std::size_t j = 0; j < len; ++j) {
            const std::size_t i = v * vec_stride + j * elem_stride;
            dot += double(g[i]) * y[i];
          }
          for (std::size_t j = 0; j < len; ++j) {
            const std::size_t i = v * vec_stride + j * elem_stride;
            (*gx)[i] += static_cast<float>(inv_norm[v] * (g[i] - y[i] * dot));
          }
        }
      });
}

}  // namespace

Var L2NormalizeRows(Var x) {
  const std::size_t d = LastDim(x.value(), "l2_normalize_rows");
  const std::size_t rows = d ? x.value().size() / d : 0;
  return NormalizeStrided(x, rows, d, d, 1);
}

Var L2NormalizeColumns(Var w) {
  const Tensor& wv = w.value();
  if (wv.rank() != 2)
    Fail(ErrorCode::kDimension, "l2_normalize_columns: needs rank 2, got " +
                                    ShapeToString(wv.shape()));
  return NormalizeStrided(w, wv.dim(1), wv.dim(0), 1, wv.dim(1));
}

}  // namespace saep
