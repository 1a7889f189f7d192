// Copyright 2026 The BRAN Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bran/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "bran/error.h"

namespace bran {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;

ConstMatrixMap AsMatrix(const Tensor& t, int64_t rows, int64_t cols) {
  return ConstMatrixMap(t.data(), rows, cols);
}

MatrixMap AsMatrix(Tensor& t, int64_t rows, int64_t cols) {
  return MatrixMap(t.data(), rows, cols);
}

Tape& SameTape(std::initializer_list<Var> vars) {
  Tape* tape = nullptr;
  for (Var v : vars) {
    if (!v.valid()) throw ContractError("operation on an unbound Var");
    if (tape == nullptr) tape = v.tape();
    if (v.tape() != tape) throw ContractError("operands live on different tapes");
  }
  return *tape;
}

[[noreturn]] void Mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeToString(a) + " and " + ShapeToString(b));
}

void RequireRank(const char* op, Var v, int rank) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " +
                         ShapeToString(v.shape()));
  }
}

int NormalizeAxis(const char* op, int axis, int rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " invalid for rank " + std::to_string(rank));
  }
  return axis;
}

// Splits a shape around `axis` into (outer, length, inner) extents.
struct AxisExtents {
  int64_t outer = 1;
  int64_t length = 1;
  int64_t inner = 1;
};

AxisExtents Extents(const Shape& shape, int axis) {
  AxisExtents e;
  for (int i = 0; i < axis; ++i) e.outer *= shape[static_cast<size_t>(i)];
  e.length = shape[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) {
    e.inner *= shape[i];
  }
  return e;
}

void Accumulate(Tensor& dst, const Tensor& src) {
  auto d = dst.values();
  auto s = src.values();
  for (size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Var MatMul(Var a, Var b) {
  Tape& tape = SameTape({a, b});
  RequireRank("MatMul", a, 2);
  RequireRank("MatMul", b, 2);
  const int64_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  if (b.shape()[0] != k) Mismatch("MatMul", a.shape(), b.shape());
  Tensor out({n, m});
  AsMatrix(out, n, m).noalias() =
      AsMatrix(a.value(), n, k) * AsMatrix(b.value(), k, m);
  return tape.Record(std::move(out), tape.NeedsGrad({a, b}),
                     [&tape, a, b, n, k, m](const Tensor& g) {
                       auto grad = AsMatrix(g, n, m);
                       if (tape.NeedsGrad(a)) {
                         AsMatrix(tape.Grad(a), n, k).noalias() +=
                             grad * AsMatrix(b.value(), k, m).transpose();
                       }
                       if (tape.NeedsGrad(b)) {
                         AsMatrix(tape.Grad(b), k, m).noalias() +=
                             AsMatrix(a.value(), n, k).transpose() * grad;
                       }
                     });
}

Var BatchedMatMul(Var a, Var b) {
  Tape& tape = SameTape({a, b});
  RequireRank("BatchedMatMul", a, 3);
  RequireRank("BatchedMatMul", b, 3);
  const int64_t batch = a.shape()[0], n = a.shape()[1], k = a.shape()[2],
                m = b.shape()[2];
  if (b.shape()[0] != batch || b.shape()[1] != k) {
    Mismatch("BatchedMatMul", a.shape(), b.shape());
  }
  Tensor out({batch, n, m});
  for (int64_t i = 0; i < batch; ++i) {
    MatrixMap(out.data() + i * n * m, n, m).noalias() =
        ConstMatrixMap(a.value().data() + i * n * k, n, k) *
        ConstMatrixMap(b.value().data() + i * k * m, k, m);
  }
  return tape.Record(
      std::move(out), tape.NeedsGrad({a, b}),
      [&tape, a, b, batch, n, k, m](const Tensor& g) {
        for (int64_t i = 0; i < batch; ++i) {
          ConstMatrixMap grad(g.data() + i * n * m, n, m);
          if (tape.NeedsGrad(a)) {
            MatrixMap(tape.Grad(a).data() + i * n * k, n, k).noalias() +=
                grad *
                ConstMatrixMap(b.value().data() + i * k * m, k, m).transpose();
          }
          if (tape.NeedsGrad(b)) {
            MatrixMap(tape.Grad(b).data() + i * k * m, k, m).noalias() +=
                ConstMatrixMap(a.value().data() + i * n * k, n, k).transpose() *
                grad;
          }
        }
      });
}

Var Transpose(Var a) {
  Tape& tape = SameTape({a});
  RequireRank("Transpose", a, 2);
  const int64_t n = a.shape()[0], m = a.shape()[1];
  Tensor out({m, n});
  AsMatrix(out, m, n) = AsMatrix(a.value(), n, m).transpose();
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, n, m](const Tensor& g) {
                       AsMatrix(tape.Grad(a), n, m) +=
                           AsMatrix(g, m, n).transpose();
                     });
}

Var Add(Var a, Var b) {
  Tape& tape = SameTape({a, b});
  if (a.shape() != b.shape()) Mismatch("Add", a.shape(), b.shape());
  Tensor out = a.value();
  Accumulate(out, b.value());
  return tape.Record(std::move(out), tape.NeedsGrad({a, b}),
                     [&tape, a, b](const Tensor& g) {
                       if (tape.NeedsGrad(a)) Accumulate(tape.Grad(a), g);
                       if (tape.NeedsGrad(b)) Accumulate(tape.Grad(b), g);
                     });
}

Var AddBias(Var a, Var bias) {
  Tape& tape = SameTape({a, bias});
  RequireRank("AddBias", bias, 1);
  if (a.value().rank() < 1 || a.shape().back() != bias.shape()[0]) {
    Mismatch("AddBias", a.shape(), bias.shape());
  }
  const int64_t cols = bias.shape()[0];
  const int64_t rows = a.value().size() / std::max<int64_t>(cols, 1);
  Tensor out = a.value();
  AsMatrix(out, rows, cols).rowwise() +=
      Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), cols);
  return tape.Record(
      std::move(out), tape.NeedsGrad({a, bias}),
      [&tape, a, bias, rows, cols](const Tensor& g) {
        if (tape.NeedsGrad(a)) Accumulate(tape.Grad(a), g);
        if (tape.NeedsGrad(bias)) {
          Eigen::Map<Eigen::RowVectorXd>(tape.Grad(bias).data(), cols) +=
              AsMatrix(g, rows, cols).colwise().sum();
        }
      });
}

Var Multiply(Var a, Var b) {
  Tape& tape = SameTape({a, b});
  if (a.shape() != b.shape()) Mismatch("Multiply", a.shape(), b.shape());
  Tensor out = a.value();
  {
    auto o = out.values();
    auto bv = b.value().values();
    for (size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  }
  return tape.Record(std::move(out), tape.NeedsGrad({a, b}),
                     [&tape, a, b](const Tensor& g) {
                       auto gv = g.values();
                       if (tape.NeedsGrad(a)) {
                         auto da = tape.Grad(a).values();
                         auto bv = b.value().values();
                         for (size_t i = 0; i < gv.size(); ++i) da[i] += gv[i] * bv[i];
                       }
                       if (tape.NeedsGrad(b)) {
                         auto db = tape.Grad(b).values();
                         auto av = a.value().values();
                         for (size_t i = 0; i < gv.size(); ++i) db[i] += gv[i] * av[i];
                       }
                     });
}

Var Scale(Var a, double factor) {
  Tape& tape = SameTape({a});
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, factor](const Tensor& g) {
                       auto da = tape.Grad(a).values();
                       auto gv = g.values();
                       for (size_t i = 0; i < gv.size(); ++i) da[i] += factor * gv[i];
                     });
}

Var Relu(Var a) {
  Tape& tape = SameTape({a});
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a](const Tensor& g) {
                       auto da = tape.Grad(a).values();
                       auto av = a.value().values();
                       auto gv = g.values();
                       for (size_t i = 0; i < gv.size(); ++i) {
                         if (av[i] > 0.0) da[i] += gv[i];
                       }
                     });
}

Var Softmax(Var a, int axis) {
  Tape& tape = SameTape({a});
  axis = NormalizeAxis("Softmax", axis, a.value().rank());
  const AxisExtents e = Extents(a.shape(), axis);
  Tensor out(a.shape());
  const double* x = a.value().data();
  double* y = out.data();
  for (int64_t o = 0; o < e.outer; ++o) {
    for (int64_t in = 0; in < e.inner; ++in) {
      const int64_t base = o * e.length * e.inner + in;
      double max_v = -std::numeric_limits<double>::infinity();
      for (int64_t j = 0; j < e.length; ++j) max_v = std::max(max_v, x[base + j * e.inner]);
      double total = 0.0;
      for (int64_t j = 0; j < e.length; ++j) {
        const double v = std::exp(x[base + j * e.inner] - max_v);
        y[base + j * e.inner] = v;
        total += v;
      }
      for (int64_t j = 0; j < e.length; ++j) y[base + j * e.inner] /= total;
    }
  }
  Tensor saved = tape.NeedsGrad(a) ? out : Tensor();
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, e, saved = std::move(saved)](const Tensor& g) {
                       const double* y = saved.data();
                       double* dx = tape.Grad(a).data();
                       for (int64_t o = 0; o < e.outer; ++o) {
                         for (int64_t in = 0; in < e.inner; ++in) {
                           const int64_t base = o * e.length * e.inner + in;
                           double dot = 0.0;
                           for (int64_t j = 0; j < e.length; ++j) {
                             dot += g[base + j * e.inner] * y[base + j * e.inner];
                           }
                           for (int64_t j = 0; j < e.length; ++j) {
                             const int64_t idx = base + j * e.inner;
                             dx[idx] += y[idx] * (g[idx] - dot);
                           }
                         }
                       }
                     });
}

Var LogSumExp(Var a, int axis) {
  Tape& tape = SameTape({a});
  axis = NormalizeAxis("LogSumExp", axis, a.value().rank());
  const AxisExtents e = Extents(a.shape(), axis);
  if (e.length == 0) {
    throw ContractError("LogSumExp over an empty set, shape " +
                        ShapeToString(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + axis);
  Tensor out(out_shape);
  const double* x = a.value().data();
  for (int64_t o = 0; o < e.outer; ++o) {
    for (int64_t in = 0; in < e.inner; ++in) {
      const int64_t base = o * e.length * e.inner + in;
      double max_v = -std::numeric_limits<double>::infinity();
      for (int64_t j = 0; j < e.length; ++j) max_v = std::max(max_v, x[base + j * e.inner]);
      double total = 0.0;
      for (int64_t j = 0; j < e.length; ++j) total += std::exp(x[base + j * e.inner] - max_v);
      out[o * e.inner + in] = max_v + std::log(total);
    }
  }
  Tensor pooled = tape.NeedsGrad(a) ? out : Tensor();
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, e, pooled](const Tensor& g) {
                       const double* x = a.value().data();
                       double* dx = tape.Grad(a).data();
                       for (int64_t o = 0; o < e.outer; ++o) {
                         for (int64_t in = 0; in < e.inner; ++in) {
                           const int64_t base = o * e.length * e.inner + in;
                           const double lse = pooled[o * e.inner + in];
                           const double go = g[o * e.inner + in];
                           for (int64_t j = 0; j < e.length; ++j) {
                             const int64_t idx = base + j * e.inner;
                             dx[idx] += go * std::exp(x[idx] - lse);
                           }
                         }
                       }
                     });
}

Var LayerNorm(Var x, Var gain, Var bias, double epsilon) {
  Tape& tape = SameTape({x, gain, bias});
  RequireRank("LayerNorm", gain, 1);
  RequireRank("LayerNorm", bias, 1);
  if (x.value().rank() < 1 || x.shape().back() != gain.shape()[0]) {
    Mismatch("LayerNorm", x.shape(), gain.shape());
  }
  if (bias.shape() != gain.shape()) Mismatch("LayerNorm", gain.shape(), bias.shape());
  const int64_t d = gain.shape()[0];
  const int64_t rows = x.value().size() / std::max<int64_t>(d, 1);
  Tensor normalized(x.shape());
  std::vector<double> inv_std(static_cast<size_t>(rows));
  Tensor out(x.shape());
  const double* xv = x.value().data();
  const double* gv = gain.value().data();
  const double* bv = bias.value().data();
  for (int64_t r = 0; r < rows; ++r) {
    const double* row = xv + r * d;
    double mean = 0.0;
    for (int64_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + epsilon);
    inv_std[static_cast<size_t>(r)] = inv;
    for (int64_t j = 0; j < d; ++j) {
      const double h = (row[j] - mean) * inv;
      normalized[r * d + j] = h;
      out[r * d + j] = gv[j] * h + bv[j];
    }
  }
  return tape.Record(
      std::move(out), tape.NeedsGrad({x, gain, bias}),
      [&tape, x, gain, bias, d, rows, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](const Tensor& g) {
        const double* gv = gain.value().data();
        double* dgain = tape.NeedsGrad(gain) ? tape.Grad(gain).data() : nullptr;
        double* dbias = tape.NeedsGrad(bias) ? tape.Grad(bias).data() : nullptr;
        double* dx = tape.NeedsGrad(x) ? tape.Grad(x).data() : nullptr;
        std::vector<double> dh(static_cast<size_t>(d));
        for (int64_t r = 0; r < rows; ++r) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (int64_t j = 0; j < d; ++j) {
            const int64_t idx = r * d + j;
            if (dgain != nullptr) dgain[j] += g[idx] * normalized[idx];
            if (dbias != nullptr) dbias[j] += g[idx];
            dh[static_cast<size_t>(j)] = g[idx] * gv[j];
            mean_dh += dh[static_cast<size_t>(j)];
            mean_dh_h += dh[static_cast<size_t>(j)] * normalized[idx];
          }
          if (dx == nullptr) continue;
          mean_dh /= static_cast<double>(d);
          mean_dh_h /= static_cast<double>(d);
          const double inv = inv_std[static_cast<size_t>(r)];
          for (int64_t j = 0; j < d; ++j) {
            const int64_t idx = r * d + j;
            dx[idx] += inv * (dh[static_cast<size_t>(j)] - mean_dh -
                              normalized[idx] * mean_dh_h);
          }
        }
      });
}

Var Conv1d(Var x, Var kernel, Var bias) {
  Tape& tape = SameTape({x, kernel, bias});
  RequireRank("Conv1d", x, 2);
  RequireRank("Conv1d", kernel, 3);
  RequireRank("Conv1d", bias, 1);
  const int64_t n = x.shape()[0], c_in = x.shape()[1];
  const int64_t width = kernel.shape()[0], c_out = kernel.shape()[2];
  if (kernel.shape()[1] != c_in) Mismatch("Conv1d", x.shape(), kernel.shape());
  if (bias.shape()[0] != c_out) Mismatch("Conv1d", kernel.shape(), bias.shape());
  if (width % 2 == 0) {
    throw DimensionError("Conv1d: kernel width must be odd, got " +
                         std::to_string(width));
  }
  const int64_t pad = width / 2;
  Tensor out({n, c_out});
  auto y = AsMatrix(out, n, c_out);
  y.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), c_out);
  auto xm = AsMatrix(x.value(), n, c_in);
  for (int64_t k = 0; k < width; ++k) {
    const int64_t shift = k - pad;
    const int64_t lo = std::max<int64_t>(0, -shift);
    const int64_t hi = std::min<int64_t>(n, n - shift);
    if (hi <= lo) continue;
    ConstMatrixMap w(kernel.value().data() + k * c_in * c_out, c_in, c_out);
    y.middleRows(lo, hi - lo).noalias() += xm.middleRows(lo + shift, hi - lo) * w;
  }
  return tape.Record(
      std::move(out), tape.NeedsGrad({x, kernel, bias}),
      [&tape, x, kernel, bias, n, c_in, c_out, width, pad](const Tensor& g) {
        auto gm = AsMatrix(g, n, c_out);
        if (tape.NeedsGrad(bias)) {
          Eigen::Map<Eigen::RowVectorXd>(tape.Grad(bias).data(), c_out) +=
              gm.colwise().sum();
        }
        const bool need_x = tape.NeedsGrad(x);
        const bool need_k = tape.NeedsGrad(kernel);
        auto xm = AsMatrix(x.value(), n, c_in);
        for (int64_t k = 0; k < width; ++k) {
          const int64_t shift = k - pad;
          const int64_t lo = std::max<int64_t>(0, -shift);
          const int64_t hi = std::min<int64_t>(n, n - shift);
          if (hi <= lo) continue;
          if (need_x) {
            ConstMatrixMap w(kernel.value().data() + k * c_in * c_out, c_in, c_out);
            AsMatrix(tape.Grad(x), n, c_in).middleRows(lo + shift, hi - lo).noalias() +=
                gm.middleRows(lo, hi - lo) * w.transpose();
          }
          if (need_k) {
            MatrixMap(tape.Grad(kernel).data() + k * c_in * c_out, c_in, c_out)
                .noalias() +=
                xm.middleRows(lo + shift, hi - lo).transpose() *
                gm.middleRows(lo, hi - lo);
          }
        }
      });
}

Var Concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw ContractError("Concat of zero tensors");
  Tape& tape = SameTape({parts.front()});
  const Shape& first = parts.front().shape();
  axis = NormalizeAxis("Concat", axis, static_cast<int>(first.size()));
  Shape out_shape = first;
  out_shape[static_cast<size_t>(axis)] = 0;
  bool needs_grad = false;
  for (Var p : parts) {
    if (p.tape() != &tape) throw ContractError("operands live on different tapes");
    const Shape& s = p.shape();
    if (s.size() != first.size()) Mismatch("Concat", first, s);
    for (size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != axis && s[i] != first[i]) Mismatch("Concat", first, s);
    }
    out_shape[static_cast<size_t>(axis)] += s[static_cast<size_t>(axis)];
    needs_grad = needs_grad || tape.NeedsGrad(p);
  }
  const AxisExtents e = Extents(out_shape, axis);
  const int64_t out_block = e.length * e.inner;
  Tensor out(out_shape);
  std::vector<int64_t> offsets;
  int64_t offset = 0;
  for (Var p : parts) {
    offsets.push_back(offset);
    const int64_t block = p.shape()[static_cast<size_t>(axis)] * e.inner;
    const double* src = p.value().data();
    for (int64_t o = 0; o < e.outer; ++o) {
      std::copy(src + o * block, src + (o + 1) * block,
                out.data() + o * out_block + offset);
    }
    offset += block;
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.Record(std::move(out), needs_grad,
                     [&tape, inputs, offsets, e, out_block, axis](const Tensor& g) {
                       for (size_t i = 0; i < inputs.size(); ++i) {
                         if (!tape.NeedsGrad(inputs[i])) continue;
                         const int64_t block =
                             inputs[i].shape()[static_cast<size_t>(axis)] * e.inner;
                         double* dst = tape.Grad(inputs[i]).data();
                         for (int64_t o = 0; o < e.outer; ++o) {
                           const double* src = g.data() + o * out_block + offsets[i];
                           for (int64_t j = 0; j < block; ++j) dst[o * block + j] += src[j];
                         }
                       }
                     });
}

Var Stack(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("Stack of zero tensors");
  Tape& tape = SameTape({parts.front()});
  const Shape& first = parts.front().shape();
  bool needs_grad = false;
  for (Var p : parts) {
    if (p.tape() != &tape) throw ContractError("operands live on different tapes");
    if (p.shape() != first) Mismatch("Stack", first, p.shape());
    needs_grad = needs_grad || tape.NeedsGrad(p);
  }
  const int64_t k = static_cast<int64_t>(parts.size());
  const int64_t count = NumElements(first);
  Shape out_shape = first;
  out_shape.push_back(k);
  Tensor out(out_shape);
  for (int64_t j = 0; j < k; ++j) {
    const double* src = parts[static_cast<size_t>(j)].value().data();
    for (int64_t i = 0; i < count; ++i) out[i * k + j] = src[i];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.Record(std::move(out), needs_grad,
                     [&tape, inputs, k, count](const Tensor& g) {
                       for (int64_t j = 0; j < k; ++j) {
                         Var in = inputs[static_cast<size_t>(j)];
                         if (!tape.NeedsGrad(in)) continue;
                         double* dst = tape.Grad(in).data();
                         for (int64_t i = 0; i < count; ++i) dst[i] += g[i * k + j];
                       }
                     });
}

Var EmbeddingLookup(Var table, std::span<const int> ids) {
  RequireRank("EmbeddingLookup", table, 2);
  std::vector<int64_t> rows(ids.begin(), ids.end());
  const int64_t vocab = table.shape()[0];
  for (int64_t id : rows) {
    if (id < 0 || id >= vocab) {
      throw LookupError("token id " + std::to_string(id) +
                        " outside embedding table of " + std::to_string(vocab) +
                        " rows");
    }
  }
  return GatherRows(table, rows);
}

Var GatherRows(Var a, std::span<const int64_t> rows) {
  Tape& tape = SameTape({a});
  RequireRank("GatherRows", a, 2);
  const int64_t r = a.shape()[0], c = a.shape()[1];
  for (int64_t row : rows) {
    if (row < 0 || row >= r) {
      throw LookupError("row " + std::to_string(row) + " outside tensor " +
                        ShapeToString(a.shape()));
    }
  }
  const int64_t k = static_cast<int64_t>(rows.size());
  Tensor out({k, c});
  const double* src = a.value().data();
  for (int64_t i = 0; i < k; ++i) {
    std::copy(src + rows[static_cast<size_t>(i)] * c,
              src + (rows[static_cast<size_t>(i)] + 1) * c, out.data() + i * c);
  }
  std::vector<int64_t> index(rows.begin(), rows.end());
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, index = std::move(index), c](const Tensor& g) {
                       double* dst = tape.Grad(a).data();
                       for (size_t i = 0; i < index.size(); ++i) {
                         const double* src = g.data() + static_cast<int64_t>(i) * c;
                         double* row = dst + index[i] * c;
                         for (int64_t j = 0; j < c; ++j) row[j] += src[j];
                       }
                     });
}

Var Select(Var a, int64_t index) {
  Tape& tape = SameTape({a});
  if (a.value().rank() < 1) throw DimensionError("Select on a scalar");
  const int64_t outer = a.shape()[0];
  if (index < 0 || index >= outer) {
    throw LookupError("Select index " + std::to_string(index) + " outside " +
                      ShapeToString(a.shape()));
  }
  Shape out_shape(a.shape().begin() + 1, a.shape().end());
  const int64_t block = NumElements(out_shape);
  Tensor out(out_shape);
  std::copy(a.value().data() + index * block, a.value().data() + (index + 1) * block,
            out.data());
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, index, block](const Tensor& g) {
                       double* dst = tape.Grad(a).data() + index * block;
                       for (int64_t j = 0; j < block; ++j) dst[j] += g[j];
                     });
}

Var Reshape(Var a, Shape shape) {
  Tape& tape = SameTape({a});
  Tensor out = a.value().Reshaped(std::move(shape));
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a](const Tensor& g) {
                       auto dst = tape.Grad(a).values();
                       auto src = g.values();
                       for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
                     });
}

Var ApplyMask(Var a, const Tensor& mask) {
  Tape& tape = SameTape({a});
  if (mask.shape() != a.shape()) Mismatch("ApplyMask", a.shape(), mask.shape());
  Tensor out = a.value();
  {
    auto o = out.values();
    auto m = mask.values();
    for (size_t i = 0; i < o.size(); ++i) o[i] *= m[i];
  }
  return tape.Record(std::move(out), tape.NeedsGrad(a),
                     [&tape, a, mask](const Tensor& g) {
                       auto da = tape.Grad(a).values();
                       auto m = mask.values();
                       auto gv = g.values();
                       for (size_t i = 0; i < gv.size(); ++i) da[i] += gv[i] * m[i];
                     });
}

Var Sum(Var a) {
  Tape& tape = SameTape({a});
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return tape.Record(Tensor::Scalar(total), tape.NeedsGrad(a),
                     [&tape, a](const Tensor& g) {
                       const double go = g[0];
                       for (double& v : tape.Grad(a).values()) v += go;
                     });
}

Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels,
                        std::span<const uint8_t> mask, double normalizer) {
  Tape& tape = SameTape({logits});
  RequireRank("SoftmaxCrossEntropy", logits, 2);
  const int64_t n = logits.shape()[0], classes = logits.shape()[1];
  if (static_cast<int64_t>(labels.size()) != n || static_cast<int64_t>(mask.size()) != n) {
    throw DimensionError("SoftmaxCrossEntropy: " + std::to_string(labels.size()) +
                         " labels and " + std::to_string(mask.size()) +
                         " mask entries for logits " + ShapeToString(logits.shape()));
  }
  int64_t active = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (mask[static_cast<size_t>(i)] == 0) continue;
    ++active;
    const int label = labels[static_cast<size_t>(i)];
    if (label < 0 || label >= classes) {
      throw LookupError("label " + std::to_string(label) + " outside " +
                        std::to_string(classes) + " classes");
    }
  }
  if (active == 0) throw ContractError("SoftmaxCrossEntropy: every row is masked");
  const double norm = normalizer > 0.0 ? normalizer : static_cast<double>(active);
  Tensor probs({n, classes});
  double total = 0.0;
  const double* x = logits.value().data();
  for (int64_t i = 0; i < n; ++i) {
    if (mask[static_cast<size_t>(i)] == 0) continue;
    const double* row = x + i * classes;
    double max_v = *std::max_element(row, row + classes);
    double z = 0.0;
    for (int64_t c = 0; c < classes; ++c) z += std::exp(row[c] - max_v);
    const double log_z = max_v + std::log(z);
    for (int64_t c = 0; c < classes; ++c) probs[i * classes + c] = std::exp(row[c] - log_z);
    total += log_z - row[labels[static_cast<size_t>(i)]];
  }
  std::vector<int> label_copy(labels.begin(), labels.end());
  std::vector<uint8_t> mask_copy(mask.begin(), mask.end());
  return tape.Record(
      Tensor::Scalar(total / norm), tape.NeedsGrad(logits),
      [&tape, logits, probs = std::move(probs), label_copy = std::move(label_copy),
       mask_copy = std::move(mask_copy), n, classes, norm](const Tensor& g) {
        const double scale = g[0] / norm;
        double* dx = tape.Grad(logits).data();
        for (int64_t i = 0; i < n; ++i) {
          if (mask_copy[static_cast<size_t>(i)] == 0) continue;
          for (int64_t c = 0; c < classes; ++c) {
            double p = probs[i * classes + c];
            if (c == label_copy[static_cast<size_t>(i)]) p -= 1.0;
            dx[i * classes + c] += scale * p;
          }
        }
      });
}

}  // namespace bran
