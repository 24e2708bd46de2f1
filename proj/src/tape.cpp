// Copyright 2026 The SkelScore Authors
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

#include "skelscore/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

#include "skelscore/fwd_ops.hpp"
#include "skelscore/kernels.hpp"

namespace skelscore::engine {

Param& ParamStore::create(const std::string& name, Tensor2 init) {
  auto [it, inserted] = params_.try_emplace(name);
  if (!inserted)
    throw std::invalid_argument("parameter already exists: " + name);
  Param& p = it->second;
  p.grad = Tensor2(init.rows(), init.cols());
  p.moment1 = Tensor2(init.rows(), init.cols());
  p.moment2 = Tensor2(init.rows(), init.cols());
  p.value = std::move(init);
  return p;
}

Param& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::invalid_argument("unknown parameter: " + name);
  return it->second;
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::invalid_argument("unknown parameter: " + name);
  return it->second;
}

bool ParamStore::contains(const std::string& name) const {
  return params_.count(name) != 0;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

void sgd_adaptive_step(ParamStore& store, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  store.set_step(store.step() + 1);
  const auto t = static_cast<double>(store.step());
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  for (auto& [name, p] : store.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data()[i];
      double& m = p.moment1.data()[i];
      double& v = p.moment2.data()[i];
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g * g;
      p.value.data()[i] -= lr * (m / c1) / (std::sqrt(v / c2) + kEps);
    }
  }
}

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParam: return "param";
    case OpKind::kAffine: return "affine";
    case OpKind::kRelu: return "relu";
    case OpKind::kLayerNorm: return "layer_normalize";
    case OpKind::kSetMaxPool: return "set_max_pool";
    case OpKind::kSoftmaxXent: return "softmax_cross_entropy";
    case OpKind::kCosine: return "cosine_similarity";
    case OpKind::kAdd: return "add";
    case OpKind::kScaleConst: return "scale";
    case OpKind::kScaleByScalar: return "scale_by";
    case OpKind::kExpScale: return "exp_scale";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kConcatRows: return "concat_rows";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kSumAll: return "sum_all";
    case OpKind::kMeanRows: return "mean_rows";
    case OpKind::kRowGather: return "row_gather";
  }
  return "unknown";
}

Tape::Value Tape::push(Node node) {
  if (!node.val.all_finite())
    throw std::runtime_error(std::string(op_name(node.kind)) +
                             ": non-finite output value");
  node.grad = Tensor2(node.val.rows(), node.val.cols());
  nodes_.push_back(std::move(node));
  return Value{nodes_.size() - 1};
}

Tape::Value Tape::input(Tensor2 v) {
  Node n;
  n.kind = OpKind::kInput;
  n.val = std::move(v);
  return push(std::move(n));
}

Tape::Value Tape::param(ParamStore& store, const std::string& name) {
  Node n;
  n.kind = OpKind::kParam;
  Param& p = store.get(name);
  n.val = p.value;
  n.bound = &p;
  return push(std::move(n));
}

Tape::Value Tape::affine(Value x, Value w) {
  Node n;
  n.kind = OpKind::kAffine;
  n.in = {x.id, w.id};
  n.val = affine_forward(node(x).val, node(w).val, nullptr);
  return push(std::move(n));
}

Tape::Value Tape::affine(Value x, Value w, Value b) {
  Node n;
  n.kind = OpKind::kAffine;
  n.in = {x.id, w.id, b.id};
  n.val = affine_forward(node(x).val, node(w).val, &node(b).val);
  return push(std::move(n));
}

Tape::Value Tape::relu(Value x) {
  Node n;
  n.kind = OpKind::kRelu;
  n.in = {x.id};
  n.val = relu_forward(node(x).val);
  return push(std::move(n));
}

Tape::Value Tape::layer_normalize(Value x, Value gain, Value bias) {
  Node n;
  n.kind = OpKind::kLayerNorm;
  n.in = {x.id, gain.id, bias.id};
  std::vector<double> mean, inv_std;
  n.val = layer_normalize_forward(node(x).val, node(gain).val, node(bias).val,
                                  &mean, &inv_std);
  n.aux.reserve(2 * mean.size());
  for (std::size_t r = 0; r < mean.size(); ++r) {
    n.aux.push_back(mean[r]);
    n.aux.push_back(inv_std[r]);
  }
  return push(std::move(n));
}

Tape::Value Tape::set_max_pool(Value x) {
  Node n;
  n.kind = OpKind::kSetMaxPool;
  n.in = {x.id};
  n.val = set_max_pool_forward(node(x).val, &n.arg);
  return push(std::move(n));
}

Tape::Value Tape::softmax_cross_entropy(Value logits, std::size_t target) {
  const Tensor2& z = node(logits).val;
  if (z.rows() != 1 || z.cols() < 2)
    throw std::invalid_argument(
        "softmax_cross_entropy: expected one row of >= 2 logits, got " +
        z.shape_str());
  return softmax_cross_entropy_rows(logits, {target});
}

Tape::Value Tape::softmax_cross_entropy_rows(
    Value logits, const std::vector<std::size_t>& targets) {
  const Tensor2& z = node(logits).val;
  const std::size_t rows = z.rows();
  const std::size_t c = z.cols();
  if (targets.size() != rows)
    throw std::invalid_argument("softmax_cross_entropy: " +
                                std::to_string(targets.size()) +
                                " targets for " + z.shape_str() + " logits");
  for (std::size_t t : targets)
    if (t >= c)
      throw std::invalid_argument("softmax_cross_entropy: target " +
                                  std::to_string(t) + " out of range [0," +
                                  std::to_string(c) + ")");
  Node n;
  n.kind = OpKind::kSoftmaxXent;
  n.in = {logits.id};
  n.idx = targets;
  n.aux.assign(rows * c, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = z.row_ptr(r);
    double mx = row[0];
    for (std::size_t i = 1; i < c; ++i) mx = row[i] > mx ? row[i] : mx;
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      const double e = std::exp(row[i] - mx);
      n.aux[r * c + i] = e;
      sum += e;
    }
    for (std::size_t i = 0; i < c; ++i) n.aux[r * c + i] /= sum;
    total += std::log(sum) - (row[targets[r]] - mx);
  }
  n.val = Tensor2(1, 1, {total});
  return push(std::move(n));
}

Tape::Value Tape::cosine_similarity(Value a, Value b) {
  Node n;
  n.kind = OpKind::kCosine;
  n.in = {a.id, b.id};
  const CosineResult r = cosine_forward(node(a).val, node(b).val);
  n.val = Tensor2(1, 1, {r.value});
  n.aux = {r.dot, r.norm_a, r.norm_b};
  n.degenerate = r.degenerate;
  return push(std::move(n));
}

bool Tape::cosine_degenerate(Value v) const {
  const Node& n = node(v);
  if (n.kind != OpKind::kCosine)
    throw std::invalid_argument("cosine_degenerate: node is not a cosine op");
  return n.degenerate;
}

Tape::Value Tape::add(Value a, Value b) {
  const Tensor2& ta = node(a).val;
  const Tensor2& tb = node(b).val;
  if (!ta.same_shape(tb))
    throw std::invalid_argument("add: " + ta.shape_str() + " vs " +
                                tb.shape_str());
  Node n;
  n.kind = OpKind::kAdd;
  n.in = {a.id, b.id};
  n.val = ta;
  kernels::active().axpy(1.0, tb.data(), n.val.data(), n.val.size());
  return push(std::move(n));
}

Tape::Value Tape::scale(Value a, double c) {
  Node n;
  n.kind = OpKind::kScaleConst;
  n.in = {a.id};
  n.c = c;
  n.val = Tensor2(node(a).val.rows(), node(a).val.cols());
  kernels::active().axpy(c, node(a).val.data(), n.val.data(), n.val.size());
  return push(std::move(n));
}

Tape::Value Tape::scale_by(Value a, Value s) {
  const Tensor2& ts = node(s).val;
  if (ts.rows() != 1 || ts.cols() != 1)
    throw std::invalid_argument("scale_by: scale must be 1x1, got " +
                                ts.shape_str());
  Node n;
  n.kind = OpKind::kScaleByScalar;
  n.in = {a.id, s.id};
  n.val = Tensor2(node(a).val.rows(), node(a).val.cols());
  kernels::active().axpy(ts.at(0, 0), node(a).val.data(), n.val.data(),
                         n.val.size());
  return push(std::move(n));
}

Tape::Value Tape::exp_scale(Value a, double c) {
  Node n;
  n.kind = OpKind::kExpScale;
  n.in = {a.id};
  n.c = c;
  const Tensor2& ta = node(a).val;
  n.val = Tensor2(ta.rows(), ta.cols());
  for (std::size_t i = 0; i < ta.size(); ++i)
    n.val.data()[i] = std::exp(c * ta.data()[i]);
  return push(std::move(n));
}

Tape::Value Tape::concat_cols(const std::vector<Value>& parts) {
  if (parts.empty())
    throw std::invalid_argument("concat_cols: no parts");
  const std::size_t rows = node(parts[0]).val.rows();
  std::size_t total = 0;
  for (Value p : parts) {
    if (node(p).val.rows() != rows)
      throw std::invalid_argument("concat_cols: row mismatch " +
                                  node(p).val.shape_str());
    total += node(p).val.cols();
  }
  Node n;
  n.kind = OpKind::kConcatCols;
  n.val = Tensor2(rows, total);
  std::size_t off = 0;
  for (Value p : parts) {
    const Tensor2& t = node(p).val;
    n.in.push_back(p.id);
    n.idx.push_back(off);
    for (std::size_t r = 0; r < rows; ++r)
      std::memcpy(n.val.row_ptr(r) + off, t.row_ptr(r),
                  t.cols() * sizeof(double));
    off += t.cols();
  }
  return push(std::move(n));
}

Tape::Value Tape::concat_rows(const std::vector<Value>& parts) {
  if (parts.empty())
    throw std::invalid_argument("concat_rows: no parts");
  const std::size_t cols = node(parts[0]).val.cols();
  std::size_t total = 0;
  for (Value p : parts) {
    if (node(p).val.cols() != cols)
      throw std::invalid_argument("concat_rows: column mismatch " +
                                  node(p).val.shape_str());
    total += node(p).val.rows();
  }
  Node n;
  n.kind = OpKind::kConcatRows;
  n.val = Tensor2(total, cols);
  std::size_t off = 0;
  for (Value p : parts) {
    const Tensor2& t = node(p).val;
    n.in.push_back(p.id);
    n.idx.push_back(off);
    std::memcpy(n.val.row_ptr(off), t.data(), t.size() * sizeof(double));
    off += t.rows();
  }
  return push(std::move(n));
}

Tape::Value Tape::transpose(Value a) {
  const Tensor2& t = node(a).val;
  Node n;
  n.kind = OpKind::kTranspose;
  n.in = {a.id};
  n.val = Tensor2(t.cols(), t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) n.val.at(c, r) = t.at(r, c);
  return push(std::move(n));
}

Tape::Value Tape::sum_all(Value a) {
  Node n;
  n.kind = OpKind::kSumAll;
  n.in = {a.id};
  const Tensor2& t = node(a).val;
  n.val = Tensor2(1, 1, {kernels::active().sum(t.data(), t.size())});
  return push(std::move(n));
}

Tape::Value Tape::mean_rows(Value a) {
  const Tensor2& t = node(a).val;
  if (t.rows() == 0) throw std::invalid_argument("mean_rows: no rows");
  Node n;
  n.kind = OpKind::kMeanRows;
  n.in = {a.id};
  n.val = Tensor2(1, t.cols());
  const double inv = 1.0 / static_cast<double>(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
    kernels::active().axpy(inv, t.row_ptr(r), n.val.data(), t.cols());
  return push(std::move(n));
}

Tape::Value Tape::row_gather(Value table,
                             const std::vector<std::size_t>& indices) {
  const Tensor2& t = node(table).val;
  if (indices.empty()) throw std::invalid_argument("row_gather: no indices");
  for (std::size_t i : indices)
    if (i >= t.rows())
      throw std::invalid_argument("row_gather: row " + std::to_string(i) +
                                  " out of range for " + t.shape_str());
  Node n;
  n.kind = OpKind::kRowGather;
  n.in = {table.id};
  n.idx = indices;
  n.val = Tensor2(indices.size(), t.cols());
  for (std::size_t r = 0; r < indices.size(); ++r)
    std::memcpy(n.val.row_ptr(r), t.row_ptr(indices[r]),
                t.cols() * sizeof(double));
  return push(std::move(n));
}

const Tensor2& Tape::value(Value v) const { return node(v).val; }

const Tensor2& Tape::grad(Value v) const { return node(v).grad; }

double Tape::scalar_value(Value v) const {
  const Tensor2& t = node(v).val;
  if (t.rows() != 1 || t.cols() != 1)
    throw std::invalid_argument("scalar_value: node is " + t.shape_str());
  return t.at(0, 0);
}

void Tape::backward_node(Node& n) {
  const auto& k = kernels::active();
  const Tensor2& g = n.grad;
  switch (n.kind) {
    case OpKind::kInput:
    case OpKind::kParam:
      break;
    case OpKind::kAffine: {
      Node& x = nodes_[n.in[0]];
      Node& w = nodes_[n.in[1]];
      const std::size_t rows = x.val.rows();
      const std::size_t d_in = x.val.cols();
      const std::size_t d_out = w.val.rows();
      k.matmul_nn(g.data(), w.val.data(), x.grad.data(), rows, d_out, d_in);
      k.matmul_tn(g.data(), x.val.data(), w.grad.data(), d_out, rows, d_in);
      if (n.in.size() == 3) {
        Node& b = nodes_[n.in[2]];
        for (std::size_t r = 0; r < rows; ++r)
          k.axpy(1.0, g.row_ptr(r), b.grad.data(), d_out);
      }
      break;
    }
    case OpKind::kRelu: {
      Node& x = nodes_[n.in[0]];
      k.relu_grad(x.val.data(), g.data(), x.grad.data(), x.val.size());
      break;
    }
    case OpKind::kLayerNorm: {
      Node& x = nodes_[n.in[0]];
      Node& gain = nodes_[n.in[1]];
      Node& bias = nodes_[n.in[2]];
      const std::size_t cols = x.val.cols();
      const double cn = static_cast<double>(cols);
      for (std::size_t r = 0; r < x.val.rows(); ++r) {
        const double mu = n.aux[2 * r];
        const double inv = n.aux[2 * r + 1];
        const double* xr = x.val.row_ptr(r);
        const double* gr = g.row_ptr(r);
        double sum_dxhat = 0.0;
        double sum_dxhat_xhat = 0.0;
        for (std::size_t i = 0; i < cols; ++i) {
          const double xhat = (xr[i] - mu) * inv;
          const double dxhat = gr[i] * gain.val.at(0, i);
          gain.grad.at(0, i) += gr[i] * xhat;
          bias.grad.at(0, i) += gr[i];
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * xhat;
        }
        const double m1 = sum_dxhat / cn;
        const double m2 = sum_dxhat_xhat / cn;
        double* dxr = x.grad.row_ptr(r);
        for (std::size_t i = 0; i < cols; ++i) {
          const double xhat = (xr[i] - mu) * inv;
          const double dxhat = gr[i] * gain.val.at(0, i);
          dxr[i] += inv * (dxhat - m1 - xhat * m2);
        }
      }
      break;
    }
    case OpKind::kSetMaxPool: {
      Node& x = nodes_[n.in[0]];
      for (std::size_t c = 0; c < n.val.cols(); ++c)
        x.grad.at(static_cast<std::size_t>(n.arg[c]), c) += g.at(0, c);
      break;
    }
    case OpKind::kSoftmaxXent: {
      Node& z = nodes_[n.in[0]];
      const std::size_t cols = z.val.cols();
      const double gs = g.at(0, 0);
      for (std::size_t r = 0; r < z.val.rows(); ++r) {
        double* dzr = z.grad.row_ptr(r);
        for (std::size_t i = 0; i < cols; ++i)
          dzr[i] += gs * n.aux[r * cols + i];
        dzr[n.idx[r]] -= gs;
      }
      break;
    }
    case OpKind::kCosine: {
      if (n.degenerate) break;
      Node& a = nodes_[n.in[0]];
      Node& b = nodes_[n.in[1]];
      const double na = n.aux[1];
      const double nb = n.aux[2];
      const double v = n.val.at(0, 0);
      const double gs = g.at(0, 0);
      const double* av = a.val.data();
      const double* bv = b.val.data();
      for (std::size_t i = 0; i < a.val.size(); ++i) {
        a.grad.data()[i] += gs * (bv[i] / (na * nb) - v * av[i] / (na * na));
        b.grad.data()[i] += gs * (av[i] / (na * nb) - v * bv[i] / (nb * nb));
      }
      break;
    }
    case OpKind::kAdd: {
      k.axpy(1.0, g.data(), nodes_[n.in[0]].grad.data(), g.size());
      k.axpy(1.0, g.data(), nodes_[n.in[1]].grad.data(), g.size());
      break;
    }
    case OpKind::kScaleConst: {
      k.axpy(n.c, g.data(), nodes_[n.in[0]].grad.data(), g.size());
      break;
    }
    case OpKind::kScaleByScalar: {
      Node& a = nodes_[n.in[0]];
      Node& s = nodes_[n.in[1]];
      k.axpy(s.val.at(0, 0), g.data(), a.grad.data(), g.size());
      s.grad.at(0, 0) += k.dot(g.data(), a.val.data(), g.size());
      break;
    }
    case OpKind::kExpScale: {
      Node& a = nodes_[n.in[0]];
      for (std::size_t i = 0; i < g.size(); ++i)
        a.grad.data()[i] += n.c * n.val.data()[i] * g.data()[i];
      break;
    }
    case OpKind::kConcatCols: {
      for (std::size_t p = 0; p < n.in.size(); ++p) {
        Node& part = nodes_[n.in[p]];
        const std::size_t off = n.idx[p];
        for (std::size_t r = 0; r < part.val.rows(); ++r)
          k.axpy(1.0, g.row_ptr(r) + off, part.grad.row_ptr(r),
                 part.val.cols());
      }
      break;
    }
    case OpKind::kConcatRows: {
      for (std::size_t p = 0; p < n.in.size(); ++p) {
        Node& part = nodes_[n.in[p]];
        const std::size_t off = n.idx[p];
        k.axpy(1.0, g.row_ptr(off), part.grad.data(), part.val.size());
      }
      break;
    }
    case OpKind::kTranspose: {
      Node& a = nodes_[n.in[0]];
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c)
          a.grad.at(c, r) += g.at(r, c);
      break;
    }
    case OpKind::kSumAll: {
      Node& a = nodes_[n.in[0]];
      const double gs = g.at(0, 0);
      for (std::size_t i = 0; i < a.grad.size(); ++i)
        a.grad.data()[i] += gs;
      break;
    }
    case OpKind::kMeanRows: {
      Node& a = nodes_[n.in[0]];
      const double inv = 1.0 / static_cast<double>(a.val.rows());
      for (std::size_t r = 0; r < a.val.rows(); ++r)
        k.axpy(inv, g.data(), a.grad.row_ptr(r), g.cols());
      break;
    }
    case OpKind::kRowGather: {
      Node& t = nodes_[n.in[0]];
      for (std::size_t r = 0; r < n.idx.size(); ++r)
        k.axpy(1.0, g.row_ptr(r), t.grad.row_ptr(n.idx[r]), g.cols());
      break;
    }
  }
}

void Tape::backpropagate(Value root) {
  Node& r = node(root);
  if (r.val.rows() != 1 || r.val.cols() != 1)
    throw std::invalid_argument("backpropagate: root must be 1x1, got " +
                                r.val.shape_str());
  for (Node& n : nodes_) n.grad.fill(0.0);
  r.grad.at(0, 0) = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad.all_finite())
      throw std::runtime_error(std::string(op_name(n.kind)) +
                               ": non-finite gradient");
    backward_node(n);
    if (n.kind == OpKind::kParam && n.bound != nullptr)
      kernels::active().axpy(1.0, n.grad.data(), n.bound->grad.data(),
                             n.grad.size());
  }
}

}  // namespace skelscore::engine
