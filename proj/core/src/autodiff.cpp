#include "painet/autodiff.hpp"

#include <cassert>
#include <cmath>

namespace painet {

namespace detail {

void accumulate(GradMap& sink, const Node* node, Array grad) {
  auto it = sink.find(node);
  if (it == sink.end()) {
    sink.emplace(node, std::move(grad));
  } else {
    Array& cur = it->second;
    for (std::size_t i = 0; i < cur.numel(); ++i) cur[i] += grad[i];
  }
}

}  // namespace detail

using detail::accumulate;
using detail::GradMap;
using detail::Node;
using detail::NodePtr;

Var::Var(Array value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

void Var::set_value(Array v) {
  if (!node_) throw contract_error("set_value on empty Var");
  if (!node_->parents.empty()) throw contract_error("set_value is only valid on leaf nodes");
  if (!node_->value.same_shape(v)) {
    throw shape_error("set_value shape mismatch: " + shape_str(node_->value.shape()) + " vs " +
                      shape_str(v.shape()));
  }
  node_->value = std::move(v);
}

/// Builds an interior node. When no parent requires a gradient the parents
/// and closure are dropped, so constant subgraphs do not chain.
Var make_op(Array value, std::vector<NodePtr> parents,
            std::function<void(const Array&, GradMap&)> backward) {
  assert(value.all_finite());
  Var out;
  out.node_ = std::make_shared<Node>();
  out.node_->value = std::move(value);
  bool needs = false;
  for (const auto& p : parents) {
    if (p && p->requires_grad) needs = true;
  }
  out.node_->requires_grad = needs;
  if (needs) {
    out.node_->parents = std::move(parents);
    out.node_->backward = std::move(backward);
  }
  return out;
}

const Array& Gradients::at(const Var& v) const {
  auto it = map_.find(v.node());
  if (it == map_.end()) throw contract_error("no gradient recorded for this leaf");
  return it->second;
}

Array Gradients::get_or_zero(const Var& v) const {
  auto it = map_.find(v.node());
  if (it != map_.end()) return it->second;
  return Array(v.value().shape());
}

Gradients backward(const Var& loss) {
  if (!loss.defined()) throw contract_error("backward on empty Var");
  if (loss.value().numel() != 1) {
    throw contract_error("backward requires a scalar loss, got shape " +
                         shape_str(loss.value().shape()));
  }
  Gradients out;
  if (!loss.requires_grad()) return out;

  // Iterative post-order over grad-requiring nodes; parents come out first.
  std::vector<const Node*> order;
  std::unordered_map<const Node*, bool> seen;
  std::vector<std::pair<const Node*, std::size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  seen[loss.node()] = true;
  while (!stack.empty()) {
    auto& top = stack.back();
    const Node* n = top.first;
    if (top.second < n->parents.size()) {
      const Node* p = n->parents[top.second++].get();
      if (p && p->requires_grad && !seen.count(p)) {
        seen[p] = true;
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  out.map_.emplace(loss.node(), Array::full(loss.value().shape(), 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* n = *it;
    if (!n->backward) continue;  // leaf
    auto git = out.map_.find(n);
    if (git == out.map_.end()) continue;
    n->backward(git->second, out.map_);
  }
  // Interior gradients are scratch; keep leaf entries only.
  for (auto it = out.map_.begin(); it != out.map_.end();) {
    if (it->first->backward) {
      it = out.map_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// primitives

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw shape_error(std::string(op) + " shape mismatch: " + shape_str(a.value().shape()) +
                      " vs " + shape_str(b.value().shape()));
  }
}

void require_rank2(const Var& a, const char* op) {
  if (a.value().ndim() != 2) {
    throw shape_error(std::string(op) + " requires rank-2 input, got " +
                      shape_str(a.value().shape()));
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Node* pa = a.node();
  Node* pb = b.node();
  return make_op(painet::add(a.value(), b.value()), {a.node_ptr(), b.node_ptr()},
                 [pa, pb](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) accumulate(sink, pa, g);
                   if (pb->requires_grad) accumulate(sink, pb, g);
                 });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Node* pa = a.node();
  Node* pb = b.node();
  return make_op(painet::sub(a.value(), b.value()), {a.node_ptr(), b.node_ptr()},
                 [pa, pb](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) accumulate(sink, pa, g);
                   if (pb->requires_grad) accumulate(sink, pb, painet::scale(g, -1.0));
                 });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Node* pa = a.node();
  Node* pb = b.node();
  return make_op(hadamard(a.value(), b.value()), {a.node_ptr(), b.node_ptr()},
                 [pa, pb](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) accumulate(sink, pa, hadamard(g, pb->value));
                   if (pb->requires_grad) accumulate(sink, pb, hadamard(g, pa->value));
                 });
}

Var scale(const Var& a, double s) {
  Node* pa = a.node();
  return make_op(painet::scale(a.value(), s), {a.node_ptr()},
                 [pa, s](const Array& g, GradMap& sink) {
                   accumulate(sink, pa, painet::scale(g, s));
                 });
}

Var mul_scalar(const Var& a, const Var& s) {
  if (s.value().numel() != 1) {
    throw shape_error("mul_scalar scale must be a single element, got " +
                      shape_str(s.value().shape()));
  }
  Node* pa = a.node();
  Node* ps = s.node();
  double sv = s.value()[0];
  return make_op(painet::scale(a.value(), sv), {a.node_ptr(), s.node_ptr()},
                 [pa, ps, sv](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) accumulate(sink, pa, painet::scale(g, sv));
                   if (ps->requires_grad) {
                     double acc = 0.0;
                     for (std::size_t i = 0; i < g.numel(); ++i) acc += g[i] * pa->value[i];
                     accumulate(sink, ps, Array::scalar(acc));
                   }
                 });
}

Var matmul(const Var& a, const Var& b) {
  Node* pa = a.node();
  Node* pb = b.node();
  return make_op(painet::matmul(a.value(), b.value()), {a.node_ptr(), b.node_ptr()},
                 [pa, pb](const Array& g, GradMap& sink) {
                   if (pa->requires_grad)
                     accumulate(sink, pa, painet::matmul(g, painet::transpose(pb->value)));
                   if (pb->requires_grad)
                     accumulate(sink, pb, painet::matmul(painet::transpose(pa->value), g));
                 });
}

Var transpose(const Var& a) {
  require_rank2(a, "transpose");
  Node* pa = a.node();
  return make_op(painet::transpose(a.value()), {a.node_ptr()},
                 [pa](const Array& g, GradMap& sink) {
                   accumulate(sink, pa, painet::transpose(g));
                 });
}

Var sigmoid(const Var& a) {
  Array v = a.value();
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = 1.0 / (1.0 + std::exp(-v[i]));
  Node* pa = a.node();
  Array saved = v;
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, saved](const Array& g, GradMap& sink) {
                   Array d = g;
                   for (std::size_t i = 0; i < d.numel(); ++i)
                     d[i] *= saved[i] * (1.0 - saved[i]);
                   accumulate(sink, pa, std::move(d));
                 });
}

Var silu(const Var& a) {
  Array v = a.value();
  for (std::size_t i = 0; i < v.numel(); ++i) {
    double s = 1.0 / (1.0 + std::exp(-v[i]));
    v[i] = v[i] * s;
  }
  Node* pa = a.node();
  return make_op(std::move(v), {a.node_ptr()},
                 [pa](const Array& g, GradMap& sink) {
                   Array d = g;
                   for (std::size_t i = 0; i < d.numel(); ++i) {
                     double x = pa->value[i];
                     double s = 1.0 / (1.0 + std::exp(-x));
                     d[i] *= s * (1.0 + x * (1.0 - s));
                   }
                   accumulate(sink, pa, std::move(d));
                 });
}

Var vexp(const Var& a) {
  Array v = a.value();
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = std::exp(v[i]);
  Node* pa = a.node();
  Array saved = v;
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, saved](const Array& g, GradMap& sink) {
                   Array d = g;
                   for (std::size_t i = 0; i < d.numel(); ++i) d[i] *= saved[i];
                   accumulate(sink, pa, std::move(d));
                 });
}

Var row_sum(const Var& a) {
  require_rank2(a, "row_sum");
  std::size_t n = a.value().rows(), d = a.value().cols();
  Array v({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += a.value()(i, j);
    v(i, 0) = s;
  }
  Node* pa = a.node();
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, n, d](const Array& g, GradMap& sink) {
                   Array out({n, d});
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < d; ++j) out(i, j) = g(i, 0);
                   accumulate(sink, pa, std::move(out));
                 });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().numel(); ++i) s += a.value()[i];
  Node* pa = a.node();
  return make_op(Array::scalar(s), {a.node_ptr()},
                 [pa](const Array& g, GradMap& sink) {
                   accumulate(sink, pa, Array::full(pa->value.shape(), g[0]));
                 });
}

Var sqnorm(const Var& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().numel(); ++i) s += a.value()[i] * a.value()[i];
  Node* pa = a.node();
  return make_op(Array::scalar(s), {a.node_ptr()},
                 [pa](const Array& g, GradMap& sink) {
                   Array d(pa->value.shape());
                   for (std::size_t i = 0; i < d.numel(); ++i) d[i] = 2.0 * pa->value[i] * g[0];
                   accumulate(sink, pa, std::move(d));
                 });
}

Var add_rowvec(const Var& a, const Var& r) {
  require_rank2(a, "add_rowvec");
  if (r.value().ndim() != 2 || r.value().rows() != 1 || r.value().cols() != a.value().cols()) {
    throw shape_error("add_rowvec expects {1," + std::to_string(a.value().cols()) +
                      "} row vector, got " + shape_str(r.value().shape()));
  }
  std::size_t n = a.value().rows(), d = a.value().cols();
  Array v = a.value();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) v(i, j) += r.value()(0, j);
  Node* pa = a.node();
  Node* pr = r.node();
  return make_op(std::move(v), {a.node_ptr(), r.node_ptr()},
                 [pa, pr, n, d](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) accumulate(sink, pa, g);
                   if (pr->requires_grad) {
                     Array cr({1, d});
                     for (std::size_t j = 0; j < d; ++j) {
                       double s = 0.0;
                       for (std::size_t i = 0; i < n; ++i) s += g(i, j);
                       cr(0, j) = s;
                     }
                     accumulate(sink, pr, std::move(cr));
                   }
                 });
}

Var mul_colvec(const Var& a, const Var& c) {
  require_rank2(a, "mul_colvec");
  if (c.value().ndim() != 2 || c.value().cols() != 1 || c.value().rows() != a.value().rows()) {
    throw shape_error("mul_colvec expects {" + std::to_string(a.value().rows()) +
                      ",1} column vector, got " + shape_str(c.value().shape()));
  }
  std::size_t n = a.value().rows(), d = a.value().cols();
  Array v = a.value();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) v(i, j) *= c.value()(i, 0);
  Node* pa = a.node();
  Node* pc = c.node();
  return make_op(std::move(v), {a.node_ptr(), c.node_ptr()},
                 [pa, pc, n, d](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) {
                     Array da({n, d});
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < d; ++j) da(i, j) = g(i, j) * pc->value(i, 0);
                     accumulate(sink, pa, std::move(da));
                   }
                   if (pc->requires_grad) {
                     Array dc({n, 1});
                     for (std::size_t i = 0; i < n; ++i) {
                       double s = 0.0;
                       for (std::size_t j = 0; j < d; ++j) s += g(i, j) * pa->value(i, j);
                       dc(i, 0) = s;
                     }
                     accumulate(sink, pc, std::move(dc));
                   }
                 });
}

Var recip_floor(const Var& a, double eps) {
  if (eps <= 0.0) throw contract_error("recip_floor eps must be positive");
  Array v = a.value();
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = 1.0 / std::max(v[i], eps);
  Node* pa = a.node();
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, eps](const Array& g, GradMap& sink) {
                   Array d = g;
                   for (std::size_t i = 0; i < d.numel(); ++i) {
                     double x = pa->value[i];
                     d[i] = (x > eps) ? -g[i] / (x * x) : 0.0;
                   }
                   accumulate(sink, pa, std::move(d));
                 });
}

Array rowwise_l2_normalize(const Array& a, double eps) {
  if (a.ndim() != 2) {
    throw shape_error("rowwise_l2_normalize requires rank-2 input, got " + shape_str(a.shape()));
  }
  if (eps <= 0.0) throw contract_error("rowwise_l2_normalize eps must be positive");
  Array out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    double n = std::max(std::sqrt(s), eps);
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) /= n;
  }
  return out;
}

Var rowwise_l2_normalize(const Var& a, double eps) {
  Array v = rowwise_l2_normalize(a.value(), eps);
  std::size_t n = v.rows(), d = v.cols();
  // save norms for the backward pass
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += a.value()(i, j) * a.value()(i, j);
    norms[i] = std::max(std::sqrt(s), eps);
  }
  Node* pa = a.node();
  Array saved = v;
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, saved, norms, n, d, eps](const Array& g, GradMap& sink) {
                   Array out({n, d});
                   for (std::size_t i = 0; i < n; ++i) {
                     if (norms[i] > eps) {
                       // d(x/||x||) = (g - y (y.g)) / ||x||
                       double yg = 0.0;
                       for (std::size_t j = 0; j < d; ++j) yg += saved(i, j) * g(i, j);
                       for (std::size_t j = 0; j < d; ++j)
                         out(i, j) = (g(i, j) - saved(i, j) * yg) / norms[i];
                     } else {
                       for (std::size_t j = 0; j < d; ++j) out(i, j) = g(i, j) / eps;
                     }
                   }
                   accumulate(sink, pa, std::move(out));
                 });
}

Var concat_cols(const Var& a, const Var& b) {
  require_rank2(a, "concat_cols");
  require_rank2(b, "concat_cols");
  if (a.value().rows() != b.value().rows()) {
    throw shape_error("concat_cols row mismatch: " + shape_str(a.value().shape()) + " vs " +
                      shape_str(b.value().shape()));
  }
  std::size_t n = a.value().rows(), da = a.value().cols(), db = b.value().cols();
  Array v({n, da + db});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < da; ++j) v(i, j) = a.value()(i, j);
    for (std::size_t j = 0; j < db; ++j) v(i, da + j) = b.value()(i, j);
  }
  Node* pa = a.node();
  Node* pb = b.node();
  return make_op(std::move(v), {a.node_ptr(), b.node_ptr()},
                 [pa, pb, n, da, db](const Array& g, GradMap& sink) {
                   if (pa->requires_grad) {
                     Array ga({n, da});
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < da; ++j) ga(i, j) = g(i, j);
                     accumulate(sink, pa, std::move(ga));
                   }
                   if (pb->requires_grad) {
                     Array gb({n, db});
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < db; ++j) gb(i, j) = g(i, da + j);
                     accumulate(sink, pb, std::move(gb));
                   }
                 });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_cols");
  if (begin >= end || end > a.value().cols()) {
    throw shape_error("slice_cols range [" + std::to_string(begin) + "," + std::to_string(end) +
                      ") out of bounds for " + shape_str(a.value().shape()));
  }
  std::size_t n = a.value().rows(), w = end - begin, full = a.value().cols();
  Array v({n, w});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) v(i, j) = a.value()(i, begin + j);
  Node* pa = a.node();
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, n, w, full, begin](const Array& g, GradMap& sink) {
                   Array out({n, full});
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < w; ++j) out(i, begin + j) = g(i, j);
                   accumulate(sink, pa, std::move(out));
                 });
}

Var gather_rows(const Var& a, std::vector<std::size_t> idx) {
  require_rank2(a, "gather_rows");
  std::size_t n = a.value().rows(), d = a.value().cols();
  for (std::size_t r : idx) {
    if (r >= n) throw graph_error("gather_rows index " + std::to_string(r) + " out of range");
  }
  Array v({idx.size(), d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t j = 0; j < d; ++j) v(r, j) = a.value()(idx[r], j);
  Node* pa = a.node();
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, idx = std::move(idx), n, d](const Array& g, GradMap& sink) {
                   Array out({n, d});
                   for (std::size_t r = 0; r < idx.size(); ++r)
                     for (std::size_t j = 0; j < d; ++j) out(idx[r], j) += g(r, j);
                   accumulate(sink, pa, std::move(out));
                 });
}

Var scatter_add_rows(const Var& a, std::vector<std::size_t> idx, std::size_t n_rows) {
  require_rank2(a, "scatter_add_rows");
  if (idx.size() != a.value().rows()) {
    throw shape_error("scatter_add_rows needs one index per row: " +
                      std::to_string(idx.size()) + " vs " + std::to_string(a.value().rows()));
  }
  std::size_t d = a.value().cols();
  for (std::size_t r : idx) {
    if (r >= n_rows)
      throw graph_error("scatter_add_rows index " + std::to_string(r) + " out of range");
  }
  Array v({n_rows, d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t j = 0; j < d; ++j) v(idx[r], j) += a.value()(r, j);
  Node* pa = a.node();
  return make_op(std::move(v), {a.node_ptr()},
                 [pa, idx = std::move(idx), d](const Array& g, GradMap& sink) {
                   Array out({idx.size(), d});
                   for (std::size_t r = 0; r < idx.size(); ++r)
                     for (std::size_t j = 0; j < d; ++j) out(r, j) = g(idx[r], j);
                   accumulate(sink, pa, std::move(out));
                 });
}

Var min_all(const Var& a) {
  if (a.value().numel() == 0) throw contract_error("min_all of empty array");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < a.value().numel(); ++i)
    if (a.value()[i] < a.value()[arg]) arg = i;
  Node* pa = a.node();
  return make_op(Array::scalar(a.value()[arg]), {a.node_ptr()},
                 [pa, arg](const Array& g, GradMap& sink) {
                   Array out(pa->value.shape());
                   out[arg] = g[0];
                   accumulate(sink, pa, std::move(out));
                 });
}

Var min_scalar(const Var& a, const Var& b) {
  if (a.value().numel() != 1 || b.value().numel() != 1) {
    throw shape_error("min_scalar expects single-element inputs");
  }
  bool take_a = a.value()[0] <= b.value()[0];
  Node* pa = a.node();
  Node* pb = b.node();
  return make_op(Array::scalar(take_a ? a.value()[0] : b.value()[0]),
                 {a.node_ptr(), b.node_ptr()},
                 [pa, pb, take_a](const Array& g, GradMap& sink) {
                   Node* tgt = take_a ? pa : pb;
                   if (tgt->requires_grad) accumulate(sink, tgt, g);
                 });
}

}  // namespace painet
