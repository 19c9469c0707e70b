#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "painet/array.hpp"

namespace painet {

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;
using GradMap = std::unordered_map<const Node*, Array>;

/// One vertex of the reverse-mode computation graph. `backward` receives the
/// gradient w.r.t. `value` and accumulates contributions for the parents
/// into the sink map. Leaves have no parents and no backward fn.
struct Node {
  Array value;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(const Array& grad, GradMap& sink)> backward;
};

void accumulate(GradMap& sink, const Node* node, Array grad);

}  // namespace detail

/// Handle to a graph node. Copies share the node. A Var built from an Array
/// is a leaf; `requires_grad=true` marks it as a trainable parameter.
class Var {
 public:
  Var() = default;
  explicit Var(Array value, bool requires_grad = false);

  static Var param(Array value) { return Var(std::move(value), true); }
  static Var constant(Array value) { return Var(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Array& value() const { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Reseat the value of a leaf (optimizer updates between graph builds).
  /// Contract error on interior nodes.
  void set_value(Array v);

  detail::Node* node() const { return node_.get(); }
  const detail::NodePtr& node_ptr() const { return node_; }

 private:
  friend Var make_op(Array value, std::vector<detail::NodePtr> parents,
                     std::function<void(const Array&, detail::GradMap&)> backward);
  detail::NodePtr node_;
};

/// Result of a backward pass: gradient per reachable leaf.
class Gradients {
 public:
  bool contains(const Var& v) const { return map_.count(v.node()) != 0; }
  /// Gradient for a leaf; contract error if the leaf was not reached.
  const Array& at(const Var& v) const;
  /// Gradient for a leaf, or zeros of its shape if unreached.
  Array get_or_zero(const Var& v) const;

  detail::GradMap map_;
};

/// Reverse-mode sweep from a scalar loss. Seeds d(loss)/d(loss)=1 and visits
/// each reachable node exactly once in reverse topological order.
Gradients backward(const Var& loss);

// ---- differentiable primitives -------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);             // Hadamard
Var scale(const Var& a, double s);
Var mul_scalar(const Var& a, const Var& s);      // s is a {1} Var
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var sigmoid(const Var& a);
Var silu(const Var& a);                          // the one MLP nonlinearity
Var vexp(const Var& a);
Var row_sum(const Var& a);                       // {n,d} -> {n,1}
Var sum_all(const Var& a);                       // -> {1}
Var sqnorm(const Var& a);                        // sum of squares -> {1}
Var add_rowvec(const Var& a, const Var& r);      // {n,d} + {1,d}
Var mul_colvec(const Var& a, const Var& c);      // row i of a scaled by c[i]
Var recip_floor(const Var& a, double eps);       // 1 / max(x, eps)
Var rowwise_l2_normalize(const Var& a, double eps);
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
Var gather_rows(const Var& a, std::vector<std::size_t> idx);
Var scatter_add_rows(const Var& a, std::vector<std::size_t> idx, std::size_t n_rows);
Var min_all(const Var& a);                       // subgradient to first argmin
Var min_scalar(const Var& a, const Var& b);      // both {1}

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

/// Plain-array forward of rowwise_l2_normalize (shared by oracles).
Array rowwise_l2_normalize(const Array& a, double eps);

inline constexpr double kEpsFloor = 1e-12;

}  // namespace painet
