#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ibx/tensor.hpp"

namespace ibx {

// Reverse-mode tape. Every op records its hand-derived backward rule; calling
// backward() on a scalar root replays the recorded computation order in
// reverse. Parameters are leaves registered by name; constants never receive
// gradients. Matrices are [rows, cols]; "colvec" arguments are [rows, 1].
class Graph {
 public:
  using Var = int;

  Var constant(Tensor v);
  // registers (or re-uses) a named parameter leaf
  Var param(const std::string& name, const Tensor& value);

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_rowvec(Var a, Var bias);   // [m,n] + [n] broadcast over rows
  Var mul_colvec(Var a, Var c);      // [m,n] * [m,1] broadcast over cols
  Var scale(Var a, double k);
  Var add_scalar(Var a, double k);
  Var neg(Var a) { return scale(a, -1.0); }
  Var square(Var a);
  Var log(Var a);
  Var exp(Var a);
  Var recip(Var a);
  Var softplus(Var a);
  Var leaky_relu(Var a, double slope = 0.01);
  Var clip(Var a, double lo, double hi);
  Var minimum(Var a, Var b);
  Var l2_normalize_rows(Var a);      // zero rows map to themselves
  Var concat_cols(Var a, Var b);
  Var row_sum(Var a);                // [m,n] -> [m,1]
  Var sum_all(Var a);                // -> [1]
  Var mean_all(Var a);               // -> [1]

  // mean_i [ L_ii - logsumexp_j L_ij ] for square logits (InfoNCE with the
  // batch as negatives); max-subtracted log-sum-exp
  Var diag_logsoftmax_mean(Var logits);
  // per-row log pi(action) of softmax(logits): [B,A] -> [B,1]
  Var logprob_rows(Var logits, std::vector<int> actions);
  // mean over rows of softmax entropy: [B,A] -> [1]
  Var entropy_mean(Var logits);

  void backward(Var root);

  const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v)].value; }
  // gradient accumulated in a named parameter leaf (zeros if untouched)
  const Tensor& param_grad(const std::string& name);
  bool has_param(const std::string& name) const { return params_.count(name) > 0; }
  std::vector<std::string> param_names() const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool grad_alloc = false;
    bool needs_grad = false;
    std::vector<int> parents;
    std::function<void(Graph&, int)> back;  // pulls this node's grad into parents
    std::string pname;
  };

  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> params_;

  Var push(Tensor value, std::vector<int> parents, std::function<void(Graph&, int)> back);
  Tensor& grad_buf(int idx);
  const Node& node(int idx) const { return nodes_[static_cast<std::size_t>(idx)]; }
  void accumulate(int idx, const Tensor& g);

  static void check_same_shape(const Tensor& a, const Tensor& b, const char* op);
};

}  // namespace ibx
