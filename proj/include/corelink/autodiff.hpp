#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "corelink/matrix.hpp"

namespace corelink::ad {

// A trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), m(rows, cols),
        v(rows, cols) {}
};

// Owns parameters in creation order; the order fixes both initialization draws
// and optimizer iteration, which keeps runs reproducible.
class ParamStore {
 public:
  Parameter* create(const std::string& name, int rows, int cols);
  Parameter* find(const std::string& name) const;
  void zero_grads();
  std::size_t scalar_count() const;
  const std::vector<std::unique_ptr<Parameter>>& items() const { return items_; }

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

class Tape;

// Handle to a tape node.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
  const Matrix& grad() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  double scalar() const { return value()(0, 0); }
};

// Reverse-mode tape. One tape is built per training step and discarded; node
// order is creation order, which is already topological.
class Tape {
 public:
  Var constant(Matrix v);
  Var leaf(Matrix v);
  // Leaf backed by a Parameter; one node per parameter per tape, and backward()
  // accumulates the node gradient into p.grad.
  Var param(Parameter& p);

  void backward(Var loss);

  const Matrix& value(int id) const { return nodes_[id].value; }
  Matrix& grad(int id) { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t node_count() const { return nodes_.size(); }

  int push(Matrix value, bool requires_grad, std::function<void(Tape&)> back);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, int>> param_nodes_;
  std::unordered_map<const Parameter*, int> param_lookup_;
};

// Graph operations.
Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);  // a * b^T
Var add(Var a, Var b);
Var add_row_broadcast(Var a, Var bias);
Var mul_scalar(Var a, double s);
Var relu(Var a);
Var softmax_rows(Var a);
Var layer_norm_rows(Var x, Var gamma, Var beta, double eps);
Var gather_rows(Var a, std::vector<int> idx);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, int c0, int c1);
Var sum_all(Var a);  // 1 x 1

// Sum over mentions of -log sum_{y in gold(i)} P(y), with P the softmax over
// the candidate set [epsilon, 0 .. i-1] and s(i, epsilon) fixed at 0.
// mention_scores: k x 1 (optional), pair_scores: k(k-1)/2 x 1 ordered
// (i=1,j=0), (i=2,j=0), (i=2,j=1), ... An empty gold set for mention i means
// the gold antecedent is epsilon.
Var coref_nll(std::optional<Var> mention_scores, Var pair_scores,
              const std::vector<std::vector<int>>& gold_antecedents, int k);

// Sum over rows of -log softmax(logits_row)[target].
Var softmax_xent(Var logits, const std::vector<int>& targets);

inline int pair_index(int i, int j) { return i * (i - 1) / 2 + j; }

}  // namespace corelink::ad
