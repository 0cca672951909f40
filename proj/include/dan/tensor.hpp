#ifndef DAN_TENSOR_HPP_
#define DAN_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dan/error.hpp"

namespace dan {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// Dense 64-bit float tensor. Rank 0 with one value is a scalar, rank 1 a
// vector, rank 2 a row-major matrix. grad always has the same length as
// values and starts at zero.
struct Tensor {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;

  std::size_t numel() const { return values.size(); }
  bool is_scalar() const { return values.size() == 1 && shape.empty(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }
  double scalar() const;
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

using Var = std::shared_ptr<Tensor>;

Var make_tensor(Shape shape, std::vector<double> values, bool requires_grad = false);
Var make_zeros(Shape shape, bool requires_grad = false);
Var make_scalar(double value);

// Records the primitive operations of one forward pass and replays them in
// exact reverse order to accumulate gradients. One tape per forward pass,
// discarded after backward.
class Tape {
 public:
  void push(std::function<void()> backward_step) {
    steps_.push_back(std::move(backward_step));
  }
  std::size_t size() const { return steps_.size(); }

  // Seeds d(loss)/d(loss) = 1 and runs every recorded step in reverse.
  // loss must be a single-element tensor. A tape runs backward once.
  void backward(const Var& loss);

 private:
  std::vector<std::function<void()>> steps_;
  bool consumed_ = false;
};

// ---- primitives -----------------------------------------------------------
// Each op computes the forward value immediately and records its reverse
// rule on the tape.

// w[m x n] * x[n] + b[m]
Var affine(Tape& tape, const Var& x, const Var& w, const Var& b);
// w[m x n] * x[n]
Var matvec(Tape& tape, const Var& w, const Var& x);
Var add(Tape& tape, const Var& a, const Var& b);
Var scale(Tape& tape, const Var& x, double factor);
Var mul_elem(Tape& tape, const Var& a, const Var& b);
Var tanh_elem(Tape& tape, const Var& x);
Var sigmoid_elem(Tape& tape, const Var& x);
Var relu(Tape& tape, const Var& x);
// Masked entries come out exactly 0; the rest are positive and sum to 1.
// Computed with max-subtraction. mask must have at least one nonzero entry.
Var softmax_masked(Tape& tape, const Var& scores, const std::vector<std::uint8_t>& mask);
// sum_i weights[i] * rows[i, :]
Var weighted_sum(Tape& tape, const Var& weights, const Var& rows);
// Inner product; result is a rank-0 scalar.
Var dot(Tape& tape, const Var& a, const Var& b);
// Order-preserving concatenation of 1-D parts.
Var concat(Tape& tape, const std::vector<Var>& parts);
// Stack 1-D rows of equal length into a matrix.
Var stack_rows(Tape& tape, const std::vector<Var>& rows);
// Extract row `index` of a matrix as a vector.
Var row(Tape& tape, const Var& matrix, std::size_t index);
// embedding[d x vocab]; output row t is column ids[t]. Gradients scatter
// back into the selected columns, accumulating over repeats.
Var embed_lookup(Tape& tape, const Var& embedding, const std::vector<int>& ids);
// logsumexp(logits) - logits[target]; gradient is softmax(logits) - onehot.
Var cross_entropy_from_logits(Tape& tape, const Var& logits, int target);

}  // namespace dan

#endif  // DAN_TENSOR_HPP_
