#include "dan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dan {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << " x ";
    os << s[i];
  }
  os << "]";
  return os.str();
}

double Tensor::scalar() const {
  if (numel() != 1)
    throw ShapeError("scalar() on tensor of shape " + shape_str(shape));
  return values[0];
}

Var make_tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw ShapeError("shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values = std::move(values);
  t->grad.assign(t->values.size(), 0.0);
  t->requires_grad = requires_grad;
  return t;
}

Var make_zeros(Shape shape, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return make_tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Var make_scalar(double value) { return make_tensor({}, {value}); }

void Tape::backward(const Var& loss) {
  if (consumed_) throw ValueError("Tape::backward: tape already consumed");
  if (loss->numel() != 1)
    throw ShapeError("backward: loss must be scalar, got shape " +
                     shape_str(loss->shape));
  consumed_ = true;
  loss->grad[0] += 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

namespace {

Var fresh(Shape shape, std::vector<double> values) {
  return make_tensor(std::move(shape), std::move(values));
}

void require_vector(const Var& v, const char* op) {
  if (v->shape.size() != 1)
    throw ShapeError(std::string(op) + ": expected 1-D tensor, got " +
                     shape_str(v->shape));
}

void require_matrix(const Var& v, const char* op) {
  if (v->shape.size() != 2)
    throw ShapeError(std::string(op) + ": expected 2-D tensor, got " +
                     shape_str(v->shape));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a->shape != b->shape)
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a->shape) + " vs " + shape_str(b->shape));
}

}  // namespace

Var affine(Tape& tape, const Var& x, const Var& w, const Var& b) {
  require_vector(x, "affine");
  require_matrix(w, "affine");
  require_vector(b, "affine");
  std::size_t m = w->rows(), n = w->cols();
  if (x->shape[0] != n || b->shape[0] != m)
    throw ShapeError("affine: w " + shape_str(w->shape) + " incompatible with x " +
                     shape_str(x->shape) + " and b " + shape_str(b->shape));
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = b->values[i];
    const double* wr = w->values.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wr[j] * x->values[j];
    out[i] = acc;
  }
  Var y = fresh({m}, std::move(out));
  tape.push([x, w, b, y, m, n]() {
    for (std::size_t i = 0; i < m; ++i) {
      double g = y->grad[i];
      if (g == 0.0) continue;
      b->grad[i] += g;
      const double* wr = w->values.data() + i * n;
      double* wg = w->grad.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        x->grad[j] += g * wr[j];
        wg[j] += g * x->values[j];
      }
    }
  });
  return y;
}

Var matvec(Tape& tape, const Var& w, const Var& x) {
  require_matrix(w, "matvec");
  require_vector(x, "matvec");
  std::size_t m = w->rows(), n = w->cols();
  if (x->shape[0] != n)
    throw ShapeError("matvec: w " + shape_str(w->shape) + " incompatible with x " +
                     shape_str(x->shape));
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* wr = w->values.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wr[j] * x->values[j];
    out[i] = acc;
  }
  Var y = fresh({m}, std::move(out));
  tape.push([x, w, y, m, n]() {
    for (std::size_t i = 0; i < m; ++i) {
      double g = y->grad[i];
      if (g == 0.0) continue;
      const double* wr = w->values.data() + i * n;
      double* wg = w->grad.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        x->grad[j] += g * wr[j];
        wg[j] += g * x->values[j];
      }
    }
  });
  return y;
}

Var add(Tape& tape, const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->values[i] + b->values[i];
  Var y = fresh(a->shape, std::move(out));
  tape.push([a, b, y]() {
    for (std::size_t i = 0; i < y->numel(); ++i) {
      a->grad[i] += y->grad[i];
      b->grad[i] += y->grad[i];
    }
  });
  return y;
}

Var scale(Tape& tape, const Var& x, double factor) {
  std::vector<double> out(x->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x->values[i];
  Var y = fresh(x->shape, std::move(out));
  tape.push([x, y, factor]() {
    for (std::size_t i = 0; i < y->numel(); ++i) x->grad[i] += factor * y->grad[i];
  });
  return y;
}

Var mul_elem(Tape& tape, const Var& a, const Var& b) {
  require_same_shape(a, b, "mul_elem");
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->values[i] * b->values[i];
  Var y = fresh(a->shape, std::move(out));
  tape.push([a, b, y]() {
    for (std::size_t i = 0; i < y->numel(); ++i) {
      a->grad[i] += y->grad[i] * b->values[i];
      b->grad[i] += y->grad[i] * a->values[i];
    }
  });
  return y;
}

Var tanh_elem(Tape& tape, const Var& x) {
  std::vector<double> out(x->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x->values[i]);
  Var y = fresh(x->shape, std::move(out));
  tape.push([x, y]() {
    for (std::size_t i = 0; i < y->numel(); ++i)
      x->grad[i] += y->grad[i] * (1.0 - y->values[i] * y->values[i]);
  });
  return y;
}

Var sigmoid_elem(Tape& tape, const Var& x) {
  std::vector<double> out(x->numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = x->values[i];
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                      : std::exp(v) / (1.0 + std::exp(v));
  }
  Var y = fresh(x->shape, std::move(out));
  tape.push([x, y]() {
    for (std::size_t i = 0; i < y->numel(); ++i)
      x->grad[i] += y->grad[i] * y->values[i] * (1.0 - y->values[i]);
  });
  return y;
}

Var relu(Tape& tape, const Var& x) {
  std::vector<double> out(x->numel());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = x->values[i] > 0.0 ? x->values[i] : 0.0;
  Var y = fresh(x->shape, std::move(out));
  // Subgradient at 0 is 0: gradient flows only where the input is strictly
  // positive.
  tape.push([x, y]() {
    for (std::size_t i = 0; i < y->numel(); ++i)
      if (x->values[i] > 0.0) x->grad[i] += y->grad[i];
  });
  return y;
}

Var softmax_masked(Tape& tape, const Var& scores,
                   const std::vector<std::uint8_t>& mask) {
  require_vector(scores, "softmax_masked");
  std::size_t n = scores->shape[0];
  if (mask.size() != n)
    throw ShapeError("softmax_masked: mask length " + std::to_string(mask.size()) +
                     " vs scores " + shape_str(scores->shape));
  double max_v = -HUGE_VAL;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) {
      ++valid;
      max_v = std::max(max_v, scores->values[i]);
    }
  if (valid == 0) throw ValueError("softmax_masked: empty support (all entries masked)");
  std::vector<double> out(n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) {
      out[i] = std::exp(scores->values[i] - max_v);
      z += out[i];
    }
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) out[i] /= z;
  Var y = fresh({n}, std::move(out));
  tape.push([scores, y, mask, n]() {
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) inner += y->grad[i] * y->values[i];
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) scores->grad[i] += y->values[i] * (y->grad[i] - inner);
  });
  return y;
}

Var weighted_sum(Tape& tape, const Var& weights, const Var& rows) {
  require_vector(weights, "weighted_sum");
  require_matrix(rows, "weighted_sum");
  std::size_t n = rows->rows(), d = rows->cols();
  if (weights->shape[0] != n)
    throw ShapeError("weighted_sum: weights " + shape_str(weights->shape) +
                     " vs rows " + shape_str(rows->shape));
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double w = weights->values[i];
    const double* r = rows->values.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) out[j] += w * r[j];
  }
  Var y = fresh({d}, std::move(out));
  tape.push([weights, rows, y, n, d]() {
    for (std::size_t i = 0; i < n; ++i) {
      const double* r = rows->values.data() + i * d;
      double* rg = rows->grad.data() + i * d;
      double w = weights->values[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += y->grad[j] * r[j];
        rg[j] += w * y->grad[j];
      }
      weights->grad[i] += acc;
    }
  });
  return y;
}

Var dot(Tape& tape, const Var& a, const Var& b) {
  require_vector(a, "dot");
  require_vector(b, "dot");
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a->numel(); ++i) acc += a->values[i] * b->values[i];
  Var y = fresh({}, {acc});
  tape.push([a, b, y]() {
    double g = y->grad[0];
    if (g == 0.0) return;
    for (std::size_t i = 0; i < a->numel(); ++i) {
      a->grad[i] += g * b->values[i];
      b->grad[i] += g * a->values[i];
    }
  });
  return y;
}

Var concat(Tape& tape, const std::vector<Var>& parts) {
  if (parts.empty()) throw ValueError("concat: empty part list");
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_vector(p, "concat");
    total += p->numel();
  }
  std::vector<double> out;
  out.reserve(total);
  for (const Var& p : parts)
    out.insert(out.end(), p->values.begin(), p->values.end());
  Var y = fresh({total}, std::move(out));
  tape.push([parts, y]() {
    std::size_t off = 0;
    for (const Var& p : parts) {
      for (std::size_t i = 0; i < p->numel(); ++i) p->grad[i] += y->grad[off + i];
      off += p->numel();
    }
  });
  return y;
}

Var stack_rows(Tape& tape, const std::vector<Var>& rows_in) {
  if (rows_in.empty()) throw ValueError("stack_rows: empty row list");
  std::size_t d = 0;
  for (const Var& r : rows_in) {
    require_vector(r, "stack_rows");
    if (d == 0)
      d = r->numel();
    else if (r->numel() != d)
      throw ShapeError("stack_rows: row length mismatch " + shape_str(r->shape) +
                       " vs expected [" + std::to_string(d) + "]");
  }
  std::size_t n = rows_in.size();
  std::vector<double> out;
  out.reserve(n * d);
  for (const Var& r : rows_in)
    out.insert(out.end(), r->values.begin(), r->values.end());
  Var y = fresh({n, d}, std::move(out));
  tape.push([rows_in, y, d]() {
    for (std::size_t i = 0; i < rows_in.size(); ++i) {
      const double* g = y->grad.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) rows_in[i]->grad[j] += g[j];
    }
  });
  return y;
}

Var row(Tape& tape, const Var& matrix, std::size_t index) {
  require_matrix(matrix, "row");
  std::size_t n = matrix->rows(), d = matrix->cols();
  if (index >= n)
    throw ValueError("row: index " + std::to_string(index) + " out of range for " +
                     shape_str(matrix->shape));
  std::vector<double> out(matrix->values.begin() + index * d,
                          matrix->values.begin() + (index + 1) * d);
  Var y = fresh({d}, std::move(out));
  tape.push([matrix, y, index, d]() {
    double* g = matrix->grad.data() + index * d;
    for (std::size_t j = 0; j < d; ++j) g[j] += y->grad[j];
  });
  return y;
}

Var embed_lookup(Tape& tape, const Var& embedding, const std::vector<int>& ids) {
  require_matrix(embedding, "embed_lookup");
  if (ids.empty()) throw ValueError("embed_lookup: empty id list");
  std::size_t d = embedding->rows(), vocab = embedding->cols();
  for (int id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw ValueError("embed_lookup: id " + std::to_string(id) +
                       " out of range [0, " + std::to_string(vocab) + ")");
  std::size_t t_len = ids.size();
  std::vector<double> out(t_len * d);
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t j = 0; j < d; ++j)
      out[t * d + j] = embedding->values[j * vocab + ids[t]];
  Var y = fresh({t_len, d}, std::move(out));
  tape.push([embedding, y, ids, d, vocab]() {
    for (std::size_t t = 0; t < ids.size(); ++t)
      for (std::size_t j = 0; j < d; ++j)
        embedding->grad[j * vocab + ids[t]] += y->grad[t * d + j];
  });
  return y;
}

Var cross_entropy_from_logits(Tape& tape, const Var& logits, int target) {
  require_vector(logits, "cross_entropy_from_logits");
  std::size_t c = logits->shape[0];
  if (target < 0 || static_cast<std::size_t>(target) >= c)
    throw ValueError("cross_entropy_from_logits: target " + std::to_string(target) +
                     " out of range [0, " + std::to_string(c) + ")");
  double max_v = *std::max_element(logits->values.begin(), logits->values.end());
  double z = 0.0;
  for (double v : logits->values) z += std::exp(v - max_v);
  double lse = max_v + std::log(z);
  Var y = fresh({}, {lse - logits->values[target]});
  tape.push([logits, y, target, lse]() {
    double g = y->grad[0];
    if (g == 0.0) return;
    for (std::size_t i = 0; i < logits->numel(); ++i) {
      double p = std::exp(logits->values[i] - lse);
      logits->grad[i] += g * (p - (static_cast<int>(i) == target ? 1.0 : 0.0));
    }
  });
  return y;
}

}  // namespace dan
