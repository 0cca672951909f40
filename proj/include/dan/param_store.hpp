#ifndef DAN_PARAM_STORE_HPP_
#define DAN_PARAM_STORE_HPP_

#include <map>
#include <string>
#include <vector>

#include "dan/rng.hpp"
#include "dan/tensor.hpp"

namespace dan {

// Named trainable parameters plus their momentum buffers. A momentum buffer
// exists for exactly the parameters in the store, always the same shape.
// Iteration is in name order, which keeps every consumer deterministic.
class ParamStore {
 public:
  Var create(const std::string& name, Shape shape, std::vector<double> values);
  Var create_zeros(const std::string& name, Shape shape);
  // Scaled-uniform init in +-sqrt(6 / (fan_in + fan_out)) for a
  // [fan_out x fan_in] matrix.
  Var create_xavier(const std::string& name, std::size_t fan_out,
                    std::size_t fan_in, Rng& rng);

  Var get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<double>& velocity(const std::string& name);
  const std::vector<double>& velocity(const std::string& name) const;

  void zero_grads();
  std::size_t size() const { return params_.size(); }
  std::size_t total_elements() const;

  const std::map<std::string, Var>& entries() const { return params_; }

 private:
  std::map<std::string, Var> params_;
  std::map<std::string, std::vector<double>> velocity_;
};

}  // namespace dan

#endif  // DAN_PARAM_STORE_HPP_
