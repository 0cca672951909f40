#include "dan/param_store.hpp"

#include <cmath>

#include "dan/error.hpp"

namespace dan {

Var ParamStore::create(const std::string& name, Shape shape,
                       std::vector<double> values) {
  if (params_.count(name))
    throw ValueError("ParamStore: duplicate parameter name '" + name + "'");
  Var t = make_tensor(std::move(shape), std::move(values), /*requires_grad=*/true);
  params_[name] = t;
  velocity_[name].assign(t->numel(), 0.0);
  return t;
}

Var ParamStore::create_zeros(const std::string& name, Shape shape) {
  std::size_t n = shape_numel(shape);
  return create(name, std::move(shape), std::vector<double>(n, 0.0));
}

Var ParamStore::create_xavier(const std::string& name, std::size_t fan_out,
                              std::size_t fan_in, Rng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(fan_out * fan_in);
  for (double& v : values) v = rng.uniform(-bound, bound);
  return create(name, {fan_out, fan_in}, std::move(values));
}

Var ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw ValueError("ParamStore: no parameter named '" + name + "'");
  return it->second;
}

bool ParamStore::contains(const std::string& name) const {
  return params_.count(name) != 0;
}

std::vector<double>& ParamStore::velocity(const std::string& name) {
  auto it = velocity_.find(name);
  if (it == velocity_.end())
    throw ValueError("ParamStore: no velocity buffer for '" + name + "'");
  return it->second;
}

const std::vector<double>& ParamStore::velocity(const std::string& name) const {
  auto it = velocity_.find(name);
  if (it == velocity_.end())
    throw ValueError("ParamStore: no velocity buffer for '" + name + "'");
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) p->zero_grad();
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p->numel();
  return n;
}

}  // namespace dan
