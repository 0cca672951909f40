#ifndef DAN_GRAD_CHECK_HPP_
#define DAN_GRAD_CHECK_HPP_

#include <functional>
#include <string>
#include <vector>

#include "dan/param_store.hpp"
#include "dan/tensor.hpp"

namespace dan {

struct GradCheckEntry {
  std::string name;
  double max_error = 0.0;  // worst relative error over the parameter's elements
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  bool passed() const;
  const GradCheckEntry& worst() const;
  std::string summary() const;
};

// Compares reverse-mode gradients of `program` against central finite
// differences of step `step`, element by element, for every parameter in the
// store. `program` must rebuild the loss on the given tape and be
// deterministic (dropout disabled). Relative error uses
// |g - fd| / max(1e-5, |g|, |fd|).
GradCheckReport grad_check(const std::function<Var(Tape&)>& program,
                           ParamStore& params, double step, double tolerance);

}  // namespace dan

#endif  // DAN_GRAD_CHECK_HPP_
