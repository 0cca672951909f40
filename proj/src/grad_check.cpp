#include "dan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dan/error.hpp"

namespace dan {

bool GradCheckReport::passed() const {
  for (const auto& e : entries)
    if (!(e.max_error < tolerance)) return false;
  return true;
}

const GradCheckEntry& GradCheckReport::worst() const {
  if (entries.empty()) throw ValueError("GradCheckReport: empty report");
  return *std::max_element(entries.begin(), entries.end(),
                           [](const GradCheckEntry& a, const GradCheckEntry& b) {
                             return a.max_error < b.max_error;
                           });
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  const auto& w = worst();
  os << (passed() ? "PASS" : "FAIL") << " (tol " << tolerance << "), worst '"
     << w.name << "' err " << w.max_error;
  return os.str();
}

GradCheckReport grad_check(const std::function<Var(Tape&)>& program,
                           ParamStore& params, double step, double tolerance) {
  // Reverse-mode gradients once.
  params.zero_grads();
  std::map<std::string, std::vector<double>> analytic;
  {
    Tape tape;
    Var loss = program(tape);
    tape.backward(loss);
    for (const auto& [name, p] : params.entries()) analytic[name] = p->grad;
  }

  auto eval = [&]() {
    Tape tape;
    return program(tape)->scalar();
  };

  GradCheckReport report;
  report.tolerance = tolerance;
  for (const auto& [name, p] : params.entries()) {
    GradCheckEntry entry;
    entry.name = name;
    const std::vector<double>& g = analytic[name];
    for (std::size_t i = 0; i < p->numel(); ++i) {
      double saved = p->values[i];
      p->values[i] = saved + step;
      double up = eval();
      p->values[i] = saved - step;
      double down = eval();
      p->values[i] = saved;
      double fd = (up - down) / (2.0 * step);
      // The 1e-5 floor keeps roundoff in the central difference (about
      // |loss| * eps / step) from registering as error on near-zero
      // gradients, while a genuinely dropped 1e-5-sized gradient still
      // shows up as error ~1.
      double denom = std::max({1e-5, std::fabs(g[i]), std::fabs(fd)});
      entry.max_error = std::max(entry.max_error, std::fabs(g[i] - fd) / denom);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace dan
