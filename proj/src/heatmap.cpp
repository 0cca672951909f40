#include "dan/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dan/error.hpp"

namespace dan {

void write_weight_pgm(const std::string& path, const std::vector<double>& weights) {
  if (weights.empty()) throw ValueError("write_weight_pgm: empty weight vector");
  double max_w = *std::max_element(weights.begin(), weights.end());
  if (!(max_w > 0.0)) throw ValueError("write_weight_pgm: weights must have a positive maximum");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write heatmap: " + path);
  out << "P5\n" << weights.size() << " 1\n255\n";
  for (double w : weights) {
    int v = static_cast<int>(std::lround(255.0 * w / max_w));
    out.put(static_cast<char>(std::clamp(v, 0, 255)));
  }
  if (!out) throw IoError("failed writing heatmap: " + path);
}

}  // namespace dan
