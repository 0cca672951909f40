#ifndef DAN_HEATMAP_HPP_
#define DAN_HEATMAP_HPP_

#include <string>
#include <vector>

namespace dan {

// Writes attention weights as a 1-row binary portable graymap (P5),
// pixel value = round(255 * weight / max weight).
void write_weight_pgm(const std::string& path, const std::vector<double>& weights);

}  // namespace dan

#endif  // DAN_HEATMAP_HPP_
