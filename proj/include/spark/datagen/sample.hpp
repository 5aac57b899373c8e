#pragma once

#include <string>
#include <vector>

namespace spark {

// One labeled image. Pixels are row-major HWC, values in [0, 1].
struct Sample {
  std::vector<double> pixels;
  int label = 0;  // 0 = real, 1 = fake
  std::string generator_id;
  std::string sample_id;
};

}  // namespace spark
