#include "occfof/image.hpp"

#include <algorithm>

namespace occfof {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

}  // namespace occfof
