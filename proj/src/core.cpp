#include "qkern/core.hpp"

#include <string>

namespace qkern {

void check_enumeration(std::size_t alphabet_size, int length) {
  if (length < 0) throw std::invalid_argument("enumeration length must be non-negative");
  std::size_t count = 1;
  for (int i = 0; i < length; ++i) {
    count *= alphabet_size;
    if (count > kEnumerationCap) {
      throw EnumerationCapError("enumerating " + std::to_string(alphabet_size) + "^" + std::to_string(length) +
                                " sequences exceeds the cap of " + std::to_string(kEnumerationCap));
    }
  }
}

}  // namespace qkern
