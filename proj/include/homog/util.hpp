#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace homog {

/// Shortest decimal string that round-trips the double exactly.
/// Locale-free ('.' decimal point), so repeated runs emit identical bytes.
std::string format_double(double x);

/// Runs body(i) for i in [0, n). With jobs <= 1 the loop is serial; otherwise
/// indices are handed to a small worker pool. Each index must write only its
/// own slots, so results never depend on the number of workers.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

/// Uniform double in [0, 1) from the top 53 bits of the generator.
/// Bit-reproducible across platforms, unlike uniform_real_distribution.
inline double u01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace homog
