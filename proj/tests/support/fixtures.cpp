#include "fixtures.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace tbnls::test {

const ReductionSetup& small_setup(double hbar) {
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<ReductionSetup>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[hbar];
  if (!slot) slot = std::make_unique<ReductionSetup>(prepare_reduction(small_lattice(), hbar));
  return *slot;
}

}  // namespace tbnls::test
