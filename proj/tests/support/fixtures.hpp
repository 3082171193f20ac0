#pragma once

#include "tbnls/basis.hpp"

namespace tbnls::test {

/// Small sin^2 lattice for quick checks.
inline LatticeModel small_lattice(int cells = 8, int points = 64, const char* w = "w-cos") {
  LatticeSpec spec;
  spec.num_cells = cells;
  spec.points_per_cell = points;
  spec.perturbation.name = w;
  return LatticeModel::build(spec);
}

inline LatticeModel reference_lattice() { return LatticeModel::build(LatticeSpec{}); }

/// prepare_reduction on the small lattice, cached per hbar within a test binary.
const ReductionSetup& small_setup(double hbar);

}  // namespace tbnls::test
