#include "grating/grid.hpp"

#include <sstream>

namespace grating {

Grid::Grid(int n1_, int n2_, double rho_box_) : n1(n1_), n2(n2_), rho_box(rho_box_) {
  if (n1 <= 0 || n2 <= 0 || n1 % 2 != 0 || n2 % 2 != 0) {
    std::ostringstream os;
    os << "grid mode counts must be even and positive, got " << n1 << " x " << n2;
    throw GeometryError(os.str());
  }
  if (!(rho_box > 0.0)) {
    throw GeometryError("grid half-height rho_box must be positive");
  }
}

} // namespace grating
