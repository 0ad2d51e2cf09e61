#include "grating/common.hpp"

#include <sstream>

namespace grating {

namespace {

std::string anomaly_message(long order, double gap) {
  std::ostringstream os;
  os << "Rayleigh anomaly at order j = " << order
     << ": non-resonance condition k^2 != alpha_j^2 violated (|k^2 - alpha_j^2| = " << gap
     << ")";
  return os.str();
}

std::string singular_message(const std::vector<std::size_t> &nodes) {
  std::ostringstream os;
  os << "Re(Q) is singular at " << nodes.size() << " node(s) of the grating";
  if (!nodes.empty()) {
    os << ", first node index " << nodes.front();
  }
  return os.str();
}

} // namespace

RayleighAnomaly::RayleighAnomaly(long order, double gap)
    : Error(anomaly_message(order, gap)), order_(order), gap_(gap) {}

SingularReQ::SingularReQ(std::vector<std::size_t> nodes)
    : Error(singular_message(nodes)), nodes_(std::move(nodes)) {}

} // namespace grating
