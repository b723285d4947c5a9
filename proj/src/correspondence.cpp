#include "apap/correspondence.hpp"

#include <cmath>
#include <sstream>

#include "apap/error.hpp"

namespace apap {

CorrespondenceSet CorrespondenceSet::from(std::span<const Correspondence> items,
                                          Provenance provenance) {
  CorrespondenceSet set(provenance);
  for (const auto& c : items) set.add(c);
  return set;
}

bool CorrespondenceSet::contains_source(const Vec2& x) const {
  for (const auto& c : items_)
    if ((c.x - x).norm() <= kDuplicateTolerance) return true;
  return false;
}

void CorrespondenceSet::add(const Correspondence& c) {
  if (!c.x.allFinite() || !c.xp.allFinite())
    throw InvalidInput("correspondence coordinates must be finite");
  if (contains_source(c.x)) {
    std::ostringstream msg;
    msg << "duplicate source point (" << c.x.x() << ", " << c.x.y() << ")";
    throw DuplicateError(msg.str());
  }
  items_.push_back(c);
}

bool CorrespondenceSet::try_add(const Correspondence& c) {
  if (!c.x.allFinite() || !c.xp.allFinite() || contains_source(c.x)) return false;
  items_.push_back(c);
  return true;
}

}  // namespace apap
