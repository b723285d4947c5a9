#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "apap/types.hpp"

namespace apap {

/// A matched pair: source point x = (p, q) and target point xp = (p', q').
struct Correspondence {
  Vec2 x = Vec2::Zero();
  Vec2 xp = Vec2::Zero();
};

enum class Provenance { File, Detector, Synthetic };

/// Ordered match list. No two entries share a source point (closer than 1e-6 px).
class CorrespondenceSet {
 public:
  static constexpr double kDuplicateTolerance = 1e-6;

  explicit CorrespondenceSet(Provenance provenance = Provenance::Detector)
      : provenance_(provenance) {}

  /// Builds a set from a list, throwing DuplicateError on repeated source points.
  static CorrespondenceSet from(std::span<const Correspondence> items,
                                Provenance provenance = Provenance::Detector);

  /// Appends; throws DuplicateError or InvalidInput (non-finite coordinates).
  void add(const Correspondence& c);

  /// Appends unless the source point is already present. Returns whether it was added.
  bool try_add(const Correspondence& c);

  bool contains_source(const Vec2& x) const;

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Correspondence& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  std::span<const Correspondence> items() const { return items_; }

  Provenance provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }

 private:
  std::vector<Correspondence> items_;
  Provenance provenance_;
};

}  // namespace apap
