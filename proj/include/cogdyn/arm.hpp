#pragma once

#include <memory>
#include <vector>

#include "cogdyn/arm_model.hpp"
#include "cogdyn/modal.hpp"

namespace cogdyn {

// A validated arm model together with the certified modal polynomial of
// every section. Immutable and cheap to share across threads.
class Arm {
 public:
  explicit Arm(ArmModel model);
  Arm(ArmModel model, ModalCache& cache);

  const ArmModel& model() const { return model_; }
  int size() const { return model_.size(); }
  int dof() const { return model_.dof(); }
  const SectionParams& params(int i) const { return model_.sections[i]; }
  const ModalSection& shape(int i) const { return *shapes_[i]; }
  const Vec3& gravity() const { return model_.gravity; }

  static Vec3 joints(const VecX& q, int i) { return q.segment<3>(3 * i); }

 private:
  ArmModel model_;
  std::vector<std::shared_ptr<const ModalSection>> shapes_;
};

// Throws ValidationError when q has the wrong length or leaves the domain.
void require_configuration(const Arm& arm, const VecX& q);
void require_state(const Arm& arm, const VecX& q, const VecX& qdot);

}  // namespace cogdyn
