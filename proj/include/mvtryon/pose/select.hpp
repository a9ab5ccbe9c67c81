#pragma once

#include <string>

#include "mvtryon/pose/skeleton.hpp"

namespace mvt::pose {

enum class ViewChoice { Front, Back };

std::string to_string(ViewChoice v);

// Mean x of the visible right-arm joints (shoulder, elbow, wrist) against the
// left arm. Right arm further left in the image means the person faces the
// camera. Ties go to Front. Throws SelectionError if either arm has no
// visible joint.
ViewChoice hard_select(const PoseSkeleton& person);

// hard_select, falling back to Front when an arm is missing.
ViewChoice hard_select_or_front(const PoseSkeleton& person);

}  // namespace mvt::pose
