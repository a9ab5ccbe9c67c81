#include "mvtryon/pose/select.hpp"

#include "mvtryon/errors.hpp"

namespace mvt::pose {
namespace {

double arm_mean_x(const PoseSkeleton& s, std::size_t shoulder, const char* side) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t j = shoulder; j < shoulder + 3; ++j)
        if (s.visible(j)) {
            sum += s[j].x;
            ++n;
        }
    if (n == 0) throw SelectionError(std::string("no visible ") + side + "-arm joint");
    return sum / n;
}

}  // namespace

std::string to_string(ViewChoice v) { return v == ViewChoice::Front ? "front" : "back"; }

ViewChoice hard_select(const PoseSkeleton& person) {
    const double r = arm_mean_x(person, RShoulder, "right");
    const double l = arm_mean_x(person, LShoulder, "left");
    return r > l ? ViewChoice::Back : ViewChoice::Front;
}

ViewChoice hard_select_or_front(const PoseSkeleton& person) {
    try {
        return hard_select(person);
    } catch (const SelectionError&) {
        return ViewChoice::Front;
    }
}

}  // namespace mvt::pose
