#pragma once

// One finite-difference case per differentiable primitive. Shared by the
// numerics unit tests and the acceptance gradient suite.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "mvtryon/numerics/ops.hpp"
#include "random.hpp"

namespace mvt::testing {

struct GradCase {
    std::string name;
    std::function<GradCheckResult()> run;
};

namespace detail {

// Contracts an op's output with a fixed random weight so every output entry
// contributes a distinct gradient.
inline Var project(Var y, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Var w = y.tape()->constant(random_tensor(y.shape(), rng));
    return sum(mul(y, w));
}

template <typename Build>
GradCase unary_case(std::string name, Shape shape, Build build, double lo = -1.0, double hi = 1.0) {
    return {name, [shape, build, lo, hi]() {
                std::mt19937_64 rng(11);
                Tensor x = random_param(shape, rng, lo, hi);
                return grad_check({&x}, [&](Tape& t) { return project(build(t.leaf(x)), 99); });
            }};
}

template <typename Build>
GradCase binary_case(std::string name, Shape sa, Shape sb, Build build) {
    return {name, [sa, sb, build]() {
                std::mt19937_64 rng(12);
                Tensor a = random_param(sa, rng);
                Tensor b = random_param(sb, rng);
                return grad_check({&a, &b}, [&](Tape& t) { return project(build(t.leaf(a), t.leaf(b)), 98); });
            }};
}

}  // namespace detail

inline std::vector<GradCase> op_grad_cases() {
    using detail::binary_case;
    using detail::unary_case;
    std::vector<GradCase> cases;
    cases.push_back(binary_case("add", {3, 4}, {3, 4}, [](Var a, Var b) { return add(a, b); }));
    cases.push_back(binary_case("sub", {3, 4}, {3, 4}, [](Var a, Var b) { return sub(a, b); }));
    cases.push_back(binary_case("mul", {3, 4}, {3, 4}, [](Var a, Var b) { return mul(a, b); }));
    cases.push_back(unary_case("scale", {5}, [](Var a) { return scale(a, -2.5); }));
    cases.push_back(unary_case("square", {2, 3}, [](Var a) { return square(a); }));
    // Entries kept away from the kink at zero.
    cases.push_back(unary_case("abs", {6}, [](Var a) { return abs(a); }, 0.1, 1.0));
    cases.push_back(unary_case("gelu", {2, 5}, [](Var a) { return gelu(a); }, -3.0, 3.0));
    cases.push_back(unary_case("sum", {3, 2}, [](Var a) { return scale(sum(a), 1.0); }));
    cases.push_back(unary_case("mean", {3, 2}, [](Var a) { return mean(square(a)); }));
    cases.push_back(binary_case("add_channel", {3, 2, 2}, {3}, [](Var a, Var b) { return add_channel(a, b); }));
    cases.push_back(binary_case("add_row", {4, 3}, {3}, [](Var a, Var b) { return add_row(a, b); }));
    cases.push_back(binary_case("mul_row", {4, 3}, {3}, [](Var a, Var b) { return mul_row(a, b); }));
    cases.push_back(unary_case("mean_trailing", {3, 2, 3}, [](Var a) { return mean_trailing(a); }));
    cases.push_back(binary_case("matmul", {4, 5}, {5, 3}, [](Var a, Var b) { return matmul(a, b); }));
    cases.push_back(unary_case("transpose", {3, 5}, [](Var a) { return transpose(a); }));
    cases.push_back(unary_case("reshape", {2, 6}, [](Var a) { return reshape(a, {3, 4}); }));
    cases.push_back(binary_case("concat_axis0", {2, 3}, {1, 3}, [](Var a, Var b) { return concat({a, b}, 0); }));
    cases.push_back(binary_case("concat_axis1", {2, 3}, {2, 2}, [](Var a, Var b) { return concat({a, b}, 1); }));
    cases.push_back(unary_case("softmax_axis0", {4, 3}, [](Var a) { return softmax(a, 0); }, -2.0, 2.0));
    cases.push_back(unary_case("softmax_axis1", {3, 4}, [](Var a) { return softmax(a, 1); }, -2.0, 2.0));
    cases.push_back(binary_case("conv2d", {2, 6, 5}, {3, 2, 3, 3},
                                [](Var x, Var k) { return conv2d(x, k, 1, 1); }));
    cases.push_back(binary_case("conv2d_stride2", {2, 7, 6}, {2, 2, 3, 3},
                                [](Var x, Var k) { return conv2d(x, k, 2, 0); }));
    cases.push_back(unary_case("avg_pool2", {2, 5, 4}, [](Var a) { return avg_pool2(a); }));
    cases.push_back(unary_case("upsample_nearest2", {2, 2, 3}, [](Var a) { return upsample_nearest2(a); }));
    cases.push_back(unary_case("resize_bilinear", {2, 3, 2}, [](Var a) { return resize_bilinear(a, 5, 4); }));
    cases.push_back({"layernorm", []() {
                         std::mt19937_64 rng(13);
                         Tensor x = random_param({4, 6}, rng, -2.0, 2.0);
                         Tensor g = random_param({6}, rng, 0.5, 1.5);
                         Tensor b = random_param({6}, rng);
                         return grad_check({&x, &g, &b}, [&](Tape& t) {
                             return detail::project(layernorm(t.leaf(x), t.leaf(g), t.leaf(b), 1e-5), 97);
                         });
                     }});
    return cases;
}

}  // namespace mvt::testing
