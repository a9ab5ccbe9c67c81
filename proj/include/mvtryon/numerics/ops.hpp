#pragma once

#include <cstddef>
#include <vector>

#include "mvtryon/numerics/tape.hpp"

// Differentiable operations over tape-recorded values. Every op validates
// shapes and throws DimensionError on mismatch. The result participates in
// backward() only if some input requires grad.
namespace mvt {

// Elementwise, identical shapes required.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var square(Var a);
Var abs(Var a);
Var gelu(Var a);

// Reductions to a scalar of shape {1}.
Var sum(Var a);
Var mean(Var a);

// Broadcasts b[C] over every trailing position of a[C x ...].
Var add_channel(Var a, Var b);
// Broadcasts b[d] over the rows of a[... x d].
Var add_row(Var a, Var b);
// Channel-wise scaling of a[... x d] by v[d].
Var mul_row(Var a, Var v);
// a[C x ...] -> [C], mean over all trailing positions.
Var mean_trailing(Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var concat(const std::vector<Var>& parts, std::size_t axis);
Var softmax(Var a, std::size_t axis);

// x[C_in x H x W] cross-correlated with k[C_out x C_in x k x k].
Var conv2d(Var x, Var kernels, std::size_t stride = 1, std::size_t pad = 0);
// 2x2 mean pooling, stride 2; odd trailing rows/columns are dropped.
Var avg_pool2(Var x);
Var upsample_nearest2(Var x);
// Half-pixel-centred bilinear resampling of x[C x H x W] to [C x out_h x out_w].
Var resize_bilinear(Var x, std::size_t out_h, std::size_t out_w);

// Normalizes each vector along the last axis, then applies gain[d] and bias[d].
Var layernorm(Var x, Var gain, Var bias, double eps = 1e-5);

// Plain-tensor helpers used where no tape is involved.
double gelu_scalar(double x);

}  // namespace mvt
