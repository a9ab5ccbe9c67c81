#include "mvtryon/nn/layers.hpp"

#include <cmath>

#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::nn {

LinearLayer bind_linear(Binder& bind, const std::string& name) {
    LinearLayer layer{bind(name + ".weight"), std::nullopt};
    if (layer.weight.shape().size() != 2) throw ContractError("linear weight '" + name + "' must be 2-D");
    if (bind.has(name + ".bias")) {
        layer.bias = bind(name + ".bias");
        if (layer.bias->shape() != Shape{layer.out()})
            throw ContractError("linear bias '" + name + "' has shape " + shape_str(layer.bias->shape()));
    }
    return layer;
}

Var linear(const LinearLayer& layer, Var x) {
    const Shape& xs = x.shape();
    if (xs.back() != layer.in())
        throw DimensionError("linear expects trailing dim " + std::to_string(layer.in()) + ", got " + shape_str(xs));
    const std::size_t rows = x.numel() / layer.in();
    Var y = matmul(reshape(x, {rows, layer.in()}), transpose(layer.weight));
    if (layer.bias) y = add_row(y, *layer.bias);
    Shape out = xs;
    out.back() = layer.out();
    return out == y.shape() ? y : reshape(y, out);
}

Var attention(Var q, Var k, Var v) {
    if (q.shape().size() != 2 || k.shape().size() != 2 || v.shape().size() != 2)
        throw DimensionError("attention expects 2-D Q, K, V");
    if (q.shape()[1] != k.shape()[1])
        throw DimensionError("attention Q " + shape_str(q.shape()) + " and K " + shape_str(k.shape()) +
                             " disagree on d");
    if (k.shape()[0] != v.shape()[0])
        throw DimensionError("attention K " + shape_str(k.shape()) + " and V " + shape_str(v.shape()) +
                             " disagree on token count");
    const double s = 1.0 / std::sqrt(static_cast<double>(q.shape()[1]));
    Var w = softmax(scale(matmul(q, transpose(k)), s), 1);
    return matmul(w, v);
}

Var conv_same(Binder& bind, const std::string& name, Var x) {
    Var k = bind(name + ".weight");
    if (k.shape().size() != 4 || x.shape().size() != 3 || k.shape()[1] != x.shape()[0])
        throw ContractError("conv '" + name + "' kernel " + shape_str(k.shape()) + " does not fit input " +
                            shape_str(x.shape()));
    Var y = conv2d(x, k, 1, k.shape()[2] / 2);
    if (bind.has(name + ".bias")) y = add_channel(y, bind(name + ".bias"));
    return y;
}

Var to_tokens(Var x) {
    const Shape& s = x.shape();
    if (s.size() != 3) throw DimensionError("to_tokens expects [C x H x W], got " + shape_str(s));
    return transpose(reshape(x, {s[0], s[1] * s[2]}));
}

Var from_tokens(Var tokens, std::size_t h, std::size_t w) {
    const Shape& s = tokens.shape();
    if (s.size() != 2 || s[0] != h * w)
        throw DimensionError("from_tokens: " + shape_str(s) + " is not a " + std::to_string(h) + "x" +
                             std::to_string(w) + " grid");
    return reshape(transpose(tokens), {s[1], h, w});
}

}  // namespace mvt::nn
